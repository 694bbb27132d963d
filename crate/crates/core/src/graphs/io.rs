//! JSON and DOT forms of resource graphs. Weights are written as `p/q`
//! strings (`p` when integral).

use std::fmt::Write as _;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{CommunicationGraph, EntanglementGraph, GraphError};
use crate::rational::{self, Rational};

/// The entanglement and communication graphs of one network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceGraphs {
    pub entanglement: EntanglementGraph,
    pub communication: CommunicationGraph,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphsFile {
    n: usize,
    entanglement: Vec<Vec<String>>,
    communication: Vec<Vec<String>>,
}

fn parse_matrix(n: usize, rows: &[Vec<String>], what: &str) -> Result<Vec<Vec<Rational>>, GraphError> {
    if rows.len() != n {
        return Err(GraphError::Field {
            path: what.to_string(),
            message: format!("expected {n} rows, found {}", rows.len()),
        });
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != n {
                return Err(GraphError::Field {
                    path: format!("{what}[{i}]"),
                    message: format!("expected {n} entries, found {}", row.len()),
                });
            }
            row.iter()
                .enumerate()
                .map(|(j, s)| {
                    rational::parse(s).map_err(|e| GraphError::Field {
                        path: format!("{what}[{i}][{j}]"),
                        message: e.to_string(),
                    })
                })
                .collect()
        })
        .collect()
}

/// Parses `{ "n", "entanglement", "communication" }`.
pub fn import_json(text: &str) -> Result<ResourceGraphs, GraphError> {
    let file: GraphsFile = serde_json::from_str(text).map_err(|e| GraphError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.n == 0 {
        return Err(GraphError::Empty);
    }
    let entanglement = EntanglementGraph::new(parse_matrix(file.n, &file.entanglement, "entanglement")?)?;
    let communication = CommunicationGraph::new(parse_matrix(file.n, &file.communication, "communication")?)?;
    Ok(ResourceGraphs {
        entanglement,
        communication,
    })
}

fn format_rows(rows: &[Vec<Rational>]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| r.iter().map(rational::format).collect())
        .collect()
}

pub fn export_json(graphs: &ResourceGraphs) -> String {
    let file = GraphsFile {
        n: graphs.entanglement.n(),
        entanglement: format_rows(graphs.entanglement.rows()),
        communication: format_rows(graphs.communication.rows()),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("string matrices serialize");
    s.push('\n');
    s
}

impl ResourceGraphs {
    pub fn new(entanglement: EntanglementGraph, communication: CommunicationGraph) -> Result<Self, GraphError> {
        if entanglement.n() != communication.n() {
            return Err(GraphError::Dimension {
                expected: entanglement.n(),
                got: communication.n(),
            });
        }
        Ok(Self {
            entanglement,
            communication,
        })
    }

    pub fn n(&self) -> usize {
        self.entanglement.n()
    }

    pub fn to_json(&self) -> String {
        export_json(self)
    }

    /// Both graphs as DOT: an undirected `entanglement` graph and a
    /// directed `communication` graph. Zero-weight edges are omitted.
    pub fn to_dot(&self) -> String {
        let mut out = self.entanglement.to_dot();
        out.push_str(&self.communication.to_dot());
        out
    }
}

impl EntanglementGraph {
    pub fn to_dot(&self) -> String {
        let n = self.n();
        let mut s = String::from("graph entanglement {\n");
        for i in 1..=n {
            let _ = writeln!(s, "  {i};");
        }
        for i in 1..=n {
            for j in i + 1..=n {
                let w = self.weight(i, j);
                if !w.is_zero() {
                    let _ = writeln!(s, "  {i} -- {j} [label=\"{}\"];", rational::format(w));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

impl CommunicationGraph {
    pub fn to_dot(&self) -> String {
        let n = self.n();
        let mut s = String::from("digraph communication {\n");
        for i in 1..=n {
            let _ = writeln!(s, "  {i};");
        }
        for i in 1..=n {
            for j in 1..=n {
                let w = self.weight(i, j);
                if i != j && !w.is_zero() {
                    let _ = writeln!(s, "  {i} -> {j} [label=\"{}\"];", rational::format(w));
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
  "n": 4,
  "entanglement": [["0","3","2","6"],["3","0","1","0"],["2","1","0","0"],["6","0","0","0"]],
  "communication": [["0","1","4","0"],["2","0","0","9"],["0","0","0","0"],["5","0","0","0"]]
}"#;

    #[test]
    fn import_example_and_round_trip() {
        let g = import_json(EXAMPLE).unwrap();
        assert_eq!(g.entanglement.total(), rational::int(12));
        assert_eq!(g.communication.total(), rational::int(21));
        let again = import_json(&export_json(&g)).unwrap();
        assert_eq!(again, g);
        assert_eq!(export_json(&again), export_json(&g));
    }

    #[test]
    fn empty_two_vertex_dot() {
        let dot = EntanglementGraph::zero(2).to_dot();
        assert!(dot.contains("  1;\n") && dot.contains("  2;\n"));
        assert!(!dot.contains("--"));
    }

    #[test]
    fn dot_labels() {
        let g = import_json(EXAMPLE).unwrap();
        let dot = g.to_dot();
        assert!(dot.contains("1 -- 4 [label=\"6\"]"));
        assert!(dot.contains("2 -> 4 [label=\"9\"]"));
        assert!(!dot.contains("4 -- 1"));
    }

    #[test]
    fn rejects_asymmetric_entanglement() {
        let bad = EXAMPLE.replace(r#"["3","0","1","0"]"#, r#"["4","0","1","0"]"#);
        assert!(matches!(import_json(&bad), Err(GraphError::Asymmetric { .. })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = import_json("{\n  \"n\": 2,\n  \"entanglement\": [[\"0\" \"1\"]]\n}").unwrap_err();
        match err {
            GraphError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_entry_carries_path() {
        let bad = EXAMPLE.replace(r#"["2","1","0","0"]"#, r#"["2","x","0","0"]"#);
        let err = import_json(&bad).unwrap_err();
        assert!(err.to_string().starts_with("entanglement[2][1]"), "{err}");
    }
}
