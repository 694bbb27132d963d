//! Resource graphs over `n` laboratories.
//!
//! An [`EntanglementGraph`] stores the ebits shared by each unordered pair of
//! laboratories; a [`CommunicationGraph`] stores the classical bits each
//! laboratory can send directly to each other one. Weights are exact
//! rationals so factorial scalings stay exact.

mod delta;
mod io;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::permutation::Permutation;
use crate::rational::{self, Rational};

pub use delta::{delta_three_lab_bound, DeltaMatrix, DeltaVerdict};
pub use io::{export_json, import_json, ResourceGraphs};

/// Largest vertex count for the explicit sum over all `n!` relabelings.
pub const MAX_BRUTE_FORCE_N: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("weight matrix must be {n}x{n}, row {row} has {len} entries")]
    Shape { n: usize, row: usize, len: usize },
    #[error("graph needs at least one vertex")]
    Empty,
    #[error("{what}[{i}][{j}]: diagonal entries must be zero")]
    Diagonal { what: &'static str, i: usize, j: usize },
    #[error("{what}[{i}][{j}]: weights must be nonnegative")]
    Negative { what: &'static str, i: usize, j: usize },
    #[error("{what}[{i}][{j}] differs from [{j}][{i}]: matrix must be symmetric")]
    Asymmetric { what: &'static str, i: usize, j: usize },
    #[error("explicit symmetrisation is limited to n <= {MAX_BRUTE_FORCE_N}, got n = {0}")]
    TooLarge(usize),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    Dimension { expected: usize, got: usize },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("{0}")]
    Operation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Entanglement,
    Communication,
}

impl GraphKind {
    fn name(self) -> &'static str {
        match self {
            GraphKind::Entanglement => "entanglement",
            GraphKind::Communication => "communication",
        }
    }
}

/// Square matrix of nonnegative rationals with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Weights(Vec<Vec<Rational>>);

impl Weights {
    fn validate(rows: Vec<Vec<Rational>>, kind: GraphKind) -> Result<Self, GraphError> {
        let n = rows.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let what = kind.name();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::Shape { n, row: i, len: row.len() });
            }
            for (j, w) in row.iter().enumerate() {
                if i == j && !w.is_zero() {
                    return Err(GraphError::Diagonal { what, i, j });
                }
                if w.is_negative() {
                    return Err(GraphError::Negative { what, i, j });
                }
                if kind == GraphKind::Entanglement && *w != rows[j][i] {
                    return Err(GraphError::Asymmetric { what, i, j });
                }
            }
        }
        Ok(Self(rows))
    }

    fn n(&self) -> usize {
        self.0.len()
    }

    fn sum(&self) -> Rational {
        self.0.iter().flatten().sum()
    }

    fn permuted(&self, p: &Permutation) -> Self {
        let n = self.n();
        Self(
            (1..=n)
                .map(|i| (1..=n).map(|j| self.0[p.apply(i) - 1][p.apply(j) - 1].clone()).collect())
                .collect(),
        )
    }

    /// Entrywise `Σ_P w(P(i), P(j))` over every permutation of the vertices.
    fn symmetrised(&self) -> Result<Self, GraphError> {
        let n = self.n();
        if n > MAX_BRUTE_FORCE_N {
            return Err(GraphError::TooLarge(n));
        }
        // integer numerators over a common denominator keep the n! loop cheap
        let denom = self
            .0
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled: Vec<Vec<BigInt>> = self
            .0
            .iter()
            .map(|row| row.iter().map(|w| w.numer() * (&denom / w.denom())).collect())
            .collect();
        let mut acc = vec![vec![BigInt::zero(); n]; n];
        for p in Permutation::all(n) {
            let img = p.images();
            for i in 0..n {
                for j in 0..n {
                    acc[i][j] += &scaled[img[i] - 1][img[j] - 1];
                }
            }
        }
        Ok(Self(
            acc.into_iter()
                .map(|row| row.into_iter().map(|x| Rational::new(x, denom.clone())).collect())
                .collect(),
        ))
    }

    fn regular(n: usize, w: &Rational) -> Self {
        Self(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { Rational::zero() } else { w.clone() })
                        .collect()
                })
                .collect(),
        )
    }

    /// The common off-diagonal weight, when every off-diagonal entry agrees.
    fn regular_weight(&self) -> Option<Rational> {
        let n = self.n();
        if n < 2 {
            return None;
        }
        let w = &self.0[0][1];
        let uniform = (0..n).all(|i| (0..n).all(|j| i == j || self.0[i][j] == *w));
        uniform.then(|| w.clone())
    }
}

macro_rules! graph_common {
    ($t:ty, $kind:expr) => {
        impl $t {
            /// Validates and wraps an `n×n` weight matrix (0-based rows).
            pub fn new(weights: Vec<Vec<Rational>>) -> Result<Self, GraphError> {
                Ok(Self(Weights::validate(weights, $kind)?))
            }

            pub fn from_integers(weights: &[&[i64]]) -> Result<Self, GraphError> {
                Self::new(
                    weights
                        .iter()
                        .map(|r| r.iter().map(|&w| rational::int(w)).collect())
                        .collect(),
                )
            }

            pub fn zero(n: usize) -> Self {
                Self(Weights::regular(n, &Rational::zero()))
            }

            /// Complete graph with every (directed) edge weighted `w`.
            pub fn regular_complete(n: usize, w: Rational) -> Self {
                Self(Weights::regular(n, &w))
            }

            pub fn kind(&self) -> GraphKind {
                $kind
            }

            pub fn n(&self) -> usize {
                self.0.n()
            }

            /// Weight between 1-based vertices `i` and `j`.
            pub fn weight(&self, i: usize, j: usize) -> &Rational {
                &self.0 .0[i - 1][j - 1]
            }

            pub fn rows(&self) -> &[Vec<Rational>] {
                &self.0 .0
            }

            /// Relabels vertices: the new weight of `(i, j)` is the old weight of `(P(i), P(j))`.
            pub fn permuted(&self, p: &Permutation) -> Self {
                Self(self.0.permuted(p))
            }

            /// Sum of the graph over all `n!` vertex relabelings (`n ≤ 8`).
            pub fn symmetrise(&self) -> Result<Self, GraphError> {
                Ok(Self(self.0.symmetrised()?))
            }

            pub fn regular_weight(&self) -> Option<Rational> {
                self.0.regular_weight()
            }

            /// Closed-form edge weight of [`Self::symmetrise`].
            pub fn symmetrised_edge_weight(&self) -> Rational {
                symmetrised_edge_weight($kind, &self.total(), self.n())
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntanglementGraph(Weights);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunicationGraph(Weights);

graph_common!(EntanglementGraph, GraphKind::Entanglement);
graph_common!(CommunicationGraph, GraphKind::Communication);

impl EntanglementGraph {
    /// Total shared entanglement, `½ Σ_ij E_ij`.
    pub fn total(&self) -> Rational {
        self.0.sum() / rational::int(2)
    }

    pub fn cross_partition(&self, p: &Partition) -> Result<Rational, GraphError> {
        p.check_n(self.n())?;
        Ok(p
            .side_a
            .iter()
            .flat_map(|&i| p.side_b.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.weight(i, j).clone())
            .sum())
    }

    /// Weight on unordered edges outside `gain`, `½ Σ` over both orders.
    pub fn expendable(&self, gain: &BTreeSet<(usize, usize)>) -> Rational {
        let n = self.n();
        let mut total = Rational::zero();
        for i in 1..=n {
            for j in 1..=n {
                if i != j && !gain.contains(&(i.min(j), i.max(j))) {
                    total += self.weight(i, j);
                }
            }
        }
        total / rational::int(2)
    }
}

/// Bits that can cross a partition, per direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossFlow {
    pub a_to_b: Rational,
    pub b_to_a: Rational,
}

impl CommunicationGraph {
    /// Total sendable bits, `Σ_ij C_ij`.
    pub fn total(&self) -> Rational {
        self.0.sum()
    }

    pub fn cross_partition(&self, p: &Partition) -> Result<CrossFlow, GraphError> {
        p.check_n(self.n())?;
        let flow = |from: &BTreeSet<usize>, to: &BTreeSet<usize>| -> Rational {
            from.iter()
                .flat_map(|&i| to.iter().map(move |&j| (i, j)))
                .map(|(i, j)| self.weight(i, j).clone())
                .sum()
        };
        Ok(CrossFlow {
            a_to_b: flow(&p.side_a, &p.side_b),
            b_to_a: flow(&p.side_b, &p.side_a),
        })
    }

    /// Weight on directed edges outside `gain`.
    pub fn expendable(&self, gain: &BTreeSet<(usize, usize)>) -> Rational {
        let n = self.n();
        let mut total = Rational::zero();
        for i in 1..=n {
            for j in 1..=n {
                if i != j && !gain.contains(&(i, j)) {
                    total += self.weight(i, j);
                }
            }
        }
        total
    }
}

pub fn total_entanglement(g: &EntanglementGraph) -> Rational {
    g.total()
}

pub fn total_communication(g: &CommunicationGraph) -> Rational {
    g.total()
}

/// Edge weight of the symmetrised graph from the original total:
/// `e = 2 (n-2)! E` for entanglement, `c = (n-2)! C` for communication.
pub fn symmetrised_edge_weight(kind: GraphKind, total: &Rational, n: usize) -> Rational {
    assert!(n >= 2, "symmetrised edge weight needs n >= 2");
    let base = rational::factorial(n - 2) * total;
    match kind {
        GraphKind::Entanglement => base * rational::int(2),
        GraphKind::Communication => base,
    }
}

/// Inverse of [`symmetrised_edge_weight`]: the original total implied by edge weight `w`.
pub fn total_from_edge_weight(kind: GraphKind, w: &Rational, n: usize) -> Rational {
    let base = w / rational::factorial(n - 2);
    match kind {
        GraphKind::Entanglement => base / rational::int(2),
        GraphKind::Communication => base,
    }
}

/// The star topology of the hub-based teleportation protocol: 2 ebits and
/// 2 bits each way on every hub edge.
pub fn star_graphs(n: usize, hub: usize) -> Result<(EntanglementGraph, CommunicationGraph), GraphError> {
    if n < 2 || hub == 0 || hub > n {
        return Err(GraphError::Operation(format!("star graph needs n >= 2 and hub in 1..={n}")));
    }
    let two = rational::int(2);
    let rows: Vec<Vec<Rational>> = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    if i != j && (i == hub || j == hub) {
                        two.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    Ok((EntanglementGraph::new(rows.clone())?, CommunicationGraph::new(rows)?))
}

/// A two-sided cut of the vertex set `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    side_a: BTreeSet<usize>,
    side_b: BTreeSet<usize>,
}

impl Partition {
    pub fn new(n: usize, side_a: impl IntoIterator<Item = usize>) -> Result<Self, GraphError> {
        let side_a: BTreeSet<usize> = side_a.into_iter().collect();
        if side_a.iter().any(|&i| i == 0 || i > n) {
            return Err(GraphError::Partition(format!("vertices must lie in 1..={n}")));
        }
        let side_b: BTreeSet<usize> = (1..=n).filter(|i| !side_a.contains(i)).collect();
        if side_a.is_empty() || side_b.is_empty() {
            return Err(GraphError::Partition("both sides must be nonempty".into()));
        }
        Ok(Self { n, side_a, side_b })
    }

    /// Odd-labelled laboratories on side A, even-labelled on side B.
    pub fn parity(n: usize) -> Result<Self, GraphError> {
        Self::new(n, (1..=n).filter(|i| i % 2 == 1))
    }

    /// Every cut with vertex 1 on side A.
    pub fn all(n: usize) -> impl Iterator<Item = Partition> {
        let full = if n == 0 { 0 } else { (1u64 << (n - 1)) - 1 };
        (0..full).map(move |mask| {
            let side_a = std::iter::once(1).chain((2..=n).filter(move |i| mask >> (i - 2) & 1 == 1));
            Partition::new(n, side_a).expect("proper cut")
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side_a(&self) -> &BTreeSet<usize> {
        &self.side_a
    }

    pub fn side_b(&self) -> &BTreeSet<usize> {
        &self.side_b
    }

    pub fn separates(&self, i: usize, j: usize) -> bool {
        self.side_a.contains(&i) != self.side_a.contains(&j)
    }

    pub fn contains_a(&self, i: usize) -> bool {
        self.side_a.contains(&i)
    }

    fn check_n(&self, n: usize) -> Result<(), GraphError> {
        if self.n != n {
            return Err(GraphError::Dimension { expected: n, got: self.n });
        }
        Ok(())
    }
}

/// Unordered edges `{i, P(i)}` along which a permutation establishes entanglement.
pub fn gain_edges(p: &Permutation) -> BTreeSet<(usize, usize)> {
    (1..=p.len())
        .filter(|&i| p.apply(i) != i)
        .map(|i| {
            let j = p.apply(i);
            (i.min(j), i.max(j))
        })
        .collect()
}

/// Both directions of every [`gain_edges`] edge.
pub fn directed_gain_edges(p: &Permutation) -> BTreeSet<(usize, usize)> {
    gain_edges(p)
        .into_iter()
        .flat_map(|(i, j)| [(i, j), (j, i)])
        .collect()
}

/// Weight of expendable resources: weight on edges outside the gain set.
pub fn expendable_resources(
    graph: &ResourceGraphRef<'_>,
    gain: &BTreeSet<(usize, usize)>,
) -> Rational {
    match graph {
        ResourceGraphRef::Entanglement(g) => g.expendable(gain),
        ResourceGraphRef::Communication(g) => g.expendable(gain),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ResourceGraphRef<'a> {
    Entanglement(&'a EntanglementGraph),
    Communication(&'a CommunicationGraph),
}

/// Operations whose `n!`-fold runs drive the lower-bound arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetOp {
    /// Pairwise swaps, even `n`.
    PairwiseSwap,
    /// Pairwise swaps plus a 3-cycle, odd `n ≥ 3`.
    PairwiseSwapCycle,
}

impl TargetOp {
    pub fn for_parity(n: usize) -> Self {
        if n % 2 == 0 {
            TargetOp::PairwiseSwap
        } else {
            TargetOp::PairwiseSwapCycle
        }
    }

    pub fn permutation(self, n: usize) -> Result<Permutation, GraphError> {
        match self {
            TargetOp::PairwiseSwap => Permutation::pairwise_swap(n),
            TargetOp::PairwiseSwapCycle => Permutation::pairwise_swap_cycle(n),
        }
        .ok_or_else(|| GraphError::Operation(format!("{self:?} is undefined for n = {n}")))
    }
}

/// Outcome of testing whether a transfer stays within half the expendable resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfTransfer {
    pub satisfied: bool,
    /// `expendable/2 − (created − direct)`; nonnegative iff satisfied.
    pub slack: Rational,
    pub expendable: Rational,
    /// Resource already sitting on the gaining edges.
    pub direct: Rational,
}

/// Checks `created − direct ≤ expendable / 2` on a regular complete graph
/// of edge weight `weight`, where the gaining edges are those of `op`.
pub fn half_transfer_check(
    weight: &Rational,
    n: usize,
    created: &Rational,
    kind: GraphKind,
    op: TargetOp,
) -> Result<HalfTransfer, GraphError> {
    let p = op.permutation(n)?;
    let (expendable, gain_count) = match kind {
        GraphKind::Entanglement => {
            let gain = gain_edges(&p);
            let g = EntanglementGraph::regular_complete(n, weight.clone());
            (g.expendable(&gain), gain.len())
        }
        GraphKind::Communication => {
            let gain = directed_gain_edges(&p);
            let g = CommunicationGraph::regular_complete(n, weight.clone());
            (g.expendable(&gain), gain.len())
        }
    };
    let direct = weight * rational::int(gain_count as i64);
    let slack = &expendable / rational::int(2) - (created - &direct);
    Ok(HalfTransfer {
        satisfied: !slack.is_negative(),
        slack,
        expendable,
        direct,
    })
}
