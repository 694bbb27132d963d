//! Checks a trace against the resource graphs it ran on.
//!
//! Across any cut, local operations and classical messages cannot create
//! entanglement, so every ebit established across it must be paid for by a
//! consumed ebit or a qubit carried across. Likewise bits read on one side
//! must come from messages, carried qubits, or carried qubits that were
//! halves of consumed pairs (dense coding).

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::graphs::{Partition, ResourceGraphs};
use crate::rational::{self, int, Rational};

use super::ledger::{pair, Pair};
use super::trace::{Event, ProtocolTrace};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub events: usize,
    pub cuts_checked: usize,
    pub consumed: String,
    pub created: String,
    pub bits_sent: String,
    pub bits_decoded: String,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Default)]
struct Tally {
    consumed: BTreeMap<Pair, Rational>,
    created: BTreeMap<Pair, Rational>,
    sent: BTreeMap<(usize, usize), Rational>,
    carried: BTreeMap<(usize, usize), Rational>,
    decoded: BTreeMap<(usize, usize), Rational>,
}

fn bump<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, by: i64) {
    *map.entry(key).or_insert_with(Rational::zero) += int(by);
}

fn at<K: Ord>(map: &BTreeMap<K, Rational>, key: &K) -> Rational {
    map.get(key).cloned().unwrap_or_else(Rational::zero)
}

fn tally(trace: &ProtocolTrace) -> Tally {
    let mut t = Tally::default();
    for e in &trace.events {
        match e {
            Event::EbitConsume { pair: [a, b] } => bump(&mut t.consumed, pair(*a, *b), 1),
            Event::EbitCreate { pair: [a, b] } => bump(&mut t.created, pair(*a, *b), 1),
            Event::ClassicalMessage {
                from,
                to,
                bits,
                supplementary: false,
            } => bump(&mut t.sent, (*from, *to), i64::from(*bits)),
            Event::QubitTransfer { from, to, .. } => bump(&mut t.carried, (*from, *to), 1),
            Event::Oracle { moves, .. } => {
                for m in moves.iter().filter(|m| m[0] != m[1]) {
                    bump(&mut t.carried, (m[0], m[1]), 1);
                }
            }
            Event::Decode { from, to, bits } => bump(&mut t.decoded, (*from, *to), i64::from(*bits)),
            _ => {}
        }
    }
    t
}

fn across_pairs(map: &BTreeMap<Pair, Rational>, cut: &Partition) -> Rational {
    map.iter()
        .filter(|((a, b), _)| cut.separates(*a, *b))
        .map(|(_, v)| v.clone())
        .sum()
}

/// Total over directed keys leaving side A (`outward`) or entering it.
fn directed(map: &BTreeMap<(usize, usize), Rational>, cut: &Partition, outward: bool) -> Rational {
    map.iter()
        .filter(|((a, b), _)| cut.separates(*a, *b) && cut.contains_a(*a) == outward)
        .map(|(_, v)| v.clone())
        .sum()
}

pub fn audit(trace: &ProtocolTrace, graphs: &ResourceGraphs) -> AuditReport {
    let n = trace.header.n;
    let mut violations = Vec::new();
    let mut flag = |rule: &str, detail: String| {
        violations.push(Violation {
            rule: rule.to_string(),
            detail,
        })
    };
    if graphs.n() != n {
        flag(
            "dimension",
            format!("trace has {n} parties, graphs have {}", graphs.n()),
        );
    }
    let t = tally(trace);
    let f = rational::format;

    if graphs.n() == n {
        for (&(a, b), used) in &t.consumed {
            let available = graphs.entanglement.weight(a, b) + at(&t.created, &(a, b));
            if *used > available {
                flag(
                    "ebit supply",
                    format!("pair {{{a},{b}}} consumed {} ebits, {} available", f(used), f(&available)),
                );
            }
        }
        for (&(a, b), bits) in &t.sent {
            let cap = graphs.communication.weight(a, b);
            if bits > cap {
                flag(
                    "channel capacity",
                    format!("{a}→{b} sent {} bits, capacity {}", f(bits), f(cap)),
                );
            }
        }
    }

    let cuts: Vec<Partition> = if n >= 2 { Partition::all(n).collect() } else { Vec::new() };
    for cut in &cuts {
        let side: Vec<usize> = cut.side_a().iter().copied().collect();
        let created = across_pairs(&t.created, cut);
        let consumed = across_pairs(&t.consumed, cut);
        let carried = directed(&t.carried, cut, true) + directed(&t.carried, cut, false);
        if created > &consumed + &carried {
            flag(
                "entanglement across cut",
                format!(
                    "cut {side:?}: {} ebits created from {} consumed and {} qubits carried",
                    f(&created),
                    f(&consumed),
                    f(&carried)
                ),
            );
        }
        for outward in [true, false] {
            let decoded = directed(&t.decoded, cut, outward);
            let sent = directed(&t.sent, cut, outward);
            let carried = directed(&t.carried, cut, outward);
            let dense = carried.clone().min(consumed.clone());
            if decoded > &sent + &carried + &dense {
                let arrow = if outward { "out of" } else { "into" };
                flag(
                    "bits across cut",
                    format!(
                        "cut {side:?}: {} bits decoded {arrow} side, {} sent, {} qubits carried",
                        f(&decoded),
                        f(&sent),
                        f(&carried)
                    ),
                );
            }
        }
    }

    let sum = |m: &BTreeMap<_, Rational>| -> Rational { m.values().sum() };
    AuditReport {
        events: trace.events.len(),
        cuts_checked: cuts.len(),
        consumed: f(&sum(&t.consumed)),
        created: f(&sum(&t.created)),
        bits_sent: f(&sum(&t.sent)),
        bits_decoded: f(&sum(&t.decoded)),
        violations,
    }
}
