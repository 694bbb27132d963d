use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::graphs::{CommunicationGraph, EntanglementGraph, GraphError};
use crate::rational::{self, Rational};

use super::ProtocolError;

/// Unordered party pair, stored with the smaller index first.
pub type Pair = (usize, usize);

pub fn pair(a: usize, b: usize) -> Pair {
    (a.min(b), a.max(b))
}

/// Per-pair ebit and per-direction bit accounting for one protocol run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResourceLedger {
    ebits_held: BTreeMap<Pair, Rational>,
    ebits_consumed: BTreeMap<Pair, Rational>,
    ebits_created: BTreeMap<Pair, Rational>,
    bits_sent: BTreeMap<(usize, usize), Rational>,
    supplementary_bits: f64,
}

fn get(map: &BTreeMap<Pair, Rational>, key: Pair) -> Rational {
    map.get(&key).cloned().unwrap_or_else(Rational::zero)
}

fn add(map: &mut BTreeMap<Pair, Rational>, key: Pair, amount: &Rational) {
    *map.entry(key).or_insert_with(Rational::zero) += amount;
}

impl ResourceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ledger whose held ebits are the weights of `g`.
    pub fn from_entanglement(g: &EntanglementGraph) -> Self {
        let mut ledger = Self::new();
        for i in 1..=g.n() {
            for j in i + 1..=g.n() {
                let w = g.weight(i, j);
                if !w.is_zero() {
                    ledger.ebits_held.insert((i, j), w.clone());
                }
            }
        }
        ledger
    }

    pub fn grant(&mut self, a: usize, b: usize, ebits: i64) {
        add(&mut self.ebits_held, pair(a, b), &Rational::from_integer(ebits.into()));
    }

    pub fn held(&self, a: usize, b: usize) -> Rational {
        get(&self.ebits_held, pair(a, b))
    }

    pub fn consumed(&self, a: usize, b: usize) -> Rational {
        get(&self.ebits_consumed, pair(a, b))
    }

    pub fn created(&self, a: usize, b: usize) -> Rational {
        get(&self.ebits_created, pair(a, b))
    }

    pub fn sent(&self, from: usize, to: usize) -> Rational {
        self.bits_sent.get(&(from, to)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn supplementary_bits(&self) -> f64 {
        self.supplementary_bits
    }

    /// Fails without touching the ledger when fewer than one ebit is held.
    pub fn check_ebit(&self, a: usize, b: usize) -> Result<(), ProtocolError> {
        let held = self.held(a, b);
        if held < Rational::one() {
            return Err(ProtocolError::InsufficientEbits {
                pair: pair(a, b),
                held: rational::format(&held),
            });
        }
        Ok(())
    }

    pub fn consume_ebit(&mut self, a: usize, b: usize) -> Result<(), ProtocolError> {
        self.check_ebit(a, b)?;
        let key = pair(a, b);
        *self.ebits_held.get_mut(&key).expect("checked above") -= Rational::one();
        add(&mut self.ebits_consumed, key, &Rational::one());
        Ok(())
    }

    /// A newly established ebit also becomes available for later use.
    pub fn create_ebit(&mut self, a: usize, b: usize) {
        let key = pair(a, b);
        add(&mut self.ebits_created, key, &Rational::one());
        add(&mut self.ebits_held, key, &Rational::one());
    }

    pub fn send_bits(&mut self, from: usize, to: usize, bits: i64) {
        *self
            .bits_sent
            .entry((from, to))
            .or_insert_with(Rational::zero) += Rational::from_integer(bits.into());
    }

    pub fn add_supplementary(&mut self, bits: f64) {
        self.supplementary_bits += bits;
    }

    pub fn total_consumed(&self) -> Rational {
        self.ebits_consumed.values().sum()
    }

    pub fn total_created(&self) -> Rational {
        self.ebits_created.values().sum()
    }

    pub fn total_sent(&self) -> Rational {
        self.bits_sent.values().sum()
    }

    /// Currently held ebits as an entanglement graph on `n` parties.
    pub fn held_graph(&self, n: usize) -> Result<EntanglementGraph, GraphError> {
        let mut e = vec![vec![Rational::zero(); n]; n];
        for (&(a, b), w) in &self.ebits_held {
            check_party(a, n)?;
            check_party(b, n)?;
            e[a - 1][b - 1] = w.clone();
            e[b - 1][a - 1] = w.clone();
        }
        EntanglementGraph::new(e)
    }

    /// Consumed ebits and sent bits as resource graphs on `n` parties.
    pub fn usage_graphs(&self, n: usize) -> Result<(EntanglementGraph, CommunicationGraph), GraphError> {
        let mut e = vec![vec![Rational::zero(); n]; n];
        for (&(a, b), w) in &self.ebits_consumed {
            check_party(a, n)?;
            check_party(b, n)?;
            e[a - 1][b - 1] = w.clone();
            e[b - 1][a - 1] = w.clone();
        }
        let mut c = vec![vec![Rational::zero(); n]; n];
        for (&(a, b), w) in &self.bits_sent {
            check_party(a, n)?;
            check_party(b, n)?;
            c[a - 1][b - 1] = w.clone();
        }
        Ok((EntanglementGraph::new(e)?, CommunicationGraph::new(c)?))
    }

    pub fn summary(&self) -> LedgerSummary {
        let pairs = |m: &BTreeMap<Pair, Rational>| {
            m.iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(&(a, b), v)| Entry {
                    from: a,
                    to: b,
                    amount: rational::format(v),
                })
                .collect()
        };
        LedgerSummary {
            ebits_held: pairs(&self.ebits_held),
            ebits_consumed: pairs(&self.ebits_consumed),
            ebits_created: pairs(&self.ebits_created),
            bits_sent: pairs(&self.bits_sent),
            supplementary_bits: self.supplementary_bits,
            total_ebits_consumed: rational::format(&self.total_consumed()),
            total_ebits_created: rational::format(&self.total_created()),
            total_bits_sent: rational::format(&self.total_sent()),
        }
    }
}

fn check_party(p: usize, n: usize) -> Result<(), GraphError> {
    if p == 0 || p > n {
        return Err(GraphError::Operation(format!("party {p} outside 1..={n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub from: usize,
    pub to: usize,
    pub amount: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerSummary {
    pub ebits_held: Vec<Entry>,
    pub ebits_consumed: Vec<Entry>,
    pub ebits_created: Vec<Entry>,
    pub bits_sent: Vec<Entry>,
    pub supplementary_bits: f64,
    pub total_ebits_consumed: String,
    pub total_ebits_created: String,
    pub total_bits_sent: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn consume_needs_a_held_ebit() {
        let mut l = ResourceLedger::new();
        let before = l.clone();
        assert!(matches!(
            l.consume_ebit(1, 2),
            Err(ProtocolError::InsufficientEbits { pair: (1, 2), .. })
        ));
        assert_eq!(l, before);
        l.grant(2, 1, 1);
        l.consume_ebit(1, 2).unwrap();
        assert_eq!(l.held(1, 2), int(0));
        assert_eq!(l.consumed(2, 1), int(1));
        assert!(l.consume_ebit(1, 2).is_err());
    }

    #[test]
    fn created_ebits_are_spendable() {
        let mut l = ResourceLedger::new();
        l.create_ebit(3, 1);
        assert_eq!(l.held(1, 3), int(1));
        l.consume_ebit(1, 3).unwrap();
        assert_eq!(l.total_created(), int(1));
        assert_eq!(l.total_consumed(), int(1));
    }

    #[test]
    fn usage_graphs_follow_direction() {
        let mut l = ResourceLedger::new();
        l.grant(1, 2, 2);
        l.consume_ebit(1, 2).unwrap();
        l.send_bits(1, 2, 2);
        let (e, c) = l.usage_graphs(3).unwrap();
        assert_eq!(e.weight(2, 1), &int(1));
        assert_eq!(c.weight(1, 2), &int(2));
        assert_eq!(c.weight(2, 1), &int(0));
        assert!(l.usage_graphs(1).is_err());
    }
}
