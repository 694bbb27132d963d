use crate::permutation::Permutation;
use crate::quantum::{encoding_operator, permutation_unitary, swap_unitary, BellState, QubitId};
use crate::rational::{int, Rational};

use super::ledger::{pair, ResourceLedger};
use super::teleport::{decode_pair, realize_pair};
use super::trace::Event;
use super::{ProtocolError, Session};

fn require_derangement(s: &Session, p: &Permutation) -> Result<(), ProtocolError> {
    if p.len() != s.n {
        return Err(ProtocolError::DataCount {
            expected: s.n,
            got: p.len(),
        });
    }
    if !p.is_derangement() {
        return Err(ProtocolError::NotDerangement(p.to_string()));
    }
    Ok(())
}

fn oracle_event(name: &str, p: &Permutation) -> Event {
    Event::Oracle {
        name: name.to_string(),
        moves: (1..=p.len()).map(|i| [i, p.apply(i)]).collect(),
    }
}

fn local_bell_pair(s: &mut Session, party: usize) -> Result<[QubitId; 2], ProtocolError> {
    let ids = s
        .ensemble
        .allocate_with_state(&[party, party], BellState::PhiPlus.amplitudes().to_vec())?;
    s.record(Event::LocalGate {
        party,
        name: "prepare_bell".into(),
        qubits: ids.iter().map(|q| q.label).collect(),
    });
    Ok([ids[0], ids[1]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntangleRun {
    /// `(i, P(i))` for every `i`.
    pub pairs: Vec<(usize, usize)>,
    /// Entropy of the first half of each pair; one ebit each when maximal.
    pub pair_entropy: Vec<f64>,
    /// Joint entropy of each pair; zero when the pair is pure.
    pub joint_entropy: Vec<f64>,
    pub created: Rational,
}

/// Every party prepares a local Bell pair, then the permutation acts on the
/// second halves, leaving party `i` entangled with party `P(i)`.
pub fn permutation_entangle(s: &mut Session, p: &Permutation) -> Result<EntangleRun, ProtocolError> {
    require_derangement(s, p)?;
    let mut first = Vec::with_capacity(s.n);
    let mut second = Vec::with_capacity(s.n);
    for party in 1..=s.n {
        let [a, b] = local_bell_pair(s, party)?;
        first.push(a);
        second.push(b);
    }
    s.ensemble.apply_gate(&permutation_unitary(p).on(&second)?)?;
    s.record(oracle_event("permutation", p));
    let mut run = EntangleRun {
        pairs: Vec::new(),
        pair_entropy: Vec::new(),
        joint_entropy: Vec::new(),
        created: int(0),
    };
    for i in 1..=s.n {
        let j = p.apply(i);
        s.ledger.create_ebit(i, j);
        s.record(Event::EbitCreate { pair: [i, j] });
        run.pairs.push((i, j));
        run.pair_entropy.push(s.ensemble.subsystem_entropy(&[first[i - 1]])?);
        run.joint_entropy
            .push(s.ensemble.subsystem_entropy(&[first[i - 1], second[j - 1]])?);
        run.created += int(1);
    }
    Ok(run)
}

/// Grants the one ebit per receiver `i` shared with its sender `P⁻¹(i)`.
pub fn grant_communication_pairs(ledger: &mut ResourceLedger, p: &Permutation) {
    let inv = p.inverse();
    for i in 1..=p.len() {
        ledger.grant(i, inv.apply(i), 1);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunicateRun {
    /// `decoded[i - 1]` is what party `i` read, sent by party `P⁻¹(i)`.
    pub decoded: Vec<u32>,
    pub correct_bits: usize,
}

/// Party `s` dense-codes `messages[s - 1]` onto its half of a pair shared
/// with `P(s)`; the permutation carries it there and `P(s)` Bell-measures.
pub fn permutation_communicate(
    s: &mut Session,
    p: &Permutation,
    messages: &[u32],
) -> Result<CommunicateRun, ProtocolError> {
    require_derangement(s, p)?;
    if messages.len() != s.n {
        return Err(ProtocolError::DataCount {
            expected: s.n,
            got: messages.len(),
        });
    }
    if let Some(&m) = messages.iter().find(|&&m| m > 0b11) {
        return Err(ProtocolError::BadMessage(m));
    }
    let inv = p.inverse();
    let mut need = ResourceLedger::new();
    grant_communication_pairs(&mut need, p);
    for i in 1..=s.n {
        let sender = inv.apply(i);
        if s.ledger.held(i, sender) < need.held(i, sender) {
            return Err(ProtocolError::InsufficientEbits {
                pair: pair(i, sender),
                held: crate::rational::format(&s.ledger.held(i, sender)),
            });
        }
    }

    let mut receivers = Vec::with_capacity(s.n);
    let mut hollow = vec![None; s.n];
    for i in 1..=s.n {
        let sender = inv.apply(i);
        let [a, h] = realize_pair(s, i, sender)?;
        receivers.push(a);
        hollow[sender - 1] = Some(h);
    }
    let hollow: Vec<QubitId> = hollow.into_iter().map(|h| h.expect("inverse is a bijection")).collect();
    for (k, &h) in hollow.iter().enumerate() {
        s.ensemble.apply_gate(&encoding_operator(messages[k]).on(&[h])?)?;
        s.record(Event::LocalGate {
            party: k + 1,
            name: format!("encode_{:02b}", messages[k]),
            qubits: vec![h.label],
        });
    }
    s.ensemble.apply_gate(&permutation_unitary(p).on(&hollow)?)?;
    s.record(oracle_event("permutation", p));

    let mut run = CommunicateRun {
        decoded: Vec::with_capacity(s.n),
        correct_bits: 0,
    };
    for i in 1..=s.n {
        let sender = inv.apply(i);
        let got = decode_pair(s, i, receivers[i - 1], hollow[i - 1])?;
        s.ledger.consume_ebit(i, sender)?;
        s.record(Event::EbitConsume { pair: [i, sender] });
        s.record(Event::Decode {
            from: sender,
            to: i,
            bits: 2,
        });
        let sent = messages[sender - 1];
        run.correct_bits += (0..2).filter(|b| (got >> b) & 1 == (sent >> b) & 1).count();
        run.decoded.push(got);
    }
    Ok(run)
}

/// Each side sends two bits to the other through one SWAP. Returns
/// `(read by 2, read by 1)`.
pub fn swap_communicate_demo(s: &mut Session, from_1: u32, from_2: u32) -> Result<(u32, u32), ProtocolError> {
    let run = permutation_communicate(s, &Permutation::cycle(2), &[from_1, from_2])?;
    Ok((run.decoded[1], run.decoded[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapEntangleOptions {
    /// 2: both sides start with a local pair; 1: only party 1 does.
    pub local_pairs: usize,
    pub apply_swap: bool,
}

impl Default for SwapEntangleOptions {
    fn default() -> Self {
        Self {
            local_pairs: 2,
            apply_swap: true,
        }
    }
}

/// Swaps one half of each local pair between two parties and returns the
/// entanglement entropy across the cut.
pub fn swap_entangle_demo(s: &mut Session, opts: SwapEntangleOptions) -> Result<f64, ProtocolError> {
    if s.n != 2 {
        return Err(ProtocolError::DataCount { expected: 2, got: s.n });
    }
    if !(1..=2).contains(&opts.local_pairs) {
        return Err(ProtocolError::DataCount {
            expected: 2,
            got: opts.local_pairs,
        });
    }
    let [_, b1] = local_bell_pair(s, 1)?;
    let b2 = if opts.local_pairs == 2 {
        local_bell_pair(s, 2)?[1]
    } else {
        s.ensemble.allocate_qubits(2, 1, "0")?[0]
    };
    if opts.apply_swap {
        s.ensemble.apply_gate(&swap_unitary().on(&[b1, b2])?)?;
        s.record(oracle_event("swap", &Permutation::cycle(2)));
        for _ in 0..opts.local_pairs {
            s.ledger.create_ebit(1, 2);
            s.record(Event::EbitCreate { pair: [1, 2] });
        }
    }
    Ok(s.ensemble.entanglement_entropy(&[1])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn six_cycle_creates_six_ebits() {
        let p = Permutation::from_images(vec![6, 1, 2, 3, 4, 5]).unwrap();
        let mut s = Session::new(6);
        let run = permutation_entangle(&mut s, &p).unwrap();
        assert_eq!(run.created, int(6));
        assert!(run.pair_entropy.iter().all(|e| (e - 1.0).abs() < 1e-9));
        assert!(run.joint_entropy.iter().all(|e| e.abs() < 1e-9));
        for i in 1..=6 {
            assert!((s.ensemble.entanglement_entropy(&[i]).unwrap() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn swap_is_the_two_party_case() {
        let mut s = Session::new(2);
        let run = permutation_entangle(&mut s, &Permutation::cycle(2)).unwrap();
        assert_eq!(run.created, int(2));
        assert_eq!(s.ledger.created(1, 2), int(2));
        assert!((s.ensemble.entanglement_entropy(&[1]).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_points_are_rejected() {
        let mut s = Session::new(3);
        let p = Permutation::from_images(vec![2, 1, 3]).unwrap();
        assert!(matches!(
            permutation_entangle(&mut s, &p),
            Err(ProtocolError::NotDerangement(_))
        ));
        assert!(permutation_communicate(&mut s, &p, &[0, 0, 0]).is_err());
    }

    #[test]
    fn three_cycle_all_messages() {
        let p = Permutation::cycle(3);
        for code in 0..64u32 {
            let msgs = [code & 3, (code >> 2) & 3, (code >> 4) & 3];
            let mut s = Session::new(3);
            grant_communication_pairs(&mut s.ledger, &p);
            let run = permutation_communicate(&mut s, &p, &msgs).unwrap();
            assert_eq!(run.correct_bits, 6);
            // party i reads what P⁻¹(i) sent: 1 ← 3, 2 ← 1, 3 ← 2
            assert_eq!(run.decoded, vec![msgs[2], msgs[0], msgs[1]]);
            assert_eq!(s.ledger.total_consumed(), int(3));
            assert_eq!(s.ensemble.qubit_count(), 0);
        }
    }

    #[test]
    fn communicate_needs_pairs() {
        let mut s = Session::new(3);
        let before = s.ledger.clone();
        assert!(permutation_communicate(&mut s, &Permutation::cycle(3), &[1, 2, 3]).is_err());
        assert_eq!(s.ledger, before);
        assert!(s.events.is_empty());
    }

    #[test]
    fn swap_demos() {
        let mut ok = 0;
        for a in 0..4 {
            for b in 0..4 {
                let mut s = Session::new(2);
                s.ledger.grant(1, 2, 2);
                if swap_communicate_demo(&mut s, a, b).unwrap() == (a, b) {
                    ok += 1;
                }
                assert_eq!(s.ledger.consumed(1, 2), int(2));
                assert_eq!(s.ledger.total_sent(), int(0));
            }
        }
        assert_eq!(ok, 16);

        let cases = [
            (SwapEntangleOptions::default(), 2.0),
            (SwapEntangleOptions { local_pairs: 2, apply_swap: false }, 0.0),
            (SwapEntangleOptions { local_pairs: 1, apply_swap: true }, 1.0),
        ];
        for (opts, want) in cases {
            let mut s = Session::new(2);
            let got = swap_entangle_demo(&mut s, opts).unwrap();
            assert!((got - want).abs() < 1e-9, "{opts:?}: {got}");
            assert_eq!(s.ledger.created(1, 2), int(want as i64));
        }
    }
}
