use crate::permutation::Permutation;
use crate::quantum::entropy::shannon_entropy;
use crate::quantum::{permutation_unitary, BranchEnsemble, Povm, QubitId, UnitaryMatrix};
use crate::rational::{self, int};

use super::teleport::teleport;
use super::trace::Event;
use super::{CollectiveOp, ProtocolError, Session};

#[derive(Debug, Clone, PartialEq)]
pub struct StarRun {
    /// Data qubits after the run; entry `i` is back at party `i + 1`.
    pub data: Vec<QubitId>,
    /// Outcome entropy of a recorded measurement.
    pub supplementary_bits: Option<f64>,
}

/// Every party teleports its data qubit to `hub`, the hub applies `op`, and
/// the qubits are teleported home. `data[i]` must sit at party `i + 1`.
pub fn collective_op_star(
    s: &mut Session,
    data: &[QubitId],
    op: &CollectiveOp,
    hub: usize,
) -> Result<StarRun, ProtocolError> {
    let n = s.n;
    s.check_party(hub)?;
    if data.len() != n || data.iter().enumerate().any(|(i, q)| q.party != i + 1) {
        return Err(ProtocolError::DataCount {
            expected: n,
            got: data.len(),
        });
    }
    if op.qubits() != n {
        return Err(ProtocolError::OpArity {
            expected: n,
            got: op.qubits(),
        });
    }
    for party in (1..=n).filter(|&p| p != hub) {
        let held = s.ledger.held(party, hub);
        if held < int(2) {
            return Err(ProtocolError::InsufficientEbits {
                pair: super::ledger::pair(party, hub),
                held: rational::format(&held),
            });
        }
    }

    let mut at_hub = data.to_vec();
    for q in at_hub.iter_mut().filter(|q| q.party != hub) {
        *q = teleport(s, *q, hub)?;
    }
    let labels: Vec<u32> = at_hub.iter().map(|q| q.label).collect();
    let mut supplementary = None;
    match op {
        CollectiveOp::Unitary(u) => {
            s.ensemble.apply_gate(&u.on(&at_hub)?)?;
            s.record(Event::LocalGate {
                party: hub,
                name: "collective".into(),
                qubits: labels,
            });
        }
        CollectiveOp::Povm { povm, recorded } => {
            let p = s.ensemble.measure_povm(povm, &at_hub)?;
            s.record(Event::LocalMeasure {
                party: hub,
                qubits: labels,
                distribution: p.iter().enumerate().map(|(r, &v)| (r.to_string(), v)).collect(),
            });
            if *recorded {
                let cs = shannon_entropy(&p)?;
                s.ledger.add_supplementary(cs);
                for to in (1..=n).filter(|&j| j != hub) {
                    s.record(Event::ClassicalMessage {
                        from: hub,
                        to,
                        bits: cs.ceil() as u32,
                        supplementary: true,
                    });
                }
                supplementary = Some(cs);
            }
        }
    }
    let mut out = at_hub;
    for (i, q) in out.iter_mut().enumerate() {
        if i + 1 != hub {
            *q = teleport(s, *q, i + 1)?;
        }
    }
    Ok(StarRun {
        data: out,
        supplementary_bits: supplementary,
    })
}

/// The two-party case: A teleports to B, B applies `op`, B teleports back.
pub fn collective_op_two_qubit(
    s: &mut Session,
    data: [QubitId; 2],
    op: &CollectiveOp,
) -> Result<StarRun, ProtocolError> {
    if s.n != 2 {
        return Err(ProtocolError::DataCount { expected: s.n, got: 2 });
    }
    collective_op_star(s, &data, op, 2)
}

/// Outcome entropy, in bits, of measuring `povm` on `targets`.
pub fn supplementary_information(
    povm: &Povm,
    ensemble: &BranchEnsemble,
    targets: &[QubitId],
) -> Result<f64, ProtocolError> {
    let p = ensemble.measure_povm(povm, targets)?;
    Ok(shannon_entropy(&p)?)
}

/// Swaps of the consecutive pairs `(1,2), (3,4), …`; `n` even.
pub fn ps_unitary(n: usize) -> Result<UnitaryMatrix, ProtocolError> {
    let p = Permutation::pairwise_swap(n).ok_or(ProtocolError::Parity {
        what: "pairwise swap",
        expected: "even n",
        n,
    })?;
    Ok(permutation_unitary(&p))
}

/// Pairwise swaps on the first `n − 3` qubits and a 3-cycle on the rest; `n` odd, at least 3.
pub fn ps_cp_unitary(n: usize) -> Result<UnitaryMatrix, ProtocolError> {
    let p = Permutation::pairwise_swap_cycle(n).ok_or(ProtocolError::Parity {
        what: "pairwise swap with cycle",
        expected: "odd n >= 3",
        n,
    })?;
    Ok(permutation_unitary(&p))
}
