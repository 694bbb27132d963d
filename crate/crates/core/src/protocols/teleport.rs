use crate::quantum::{encoding_operator, pauli_x, pauli_z, BellState, Measurement, QubitId, UnitaryMatrix};

use super::trace::Event;
use super::{ProtocolError, Session};

/// Instantiates one held ebit as Φ+ on `(first, second)`. The ledger is not charged.
pub(crate) fn realize_pair(s: &mut Session, first: usize, second: usize) -> Result<[QubitId; 2], ProtocolError> {
    let ids = s
        .ensemble
        .allocate_with_state(&[first, second], BellState::PhiPlus.amplitudes().to_vec())?;
    s.record(Event::EbitRealize { pair: [first, second] });
    Ok([ids[0], ids[1]])
}

pub(crate) fn measure_event(party: usize, qubits: &[QubitId], m: &Measurement) -> Event {
    Event::LocalMeasure {
        party,
        qubits: qubits.iter().map(|q| q.label).collect(),
        distribution: m.distribution.iter().map(|(&o, &p)| (m.label(o), p)).collect(),
    }
}

fn correction(outcome: u32) -> Option<UnitaryMatrix> {
    match outcome {
        0b00 => None,
        0b01 => Some(pauli_x()),
        0b10 => Some(pauli_z()),
        _ => Some(pauli_z().after(&pauli_x()).expect("same dimension")),
    }
}

/// Moves the state of `qubit` to party `to`, spending one held ebit and two
/// bits. The returned id keeps the qubit's label and registry slot.
pub fn teleport(s: &mut Session, qubit: QubitId, to: usize) -> Result<QubitId, ProtocolError> {
    let from = qubit.party;
    s.check_party(from)?;
    s.check_party(to)?;
    if from == to {
        return Err(ProtocolError::SameParty(from));
    }
    s.ledger.check_ebit(from, to)?;
    let slot = s.ensemble.registry_position(&qubit)?;

    let [a, b] = realize_pair(s, from, to)?;
    let m = s.ensemble.bell_measure(qubit, a, true)?;
    s.record(measure_event(from, &[qubit, a], &m));
    s.ledger.consume_ebit(from, to)?;
    s.record(Event::EbitConsume { pair: [from, to] });
    s.ledger.send_bits(from, to, 2);
    s.record(Event::ClassicalMessage {
        from,
        to,
        bits: 2,
        supplementary: false,
    });

    s.ensemble
        .apply_conditional(m.id, |o| correction(o).map(|u| u.on(&[b]).expect("single target")))?;
    s.ensemble.coarse_grain();
    s.record(Event::LocalGate {
        party: to,
        name: "pauli_correction".into(),
        qubits: vec![b.label],
    });
    Ok(s.ensemble.assume_identity(b, qubit, slot)?)
}

/// Sends a two-bit `message` from `from` to `to` on one held ebit by
/// carrying the sender's half of the pair. Returns the decoded bits.
pub fn superdense_send(s: &mut Session, from: usize, to: usize, message: u32) -> Result<u32, ProtocolError> {
    if message > 0b11 {
        return Err(ProtocolError::BadMessage(message));
    }
    s.check_party(from)?;
    s.check_party(to)?;
    if from == to {
        return Err(ProtocolError::SameParty(from));
    }
    s.ledger.check_ebit(from, to)?;

    let [r, h] = realize_pair(s, to, from)?;
    s.ensemble.apply_gate(&encoding_operator(message).on(&[h])?)?;
    s.record(Event::LocalGate {
        party: from,
        name: format!("encode_{message:02b}"),
        qubits: vec![h.label],
    });
    let h = s.ensemble.relocate(h, to)?;
    s.record(Event::QubitTransfer {
        from,
        to,
        qubit: h.label,
    });
    let decoded = decode_pair(s, to, r, h)?;
    s.ledger.consume_ebit(from, to)?;
    s.record(Event::EbitConsume { pair: [to, from] });
    s.record(Event::Decode { from, to, bits: 2 });
    Ok(decoded)
}

/// Bell-measures `(first, second)` at `party` and returns the most likely label.
pub(crate) fn decode_pair(s: &mut Session, party: usize, first: QubitId, second: QubitId) -> Result<u32, ProtocolError> {
    let m = s.ensemble.bell_measure(first, second, true)?;
    s.record(measure_event(party, &[first, second], &m));
    s.ensemble.coarse_grain();
    let best = m
        .distribution
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(&o, _)| o)
        .unwrap_or(0);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random_state;
    use crate::rational::int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn teleport_preserves_state_and_charges_ledger() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_state(1, &mut rng);
        let mut s = Session::new(2);
        let q = s.ensemble.allocate_with_state(&[1], psi.clone()).unwrap()[0];
        s.ledger.grant(1, 2, 1);
        let moved = teleport(&mut s, q, 2).unwrap();
        assert_eq!(moved.party, 2);
        assert_eq!(moved.label, q.label);
        assert_eq!(s.ensemble.qubit_count(), 1);
        assert!(s.ensemble.fidelity_with(&psi, &[moved]).unwrap() > 1.0 - 1e-10);
        assert_eq!(s.ledger.consumed(1, 2), int(1));
        assert_eq!(s.ledger.sent(1, 2), int(2));
        assert_eq!(s.ledger.sent(2, 1), int(0));
        assert_eq!(s.ledger.held(1, 2), int(0));
    }

    #[test]
    fn teleport_without_ebits_is_refused() {
        let mut s = Session::new(2);
        let q = s.ensemble.allocate_qubits(1, 1, "1").unwrap()[0];
        let before = s.ledger.clone();
        assert!(matches!(
            teleport(&mut s, q, 2),
            Err(ProtocolError::InsufficientEbits { .. })
        ));
        assert_eq!(s.ledger, before);
        assert!(s.events.is_empty());
        assert_eq!(s.ensemble.qubit_count(), 1);
    }

    #[test]
    fn entanglement_follows_the_teleported_qubit() {
        let mut s = Session::new(3);
        let ids = s
            .ensemble
            .allocate_with_state(&[1, 2], BellState::PsiMinus.amplitudes().to_vec())
            .unwrap();
        s.ledger.grant(2, 3, 1);
        assert!((s.ensemble.entanglement_entropy(&[1]).unwrap() - 1.0).abs() < 1e-9);
        let moved = teleport(&mut s, ids[1], 3).unwrap();
        assert!((s.ensemble.entanglement_entropy(&[1]).unwrap() - 1.0).abs() < 1e-9);
        assert!(s.ensemble.entanglement_entropy(&[2]).unwrap().abs() < 1e-12);
        let target = BellState::PsiMinus.amplitudes();
        assert!(s.ensemble.fidelity_with(&target, &[ids[0], moved]).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn superdense_decodes_every_message() {
        for msg in 0..4 {
            let mut s = Session::new(2);
            s.ledger.grant(1, 2, 1);
            assert_eq!(superdense_send(&mut s, 1, 2, msg).unwrap(), msg);
            assert_eq!(s.ledger.consumed(1, 2), int(1));
            assert_eq!(s.ledger.total_sent(), int(0));
            assert_eq!(s.ensemble.qubit_count(), 0);
        }
        let mut s = Session::new(2);
        s.ledger.grant(1, 2, 2);
        assert_eq!(superdense_send(&mut s, 1, 2, 0b10).unwrap(), 0b10);
        assert_eq!(superdense_send(&mut s, 2, 1, 0b01).unwrap(), 0b01);
        assert_eq!(s.ledger.consumed(1, 2), int(2));
        assert!(superdense_send(&mut s, 1, 2, 0).is_err());
        assert!(superdense_send(&mut s, 1, 2, 4).is_err());
    }

    #[test]
    fn identity_message_measures_phi_plus() {
        let mut s = Session::new(2);
        s.ledger.grant(1, 2, 1);
        superdense_send(&mut s, 1, 2, 0).unwrap();
        let measured = s
            .events
            .iter()
            .find_map(|e| match e {
                Event::LocalMeasure { distribution, .. } => Some(distribution.clone()),
                _ => None,
            })
            .unwrap();
        assert_eq!(measured.len(), 1);
        assert!((measured["00"] - 1.0).abs() < 1e-12);
    }
}
