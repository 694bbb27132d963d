//! The fixed Bell basis and its two-bit labels.

use super::matrix::{c, pauli_x, pauli_z, UnitaryMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellState {
    PhiPlus,
    PsiPlus,
    PhiMinus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PsiPlus,
        BellState::PhiMinus,
        BellState::PsiMinus,
    ];

    /// Two-bit label: Φ+ 00, Ψ+ 01, Φ− 10, Ψ− 11.
    pub fn bits(self) -> u32 {
        match self {
            BellState::PhiPlus => 0b00,
            BellState::PsiPlus => 0b01,
            BellState::PhiMinus => 0b10,
            BellState::PsiMinus => 0b11,
        }
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.bits() == bits & 0b11).filter(|_| bits < 4)
    }

    /// Amplitudes over `|first second⟩`, first qubit most significant.
    pub fn amplitudes(self) -> [C64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (o, p, m) = (c(0.0, 0.0), c(h, 0.0), c(-h, 0.0));
        match self {
            BellState::PhiPlus => [p, o, o, p],
            BellState::PsiPlus => [o, p, p, o],
            BellState::PhiMinus => [p, o, o, m],
            BellState::PsiMinus => [o, p, m, o],
        }
    }
}

/// The local operator on the second qubit that takes Φ+ to the Bell state
/// labelled `bits`: I, X, Z or XZ (Z first).
pub fn encoding_operator(bits: u32) -> UnitaryMatrix {
    let x = bits & 0b01 != 0;
    let z = bits & 0b10 != 0;
    match (z, x) {
        (false, false) => UnitaryMatrix::identity(1),
        (false, true) => pauli_x(),
        (true, false) => pauli_z(),
        (true, true) => pauli_x().after(&pauli_z()).expect("same dimension"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::kron;
    use nalgebra::DVector;

    #[test]
    fn encoding_reaches_each_label() {
        let phi = DVector::from_row_slice(&BellState::PhiPlus.amplitudes());
        for b in BellState::ALL {
            let op = kron(UnitaryMatrix::identity(1).matrix(), encoding_operator(b.bits()).matrix());
            let out = op * &phi;
            let want = DVector::from_row_slice(&b.amplitudes());
            assert!((out - want).norm() < 1e-12, "{b:?}");
        }
    }

    #[test]
    fn labels_round_trip() {
        for b in BellState::ALL {
            assert_eq!(BellState::from_bits(b.bits()), Some(b));
        }
        assert_eq!(BellState::from_bits(4), None);
    }
}
