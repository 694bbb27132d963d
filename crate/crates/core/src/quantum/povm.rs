use super::entropy::hermitian_eigenvalues;
use super::matrix::{c, qubit_count, CMatrix, OPERATOR_TOL};
use super::state::{BranchEnsemble, QubitId};
use super::QuantumError;

/// Positive operator-valued measure on `2^k`-dimensional targets.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<CMatrix>,
    qubits: usize,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self, QuantumError> {
        let first = elements.first().ok_or(QuantumError::InvalidPovm("no elements".into()))?;
        let d = first.nrows();
        let qubits = qubit_count(d).ok_or(QuantumError::InvalidPovm(format!("dimension {d}")))?;
        let mut sum = CMatrix::zeros(d, d);
        for (r, e) in elements.iter().enumerate() {
            if e.shape() != (d, d) {
                return Err(QuantumError::InvalidPovm(format!("element {r} has shape {:?}", e.shape())));
            }
            let herm = (e - e.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
            if herm > OPERATOR_TOL {
                return Err(QuantumError::InvalidPovm(format!("element {r} is not Hermitian")));
            }
            let min = hermitian_eigenvalues(e).first().copied().unwrap_or(0.0);
            if min < -OPERATOR_TOL {
                return Err(QuantumError::InvalidPovm(format!(
                    "element {r} has negative eigenvalue {min:e}"
                )));
            }
            sum += e;
        }
        let dev = (sum - CMatrix::identity(d, d))
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        if dev > OPERATOR_TOL {
            return Err(QuantumError::InvalidPovm(format!("elements sum to identity only within {dev:e}")));
        }
        Ok(Self { elements, qubits })
    }

    /// `M` outcomes, each `E_r = I/M`: statistics independent of the input.
    pub fn uniform(outcomes: usize, qubits: usize) -> Result<Self, QuantumError> {
        if outcomes == 0 {
            return Err(QuantumError::InvalidPovm("no elements".into()));
        }
        let d = 1 << qubits;
        let e = CMatrix::identity(d, d) * c(1.0 / outcomes as f64, 0.0);
        Self::new(vec![e; outcomes])
    }

    /// Projectors onto the computational basis.
    pub fn computational(qubits: usize) -> Self {
        let d = 1 << qubits;
        let elements = (0..d)
            .map(|i| {
                let mut e = CMatrix::zeros(d, d);
                e[(i, i)] = c(1.0, 0.0);
                e
            })
            .collect();
        Self { elements, qubits }
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl BranchEnsemble {
    /// Outcome probabilities `p_r = Tr(ρ_targets E_r)`; the ensemble is not changed.
    pub fn measure_povm(&self, povm: &Povm, targets: &[QubitId]) -> Result<Vec<f64>, QuantumError> {
        if targets.len() != povm.qubits() {
            return Err(QuantumError::Arity {
                targets: targets.len(),
                qubits: povm.qubits(),
            });
        }
        let rho = self.reduced_density(targets)?;
        Ok(povm
            .elements()
            .iter()
            .map(|e| (&rho * e).trace().re.max(0.0))
            .collect())
    }
}
