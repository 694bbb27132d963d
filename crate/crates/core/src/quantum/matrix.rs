//! Dense complex matrices, unitaries and the standard gate set.
//!
//! Matrices act on kets written in target order: the first target qubit is
//! the most significant bit of the matrix index, so `cnot()` acting on
//! `[control, target]` has the familiar textbook layout.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::QuantumError;
use crate::permutation::Permutation;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance for unitarity and POVM completeness checks.
pub const OPERATOR_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Number of qubits `k` with `dim == 2^k`, if any.
pub(crate) fn qubit_count(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn max_abs_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// A validated unitary matrix of dimension `2^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: CMatrix,
    qubits: usize,
}

impl UnitaryMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self, QuantumError> {
        let (rows, cols) = matrix.shape();
        let qubits = match qubit_count(rows) {
            Some(k) if rows == cols => k,
            _ => return Err(QuantumError::Dimension { rows, cols }),
        };
        let product = matrix.adjoint() * &matrix;
        let deviation = max_abs_deviation(&product, &CMatrix::identity(rows, rows));
        if deviation > OPERATOR_TOL {
            return Err(QuantumError::NotUnitary { deviation });
        }
        Ok(Self { matrix, qubits })
    }

    fn trusted(matrix: CMatrix) -> Self {
        let qubits = qubit_count(matrix.nrows()).expect("power-of-two dimension");
        Self { matrix, qubits }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self::trusted(self.matrix.adjoint())
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &UnitaryMatrix) -> Result<Self, QuantumError> {
        if self.dim() != first.dim() {
            return Err(QuantumError::Dimension {
                rows: self.dim(),
                cols: first.dim(),
            });
        }
        Ok(Self::trusted(&self.matrix * &first.matrix))
    }

    pub fn tensor(&self, other: &UnitaryMatrix) -> Self {
        Self::trusted(kron(&self.matrix, &other.matrix))
    }

    /// Tensor product of the factors, first factor most significant.
    pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a UnitaryMatrix>) -> Self {
        factors
            .into_iter()
            .fold(Self::identity(0), |acc, f| acc.tensor(f))
    }

    /// `|⟨self, other⟩|/dim`; equals 1 iff the two agree up to a global phase.
    pub fn phase_insensitive_overlap(&self, other: &UnitaryMatrix) -> f64 {
        let tr = (self.matrix.adjoint() * &other.matrix).trace();
        tr.norm() / self.dim() as f64
    }

    /// Largest entrywise deviation after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &UnitaryMatrix) -> f64 {
        let tr = (self.matrix.adjoint() * &other.matrix).trace();
        let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { c(1.0, 0.0) };
        let aligned = &self.matrix * phase;
        max_abs_deviation(&aligned, &other.matrix)
    }

    pub fn identity(qubits: usize) -> Self {
        let d = 1 << qubits;
        Self::trusted(CMatrix::identity(d, d))
    }
}

fn from_rows(rows: &[&[C64]]) -> UnitaryMatrix {
    let n = rows.len();
    UnitaryMatrix::trusted(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn pauli_x() -> UnitaryMatrix {
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    from_rows(&[&[o, l], &[l, o]])
}

pub fn pauli_y() -> UnitaryMatrix {
    let (o, i) = (c(0.0, 0.0), c(0.0, 1.0));
    from_rows(&[&[o, -i], &[i, o]])
}

pub fn pauli_z() -> UnitaryMatrix {
    let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
    from_rows(&[&[l, o], &[o, -l]])
}

pub fn hadamard() -> UnitaryMatrix {
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    from_rows(&[&[h, h], &[h, -h]])
}

/// Controlled-NOT on `[control, target]`.
pub fn cnot() -> UnitaryMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (from, to) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(to, from)] = c(1.0, 0.0);
    }
    UnitaryMatrix::trusted(m)
}

/// Exchanges the states of its two targets.
pub fn swap_unitary() -> UnitaryMatrix {
    permutation_unitary(&Permutation::cycle(2))
}

/// Moves the state of qubit `i` to qubit `P(i)` on every product input.
pub fn permutation_unitary(p: &Permutation) -> UnitaryMatrix {
    let n = p.len();
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for input in 0..dim {
        let mut output = 0usize;
        for i in 1..=n {
            let bit = (input >> (n - i)) & 1;
            output |= bit << (n - p.apply(i));
        }
        m[(output, input)] = c(1.0, 0.0);
    }
    UnitaryMatrix::trusted(m)
}

/// Strips local dressings from `t = (⊗ post_i) · U · (⊗ pre_j)` and returns
/// `(⊗ post_i†) · t · (⊗ pre_j†)`.
pub fn local_equivalence_conjugate(
    t: &UnitaryMatrix,
    pre: &[UnitaryMatrix],
    post: &[UnitaryMatrix],
) -> Result<UnitaryMatrix, QuantumError> {
    let n = t.qubits();
    for local in pre.iter().chain(post) {
        if local.qubits() != 1 {
            return Err(QuantumError::Dimension {
                rows: local.dim(),
                cols: 2,
            });
        }
    }
    if pre.len() != n || post.len() != n {
        return Err(QuantumError::LocalCount {
            expected: n,
            pre: pre.len(),
            post: post.len(),
        });
    }
    let pre_dag = UnitaryMatrix::tensor_all(pre.iter().map(UnitaryMatrix::adjoint).collect::<Vec<_>>().iter());
    let post_dag = UnitaryMatrix::tensor_all(post.iter().map(UnitaryMatrix::adjoint).collect::<Vec<_>>().iter());
    post_dag.after(t)?.after(&pre_dag)
}

/// Dresses `u` with local unitaries: `(⊗ post_i) · u · (⊗ pre_j)`.
pub fn local_dressing(
    u: &UnitaryMatrix,
    pre: &[UnitaryMatrix],
    post: &[UnitaryMatrix],
) -> Result<UnitaryMatrix, QuantumError> {
    let pre = UnitaryMatrix::tensor_all(pre);
    let post = UnitaryMatrix::tensor_all(post);
    post.after(u)?.after(&pre)
}

/// Haar-distributed unitary on `qubits` qubits (QR of a complex Ginibre matrix).
pub fn random_unitary<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> UnitaryMatrix {
    let d = 1usize << qubits;
    let g = CMatrix::from_fn(d, d, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution is Haar
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let rii = r[(i, i)];
            if rii.norm() > 0.0 {
                rii / rii.norm()
            } else {
                c(1.0, 0.0)
            }
        } else {
            c(0.0, 0.0)
        }
    });
    UnitaryMatrix::trusted(q * phases)
}

/// Normalised random pure state on `qubits` qubits.
pub fn random_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Vec<C64> {
    let d = 1usize << qubits;
    let mut v: Vec<C64> = (0..d)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    v
}
