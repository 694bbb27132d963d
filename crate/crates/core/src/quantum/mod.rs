//! Exact pure-state simulation with a dynamic qubit registry.
//!
//! Measurements branch the [`BranchEnsemble`] instead of sampling, so every
//! statistic is an exact distribution.

pub mod bell;
pub mod entropy;
pub mod matrix;
pub mod povm;
pub mod state;

pub use bell::{encoding_operator, BellState};
pub use entropy::{shannon_entropy, von_neumann_entropy};
pub use matrix::{
    cnot, hadamard, kron, local_dressing, local_equivalence_conjugate, pauli_x, pauli_y, pauli_z,
    permutation_unitary, random_state, random_unitary, swap_unitary, CMatrix, UnitaryMatrix, C64,
};
pub use povm::Povm;
pub use state::{Branch, BranchEnsemble, Gate, Measurement, PureState, QubitId, DEFAULT_MAX_QUBITS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantumError {
    #[error("matrix must be square with power-of-two dimension, got {rows}x{cols}")]
    Dimension { rows: usize, cols: usize },
    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("gate on {targets} targets given a {qubits}-qubit matrix")]
    Arity { targets: usize, qubits: usize },
    #[error("expected {expected} single-qubit locals, got {pre} before and {post} after")]
    LocalCount { expected: usize, pre: usize, post: usize },
    #[error("qubit {0} is not in the registry")]
    UnknownQubit(QubitId),
    #[error("qubit {0} listed twice")]
    DuplicateTarget(QubitId),
    #[error("no measurement record at index {0}")]
    UnknownMeasurement(usize),
    #[error("registry capacity exceeded: {requested} qubits requested, cap is {max}")]
    CapacityExceeded { requested: usize, max: usize },
    #[error("allocation of zero qubits")]
    EmptyAllocation,
    #[error("invalid basis string {0:?}")]
    BadBasisString(String),
    #[error("state is not normalised (squared norm {0})")]
    NotNormalized(f64),
    #[error("qubit order must list every live qubit exactly once")]
    IncompleteOrder,
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("partition must be a proper nonempty subset of the parties")]
    ImproperPartition,
    #[error("invalid probability distribution")]
    InvalidDistribution,
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
}
