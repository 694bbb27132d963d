//! Simulation and resource accounting for collective operations on qubits
//! held by spatially separated parties.
//!
//! * [`quantum`]: exact statevector engine with branching measurements.
//! * [`protocols`]: teleportation, dense coding and permutation protocols
//!   charged to a [`protocols::ResourceLedger`].
//! * [`graphs`]: resource entanglement/communication graphs and symmetrisation.
//! * [`bounds`]: closed-form resource bounds and the bound table.

pub mod bounds;
pub mod graphs;
pub mod permutation;
pub mod protocols;
pub mod quantum;
pub mod rational;

pub use permutation::Permutation;
pub use rational::Rational;
