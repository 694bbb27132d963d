//! Protocols run on the simulator, with every ebit and classical bit charged
//! to a [`ResourceLedger`] and every step logged to a trace.

pub mod audit;
mod collective;
mod distill;
pub mod ledger;
mod teleport;
pub mod trace;

use crate::graphs::{GraphError, Partition};
use crate::quantum::{BranchEnsemble, Povm, QuantumError, UnitaryMatrix};

pub use audit::{audit, AuditReport, Violation};
pub use collective::{
    collective_op_star, collective_op_two_qubit, ps_cp_unitary, ps_unitary, supplementary_information,
    StarRun,
};
pub use distill::{
    grant_communication_pairs, permutation_communicate, permutation_entangle, swap_communicate_demo, swap_entangle_demo,
    CommunicateRun, EntangleRun, SwapEntangleOptions,
};
pub use ledger::{LedgerSummary, ResourceLedger};
pub use teleport::{superdense_send, teleport};
pub use trace::{Event, ProtocolTrace, TraceHeader};

/// Tolerance for entropy comparisons.
pub const ENTROPY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("parties {pair:?} hold {held} ebits, need 1")]
    InsufficientEbits { pair: (usize, usize), held: String },
    #[error("party {party} outside 1..={n}")]
    UnknownParty { party: usize, n: usize },
    #[error("qubit and destination are both at party {0}")]
    SameParty(usize),
    #[error("permutation {0} has a fixed point")]
    NotDerangement(String),
    #[error("{what} needs {expected}, got n = {n}")]
    Parity { what: &'static str, expected: &'static str, n: usize },
    #[error("expected {expected} data qubits, got {got}")]
    DataCount { expected: usize, got: usize },
    #[error("message {0} does not fit in two bits")]
    BadMessage(u32),
    #[error("operation acts on {got} qubits, protocol moves {expected}")]
    OpArity { expected: usize, got: usize },
}

/// The operation a collective protocol performs once all data sits at the hub.
#[derive(Debug, Clone)]
pub enum CollectiveOp {
    Unitary(UnitaryMatrix),
    /// Only outcome statistics are taken; with `recorded` the outcome is
    /// reported back as supplementary information.
    Povm { povm: Povm, recorded: bool },
}

impl CollectiveOp {
    pub fn qubits(&self) -> usize {
        match self {
            CollectiveOp::Unitary(u) => u.qubits(),
            CollectiveOp::Povm { povm, .. } => povm.qubits(),
        }
    }
}

/// An entropy increase that no resource in the trace accounts for.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorViolation {
    pub step: usize,
    pub cut: Vec<usize>,
    pub before: f64,
    pub after: f64,
    pub allowance: f64,
}

/// Tracks the entanglement entropy across every cut of `1..=n` after each
/// trace event. Entropy may rise only by one ebit per realized pair, carried
/// qubit or oracle move crossing the cut.
#[derive(Debug, Clone)]
pub struct EntropyMonitor {
    cuts: Vec<Partition>,
    last: Vec<f64>,
    pub violations: Vec<MonitorViolation>,
    pub steps: usize,
}

impl EntropyMonitor {
    fn new(n: usize, ensemble: &BranchEnsemble) -> Self {
        let cuts: Vec<Partition> = if n >= 2 { Partition::all(n).collect() } else { Vec::new() };
        let last = cuts.iter().map(|c| cut_entropy(ensemble, c)).collect();
        Self {
            cuts,
            last,
            violations: Vec::new(),
            steps: 0,
        }
    }

    fn observe(&mut self, event: &Event, ensemble: &BranchEnsemble) {
        self.steps += 1;
        for (k, cut) in self.cuts.iter().enumerate() {
            let allowance = crossing_count(event, cut) as f64;
            let now = cut_entropy(ensemble, cut);
            if now > self.last[k] + allowance + ENTROPY_TOL {
                self.violations.push(MonitorViolation {
                    step: self.steps,
                    cut: cut.side_a().iter().copied().collect(),
                    before: self.last[k],
                    after: now,
                    allowance,
                });
            }
            self.last[k] = now;
        }
    }
}

fn cut_entropy(ensemble: &BranchEnsemble, cut: &Partition) -> f64 {
    let side: Vec<usize> = cut.side_a().iter().copied().collect();
    // a side without qubits carries no entanglement
    ensemble.entanglement_entropy(&side).unwrap_or(0.0)
}

fn crossing_count(event: &Event, cut: &Partition) -> usize {
    match event {
        Event::EbitRealize { pair } => usize::from(cut.separates(pair[0], pair[1])),
        Event::QubitTransfer { from, to, .. } => usize::from(cut.separates(*from, *to)),
        Event::Oracle { moves, .. } => moves.iter().filter(|m| cut.separates(m[0], m[1])).count(),
        _ => 0,
    }
}

/// Simulation state, ledger and trace of one protocol run over parties `1..=n`.
#[derive(Debug, Clone)]
pub struct Session {
    pub n: usize,
    pub ensemble: BranchEnsemble,
    pub ledger: ResourceLedger,
    pub events: Vec<Event>,
    monitor: Option<EntropyMonitor>,
}

impl Session {
    pub fn new(n: usize) -> Self {
        Self::with_ensemble(n, BranchEnsemble::new())
    }

    pub fn with_ensemble(n: usize, ensemble: BranchEnsemble) -> Self {
        Self {
            n,
            ensemble,
            ledger: ResourceLedger::new(),
            events: Vec::new(),
            monitor: None,
        }
    }

    /// Starts checking entropy against the resources spent, from the current state on.
    pub fn enable_monitor(&mut self) {
        self.monitor = Some(EntropyMonitor::new(self.n, &self.ensemble));
    }

    pub fn monitor(&self) -> Option<&EntropyMonitor> {
        self.monitor.as_ref()
    }

    pub fn record(&mut self, event: Event) {
        if let Some(m) = &mut self.monitor {
            m.observe(&event, &self.ensemble);
        }
        self.events.push(event);
    }

    pub fn check_party(&self, party: usize) -> Result<(), ProtocolError> {
        if party == 0 || party > self.n {
            return Err(ProtocolError::UnknownParty { party, n: self.n });
        }
        Ok(())
    }

    pub fn trace(&self, protocol: &str, seed: u64, hub: Option<usize>) -> ProtocolTrace {
        ProtocolTrace {
            header: TraceHeader {
                protocol: protocol.to_string(),
                n: self.n,
                seed,
                hub,
            },
            events: self.events.clone(),
        }
    }
}
