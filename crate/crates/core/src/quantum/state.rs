use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::matrix::{c, hadamard, cnot, CMatrix, UnitaryMatrix, C64};
use super::QuantumError;

/// Default cap on the number of live qubits in an ensemble.
pub const DEFAULT_MAX_QUBITS: usize = 24;
/// Outcomes whose conditional probability falls below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;
const NORM_TOL: f64 = 1e-12;

/// A qubit resident at a party. Labels are unique within an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitId {
    pub party: usize,
    pub label: u32,
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}@{}", self.label, self.party)
    }
}

/// Amplitudes over the ensemble registry. Registry position `k` is bit `k`
/// (least significant first) of the amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub probability: f64,
    pub state: PureState,
    /// Classical outcomes, one per measurement since the last coarse-graining.
    pub record: Vec<u32>,
}

/// Outcome statistics of a measurement. Outcomes are integers whose bits
/// follow the measured target order, first target most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// Index of this outcome in every branch's record.
    pub id: usize,
    pub width: usize,
    pub distribution: BTreeMap<u32, f64>,
}

impl Measurement {
    pub fn probability(&self, outcome: u32) -> f64 {
        self.distribution.get(&outcome).copied().unwrap_or(0.0)
    }

    /// The single outcome, when the distribution is a point mass.
    pub fn certain(&self) -> Option<u32> {
        let mut it = self.distribution.iter().filter(|(_, &p)| p > 1.0 - 1e-9);
        it.next().map(|(&o, _)| o)
    }

    pub fn label(&self, outcome: u32) -> String {
        format!("{:0width$b}", outcome, width = self.width)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.distribution.values().copied().collect()
    }
}

/// A target gate: unitary plus the ordered qubits it acts on.
#[derive(Debug, Clone)]
pub struct Gate {
    targets: Vec<QubitId>,
    unitary: UnitaryMatrix,
}

impl Gate {
    pub fn new(targets: Vec<QubitId>, unitary: UnitaryMatrix) -> Result<Self, QuantumError> {
        if targets.len() != unitary.qubits() {
            return Err(QuantumError::Arity {
                targets: targets.len(),
                qubits: unitary.qubits(),
            });
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(QuantumError::DuplicateTarget(*t));
            }
        }
        Ok(Self { targets, unitary })
    }

    /// Validates `matrix` as a unitary first.
    pub fn from_matrix(targets: Vec<QubitId>, matrix: CMatrix) -> Result<Self, QuantumError> {
        Self::new(targets, UnitaryMatrix::new(matrix)?)
    }

    pub fn targets(&self) -> &[QubitId] {
        &self.targets
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.unitary
    }
}

impl UnitaryMatrix {
    /// Binds the unitary to target qubits.
    pub fn on(&self, targets: &[QubitId]) -> Result<Gate, QuantumError> {
        Gate::new(targets.to_vec(), self.clone())
    }
}

/// Probability-weighted pure states over one shared qubit registry.
#[derive(Debug, Clone)]
pub struct BranchEnsemble {
    registry: Vec<QubitId>,
    branches: Vec<Branch>,
    next_label: u32,
    max_qubits: usize,
}

impl Default for BranchEnsemble {
    fn default() -> Self {
        Self::new()
    }
}

impl BranchEnsemble {
    /// One branch holding the zero-qubit state.
    pub fn new() -> Self {
        Self::with_max_qubits(DEFAULT_MAX_QUBITS)
    }

    pub fn with_max_qubits(max_qubits: usize) -> Self {
        Self {
            registry: Vec::new(),
            branches: vec![Branch {
                probability: 1.0,
                state: PureState {
                    amplitudes: vec![c(1.0, 0.0)],
                },
                record: Vec::new(),
            }],
            next_label: 0,
            max_qubits,
        }
    }

    pub fn registry(&self) -> &[QubitId] {
        &self.registry
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    pub fn qubit_count(&self) -> usize {
        self.registry.len()
    }

    /// Parties currently holding at least one qubit, ascending.
    pub fn parties(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.registry.iter().map(|q| q.party).collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    fn position(&self, q: &QubitId) -> Result<usize, QuantumError> {
        self.registry
            .iter()
            .position(|r| r == q)
            .ok_or(QuantumError::UnknownQubit(*q))
    }

    fn positions(&self, qs: &[QubitId]) -> Result<Vec<usize>, QuantumError> {
        let pos = qs
            .iter()
            .map(|q| self.position(q))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, q) in qs.iter().enumerate() {
            if qs[..i].contains(q) {
                return Err(QuantumError::DuplicateTarget(*q));
            }
        }
        Ok(pos)
    }

    /// Appends `count` qubits at `party` in the basis state `init`
    /// (one `0`/`1` per new qubit, in allocation order).
    pub fn allocate_qubits(
        &mut self,
        party: usize,
        count: usize,
        init: &str,
    ) -> Result<Vec<QubitId>, QuantumError> {
        if count == 0 {
            return Err(QuantumError::EmptyAllocation);
        }
        let bits: Vec<u8> = init.bytes().collect();
        if bits.len() != count || bits.iter().any(|b| *b != b'0' && *b != b'1') {
            return Err(QuantumError::BadBasisString(init.to_string()));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << count];
        let index = bits
            .iter()
            .fold(0usize, |acc, b| (acc << 1) | usize::from(*b == b'1'));
        amps[index] = c(1.0, 0.0);
        self.allocate_with_state(&vec![party; count], amps)
    }

    /// Appends qubits (one per entry of `parties`) in the joint pure state
    /// `amplitudes`, indexed with the first new qubit most significant.
    pub fn allocate_with_state(
        &mut self,
        parties: &[usize],
        amplitudes: Vec<C64>,
    ) -> Result<Vec<QubitId>, QuantumError> {
        let k = parties.len();
        if k == 0 {
            return Err(QuantumError::EmptyAllocation);
        }
        if self.registry.len() + k > self.max_qubits {
            return Err(QuantumError::CapacityExceeded {
                requested: self.registry.len() + k,
                max: self.max_qubits,
            });
        }
        if amplitudes.len() != 1 << k {
            return Err(QuantumError::Dimension {
                rows: amplitudes.len(),
                cols: 1 << k,
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized(norm));
        }
        let old_n = self.registry.len();
        // new qubit j sits at registry position old_n + j; amplitude index bit
        // (k-1-j) of `amplitudes` maps to it
        let mut remap = vec![0usize; 1 << k];
        for (g, slot) in remap.iter_mut().enumerate() {
            let mut idx = 0usize;
            for j in 0..k {
                if (g >> (k - 1 - j)) & 1 == 1 {
                    idx |= 1 << (old_n + j);
                }
            }
            *slot = idx;
        }
        for branch in &mut self.branches {
            let old = &branch.state.amplitudes;
            let mut out = vec![c(0.0, 0.0); old.len() << k];
            for (g, &a) in amplitudes.iter().enumerate() {
                if a == c(0.0, 0.0) {
                    continue;
                }
                for (i, &o) in old.iter().enumerate() {
                    out[remap[g] | i] = o * a;
                }
            }
            branch.state.amplitudes = out;
        }
        let ids: Vec<QubitId> = parties
            .iter()
            .map(|&party| {
                let id = QubitId {
                    party,
                    label: self.next_label,
                };
                self.next_label += 1;
                id
            })
            .collect();
        self.registry.extend_from_slice(&ids);
        Ok(ids)
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), QuantumError> {
        let positions = self.positions(gate.targets())?;
        let plan = GatePlan::new(&positions, gate.unitary().matrix());
        for branch in &mut self.branches {
            plan.apply(&mut branch.state.amplitudes);
        }
        Ok(())
    }

    /// Applies `choose(record[measurement])` to each branch whose choice is `Some`.
    pub fn apply_conditional<F>(&mut self, measurement: usize, choose: F) -> Result<(), QuantumError>
    where
        F: Fn(u32) -> Option<Gate>,
    {
        for idx in 0..self.branches.len() {
            let outcome = *self.branches[idx]
                .record
                .get(measurement)
                .ok_or(QuantumError::UnknownMeasurement(measurement))?;
            if let Some(gate) = choose(outcome) {
                let positions = self.positions(gate.targets())?;
                GatePlan::new(&positions, gate.unitary().matrix())
                    .apply(&mut self.branches[idx].state.amplitudes);
            }
        }
        Ok(())
    }

    /// Computational-basis measurement; every branch splits by outcome.
    pub fn measure_computational(
        &mut self,
        targets: &[QubitId],
        discard: bool,
    ) -> Result<Measurement, QuantumError> {
        let positions = self.positions(targets)?;
        let k = positions.len();
        let id = self.branches.first().map_or(0, |b| b.record.len());
        let outcome_of = |index: usize| -> u32 {
            positions
                .iter()
                .enumerate()
                .fold(0u32, |acc, (j, &p)| acc | ((((index >> p) & 1) as u32) << (k - 1 - j)))
        };
        let mut next = Vec::new();
        let mut distribution = BTreeMap::new();
        for branch in self.branches.drain(..) {
            let mut weights = vec![0.0f64; 1 << k];
            for (i, a) in branch.state.amplitudes.iter().enumerate() {
                weights[outcome_of(i) as usize] += a.norm_sqr();
            }
            for (outcome, &w) in weights.iter().enumerate() {
                if w < PRUNE_THRESHOLD {
                    continue;
                }
                let outcome = outcome as u32;
                let mut amps: Vec<C64> = branch
                    .state
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| if outcome_of(i) == outcome { a } else { c(0.0, 0.0) })
                    .collect();
                if discard {
                    amps = remove_bits(&amps, &positions, |i| outcome_of(i) == outcome);
                }
                let mut state = PureState { amplitudes: amps };
                state.normalize();
                let mut record = branch.record.clone();
                record.push(outcome);
                let p = branch.probability * w;
                *distribution.entry(outcome).or_insert(0.0) += p;
                next.push(Branch {
                    probability: p,
                    state,
                    record,
                });
            }
        }
        let total: f64 = next.iter().map(|b| b.probability).sum();
        for b in &mut next {
            b.probability /= total;
        }
        for p in distribution.values_mut() {
            *p /= total;
        }
        self.branches = next;
        if discard {
            let mut sorted = positions.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            for p in sorted {
                self.registry.remove(p);
            }
        }
        Ok(Measurement {
            id,
            width: k,
            distribution,
        })
    }

    /// Projective measurement in the Bell basis of `(first, second)`.
    ///
    /// Outcome bits follow the label convention Φ+ → 00, Ψ+ → 01, Φ− → 10,
    /// Ψ− → 11. Without `discard` the pair is left in the observed Bell state.
    pub fn bell_measure(
        &mut self,
        first: QubitId,
        second: QubitId,
        discard: bool,
    ) -> Result<Measurement, QuantumError> {
        let pair = [first, second];
        self.apply_gate(&cnot().on(&pair)?)?;
        self.apply_gate(&hadamard().on(&[first])?)?;
        let m = self.measure_computational(&pair, discard)?;
        if !discard {
            self.apply_gate(&hadamard().on(&[first])?)?;
            self.apply_gate(&cnot().on(&pair)?)?;
        }
        Ok(m)
    }

    /// Drops classical records and merges branches that hold the same ray.
    pub fn coarse_grain(&mut self) {
        let mut merged: Vec<Branch> = Vec::new();
        for mut b in self.branches.drain(..) {
            b.record.clear();
            match merged
                .iter_mut()
                .find(|m| m.state.inner(&b.state).norm_sqr() > 1.0 - 1e-12)
            {
                Some(m) => m.probability += b.probability,
                None => merged.push(b),
            }
        }
        self.branches = merged;
    }

    /// Moves the party label of `qubit` to `party` without touching the state.
    pub fn relocate(&mut self, qubit: QubitId, party: usize) -> Result<QubitId, QuantumError> {
        let p = self.position(&qubit)?;
        self.registry[p].party = party;
        Ok(self.registry[p])
    }

    /// Gives `to` the registry position and label of `from`; `from` must no
    /// longer be live. Used to keep a logical qubit's identity across teleportation.
    pub(crate) fn assume_identity(&mut self, to: QubitId, from: QubitId, old_position: usize) -> Result<QubitId, QuantumError> {
        if self.registry.contains(&from) {
            return Err(QuantumError::DuplicateTarget(from));
        }
        let current = self.position(&to)?;
        let target = old_position.min(self.registry.len() - 1);
        self.move_position(current, target);
        let id = QubitId {
            party: to.party,
            label: from.label,
        };
        self.registry[target] = id;
        Ok(id)
    }

    /// Reorders the registry so the qubit at `from` lands at `to`, shifting
    /// the ones in between.
    fn move_position(&mut self, from: usize, to: usize) {
        if from == to {
            return;
        }
        let n = self.registry.len();
        let mut order: Vec<usize> = (0..n).collect();
        let q = order.remove(from);
        order.insert(to, q);
        // order[new_pos] = old_pos
        for branch in &mut self.branches {
            let old = &branch.state.amplitudes;
            let mut out = vec![c(0.0, 0.0); old.len()];
            for (i, &a) in old.iter().enumerate() {
                let mut j = 0usize;
                for (new_pos, &old_pos) in order.iter().enumerate() {
                    j |= ((i >> old_pos) & 1) << new_pos;
                }
                out[j] = a;
            }
            branch.state.amplitudes = out;
        }
        let reg: Vec<QubitId> = order.iter().map(|&o| self.registry[o]).collect();
        self.registry = reg;
    }

    pub(crate) fn registry_position(&self, q: &QubitId) -> Result<usize, QuantumError> {
        self.position(q)
    }

    /// Amplitudes of one branch reindexed so `order[0]` is the most
    /// significant bit. `order` must list every live qubit.
    pub fn amplitudes_in_order(&self, branch: usize, order: &[QubitId]) -> Result<Vec<C64>, QuantumError> {
        if order.len() != self.registry.len() {
            return Err(QuantumError::IncompleteOrder);
        }
        let positions = self.positions(order)?;
        let n = positions.len();
        let b = self
            .branches
            .get(branch)
            .ok_or(QuantumError::UnknownMeasurement(branch))?;
        let mut out = vec![c(0.0, 0.0); b.state.amplitudes.len()];
        for (i, &a) in b.state.amplitudes.iter().enumerate() {
            let mut j = 0usize;
            for (k, &p) in positions.iter().enumerate() {
                j |= ((i >> p) & 1) << (n - 1 - k);
            }
            out[j] = a;
        }
        Ok(out)
    }

    /// `Σ_b p_b |⟨target|ψ_b⟩|²` with `target` indexed in `order`.
    pub fn fidelity_with(&self, target: &[C64], order: &[QubitId]) -> Result<f64, QuantumError> {
        let mut f = 0.0;
        for (i, b) in self.branches.iter().enumerate() {
            let amps = self.amplitudes_in_order(i, order)?;
            if amps.len() != target.len() {
                return Err(QuantumError::Dimension {
                    rows: target.len(),
                    cols: amps.len(),
                });
            }
            let overlap: C64 = target.iter().zip(&amps).map(|(t, a)| t.conj() * a).sum();
            f += b.probability * overlap.norm_sqr();
        }
        Ok(f)
    }

    /// `Σ_b p_b Tr_complement |ψ_b⟩⟨ψ_b|`, indexed with `subset[0]` most significant.
    pub fn reduced_density(&self, subset: &[QubitId]) -> Result<CMatrix, QuantumError> {
        if subset.is_empty() {
            return Err(QuantumError::EmptySubset);
        }
        let positions = self.positions(subset)?;
        let d = 1usize << positions.len();
        let mut rho = CMatrix::zeros(d, d);
        for b in &self.branches {
            let m = self.split_matrix(&b.state, &positions);
            rho += (&m * m.adjoint()) * c(b.probability, 0.0);
        }
        Ok(rho)
    }

    /// Reshapes a state into (subset index) × (complement index).
    fn split_matrix(&self, state: &PureState, positions: &[usize]) -> CMatrix {
        let k = positions.len();
        let n = self.registry.len();
        let complement: Vec<usize> = (0..n).filter(|p| !positions.contains(p)).collect();
        let mut m = CMatrix::zeros(1 << k, 1 << complement.len());
        for (i, &a) in state.amplitudes.iter().enumerate() {
            let mut row = 0usize;
            for (j, &p) in positions.iter().enumerate() {
                row |= ((i >> p) & 1) << (k - 1 - j);
            }
            let mut col = 0usize;
            for (j, &p) in complement.iter().enumerate() {
                col |= ((i >> p) & 1) << j;
            }
            m[(row, col)] = a;
        }
        m
    }

    /// Probability-weighted subsystem entropy (base 2) between the qubits
    /// held by `parties` and all other qubits.
    pub fn entanglement_entropy(&self, parties: &[usize]) -> Result<f64, QuantumError> {
        if parties.is_empty() {
            return Err(QuantumError::ImproperPartition);
        }
        let inside: Vec<usize> = (0..self.registry.len())
            .filter(|&p| parties.contains(&self.registry[p].party))
            .collect();
        if self.registry.iter().all(|q| parties.contains(&q.party)) {
            return Err(QuantumError::ImproperPartition);
        }
        Ok(self.entropy_of_positions(&inside))
    }

    /// Like [`Self::entanglement_entropy`], for an explicit qubit subset.
    pub fn subsystem_entropy(&self, qubits: &[QubitId]) -> Result<f64, QuantumError> {
        let positions = self.positions(qubits)?;
        Ok(self.entropy_of_positions(&positions))
    }

    fn entropy_of_positions(&self, positions: &[usize]) -> f64 {
        if positions.is_empty() || positions.len() == self.registry.len() {
            return 0.0;
        }
        self.branches
            .iter()
            .map(|b| {
                let m = self.split_matrix(&b.state, positions);
                let schmidt: Vec<f64> = m
                    .singular_values()
                    .iter()
                    .map(|s| s * s)
                    .collect();
                b.probability * super::entropy::shannon_unchecked(&schmidt)
            })
            .sum()
    }

    /// Checks norms and the probability sum.
    pub fn check_invariants(&self) -> Result<(), QuantumError> {
        let total = self.total_probability();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::NotNormalized(total));
        }
        for b in &self.branches {
            let n = b.state.norm_sqr();
            if (n - 1.0).abs() > NORM_TOL {
                return Err(QuantumError::NotNormalized(n));
            }
            if b.state.amplitudes.len() != 1 << self.registry.len() {
                return Err(QuantumError::IncompleteOrder);
            }
        }
        Ok(())
    }
}

/// Removes the bits at `positions` from every kept index.
fn remove_bits(amps: &[C64], positions: &[usize], keep: impl Fn(usize) -> bool) -> Vec<C64> {
    let n_total = amps.len().trailing_zeros() as usize;
    let kept: Vec<usize> = (0..n_total).filter(|p| !positions.contains(p)).collect();
    let mut out = vec![c(0.0, 0.0); 1 << kept.len()];
    for (i, &a) in amps.iter().enumerate() {
        if !keep(i) {
            continue;
        }
        let mut j = 0usize;
        for (new_pos, &old_pos) in kept.iter().enumerate() {
            j |= ((i >> old_pos) & 1) << new_pos;
        }
        out[j] = a;
    }
    out
}

/// Precomputed index offsets for embedding a k-qubit matrix.
struct GatePlan<'a> {
    matrix: &'a CMatrix,
    offsets: Vec<usize>,
    mask: usize,
}

impl<'a> GatePlan<'a> {
    fn new(positions: &[usize], matrix: &'a CMatrix) -> Self {
        let k = positions.len();
        let offsets = (0..1usize << k)
            .map(|g| {
                positions
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (j, &p)| acc | (((g >> (k - 1 - j)) & 1) << p))
            })
            .collect();
        let mask = positions.iter().fold(0usize, |acc, &p| acc | (1 << p));
        Self {
            matrix,
            offsets,
            mask,
        }
    }

    fn apply(&self, amps: &mut [C64]) {
        let dim = self.offsets.len();
        let mut buf = DVector::<C64>::zeros(dim);
        for base in 0..amps.len() {
            if base & self.mask != 0 {
                continue;
            }
            for (g, &o) in self.offsets.iter().enumerate() {
                buf[g] = amps[base | o];
            }
            let out = self.matrix * &buf;
            for (g, &o) in self.offsets.iter().enumerate() {
                amps[base | o] = out[g];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::{pauli_x, swap_unitary};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn bell_pair(e: &mut BranchEnsemble, a: usize, b: usize) -> (QubitId, QubitId) {
        let q = e.allocate_qubits(a, 1, "0").unwrap()[0];
        let r = e.allocate_qubits(b, 1, "0").unwrap()[0];
        e.apply_gate(&hadamard().on(&[q]).unwrap()).unwrap();
        e.apply_gate(&cnot().on(&[q, r]).unwrap()).unwrap();
        (q, r)
    }

    #[test]
    fn allocate_into_empty() {
        let mut e = BranchEnsemble::new();
        e.allocate_qubits(1, 1, "0").unwrap();
        assert_eq!(e.branches().len(), 1);
        assert_eq!(e.branches()[0].state.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn allocate_checks() {
        let mut e = BranchEnsemble::with_max_qubits(2);
        assert!(matches!(e.allocate_qubits(1, 0, ""), Err(QuantumError::EmptyAllocation)));
        assert!(e.allocate_qubits(1, 2, "0").is_err());
        assert!(e.allocate_qubits(1, 1, "2").is_err());
        e.allocate_qubits(1, 2, "01").unwrap();
        assert!(matches!(
            e.allocate_qubits(1, 1, "0"),
            Err(QuantumError::CapacityExceeded { requested: 3, max: 2 })
        ));
    }

    #[test]
    fn bell_construction() {
        let mut e = BranchEnsemble::new();
        let (q, r) = bell_pair(&mut e, 1, 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = e.amplitudes_in_order(0, &[q, r]).unwrap();
        assert!(close(amps[0].re, h) && close(amps[3].re, h));
        assert!(close(amps[1].norm(), 0.0) && close(amps[2].norm(), 0.0));
    }

    #[test]
    fn allocate_into_two_branch_ensemble() {
        let mut e = BranchEnsemble::new();
        let (q, _) = bell_pair(&mut e, 1, 2);
        e.measure_computational(&[q], false).unwrap();
        assert_eq!(e.branches().len(), 2);
        e.allocate_qubits(3, 1, "1").unwrap();
        assert_eq!(e.branches().len(), 2);
        for b in e.branches() {
            assert!(close(b.probability, 0.5));
            assert_eq!(b.state.amplitudes().len(), 8);
        }
        e.check_invariants().unwrap();
    }

    #[test]
    fn swap_basis_state() {
        let mut e = BranchEnsemble::new();
        let qs = e.allocate_qubits(1, 2, "01").unwrap();
        e.apply_gate(&swap_unitary().on(&qs).unwrap()).unwrap();
        let amps = e.amplitudes_in_order(0, &qs).unwrap();
        assert!(close(amps[0b10].re, 1.0));
    }

    #[test]
    fn identity_gate_is_noop() {
        let mut e = BranchEnsemble::new();
        let (q, r) = bell_pair(&mut e, 1, 2);
        let before = e.amplitudes_in_order(0, &[q, r]).unwrap();
        e.apply_gate(&UnitaryMatrix::identity(2).on(&[q, r]).unwrap()).unwrap();
        assert_eq!(before, e.amplitudes_in_order(0, &[q, r]).unwrap());
    }

    #[test]
    fn x_turns_phi_plus_into_psi_plus() {
        let mut e = BranchEnsemble::new();
        let (q, r) = bell_pair(&mut e, 1, 2);
        e.apply_gate(&pauli_x().on(&[r]).unwrap()).unwrap();
        let amps = e.amplitudes_in_order(0, &[q, r]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(amps[0b01].re, h) && close(amps[0b10].re, h));
    }

    #[test]
    fn unknown_target_rejected() {
        let mut e = BranchEnsemble::new();
        let q = e.allocate_qubits(1, 1, "0").unwrap()[0];
        let ghost = QubitId { party: 1, label: 99 };
        assert!(matches!(
            e.apply_gate(&pauli_x().on(&[ghost]).unwrap()),
            Err(QuantumError::UnknownQubit(_))
        ));
        assert!(Gate::new(vec![q, q], swap_unitary()).is_err());
    }

    #[test]
    fn measurement_statistics() {
        let mut e = BranchEnsemble::new();
        let (q, r) = bell_pair(&mut e, 1, 2);
        let mut one = e.clone();
        let m = one.measure_computational(&[q], false).unwrap();
        assert!(close(m.probability(0), 0.5) && close(m.probability(1), 0.5));

        let m = e.measure_computational(&[q, r], false).unwrap();
        assert_eq!(m.distribution.len(), 2);
        assert!(close(m.probability(0b00), 0.5) && close(m.probability(0b11), 0.5));

        let mut z = BranchEnsemble::new();
        let q = z.allocate_qubits(1, 1, "0").unwrap()[0];
        let m = z.measure_computational(&[q], true).unwrap();
        assert_eq!(m.certain(), Some(0));
        assert_eq!(z.branches().len(), 1);
        assert_eq!(z.qubit_count(), 0);
    }

    #[test]
    fn discard_keeps_partner_state() {
        let mut e = BranchEnsemble::new();
        let (q, r) = bell_pair(&mut e, 1, 2);
        e.measure_computational(&[q], true).unwrap();
        assert_eq!(e.registry(), &[r]);
        for b in e.branches() {
            let outcome = b.record[0] as usize;
            assert!(close(b.state.amplitudes()[outcome].norm(), 1.0));
        }
    }

    #[test]
    fn reduced_density_cases() {
        let mut e = BranchEnsemble::new();
        let (q, r) = bell_pair(&mut e, 1, 2);
        let rho = e.reduced_density(&[q]).unwrap();
        assert!(close(rho[(0, 0)].re, 0.5) && close(rho[(1, 1)].re, 0.5));
        assert!(close(rho[(0, 1)].norm(), 0.0));
        let full = e.reduced_density(&[q, r]).unwrap();
        assert!(close(full[(0, 0)].re, 0.5) && close(full[(0, 3)].re, 0.5));
        assert!(close(full.trace().re, 1.0));

        let mut p = BranchEnsemble::new();
        let q = p.allocate_qubits(1, 1, "0").unwrap()[0];
        let s = p.allocate_qubits(2, 1, "0").unwrap()[0];
        p.apply_gate(&hadamard().on(&[s]).unwrap()).unwrap();
        let rho = p.reduced_density(&[q]).unwrap();
        assert!(close(rho[(0, 0)].re, 1.0) && close(rho[(1, 1)].re, 0.0));
        assert!(p.reduced_density(&[]).is_err());
    }

    #[test]
    fn entropy_cases() {
        let mut e = BranchEnsemble::new();
        bell_pair(&mut e, 1, 2);
        assert!((e.entanglement_entropy(&[1]).unwrap() - 1.0).abs() < 1e-9);
        assert!(matches!(e.entanglement_entropy(&[]), Err(QuantumError::ImproperPartition)));
        assert!(matches!(e.entanglement_entropy(&[1, 2]), Err(QuantumError::ImproperPartition)));

        let mut p = BranchEnsemble::new();
        p.allocate_qubits(1, 1, "0").unwrap();
        p.allocate_qubits(2, 1, "1").unwrap();
        assert!(p.entanglement_entropy(&[1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_measure_of_phi_plus() {
        let mut e = BranchEnsemble::new();
        let (q, r) = bell_pair(&mut e, 1, 1);
        let m = e.bell_measure(q, r, false).unwrap();
        assert_eq!(m.certain(), Some(0b00));
        // left in Φ+
        let amps = e.amplitudes_in_order(0, &[q, r]).unwrap();
        assert!(close(amps[0].norm_sqr(), 0.5) && close(amps[3].norm_sqr(), 0.5));
    }

    #[test]
    fn coarse_grain_merges_identical_rays() {
        let mut e = BranchEnsemble::new();
        let (q, r) = bell_pair(&mut e, 1, 2);
        e.measure_computational(&[q], true).unwrap();
        // flip r back to |0⟩ where it reads 1
        e.apply_conditional(0, |o| (o == 1).then(|| pauli_x().on(&[r]).unwrap()))
            .unwrap();
        e.coarse_grain();
        assert_eq!(e.branches().len(), 1);
        assert!(close(e.branches()[0].probability, 1.0));
    }

    #[test]
    fn relocate_and_identity() {
        let mut e = BranchEnsemble::new();
        let qs = e.allocate_qubits(1, 3, "100").unwrap();
        let moved = e.relocate(qs[1], 4).unwrap();
        assert_eq!(moved.party, 4);
        assert_eq!(e.parties(), vec![1, 4]);
        // move last qubit's content to position 0 via assume_identity after dropping q0
        e.measure_computational(&[qs[0]], true).unwrap();
        let id = e.assume_identity(qs[2], qs[0], 0).unwrap();
        assert_eq!(id.label, qs[0].label);
        assert_eq!(e.registry()[0], id);
    }
}
