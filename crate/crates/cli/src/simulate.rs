use std::fmt;

use clap::ValueEnum;
use ebitnet::bounds::{distillation_caps, teleport_resources};
use ebitnet::graphs::{star_graphs, EntanglementGraph, ResourceGraphs};
use ebitnet::protocols::{
    audit, collective_op_star, collective_op_two_qubit, grant_communication_pairs, permutation_communicate,
    permutation_entangle, ps_cp_unitary, ps_unitary, swap_communicate_demo, swap_entangle_demo, teleport,
    CollectiveOp, ProtocolTrace, Session, SwapEntangleOptions, ENTROPY_TOL,
};
use ebitnet::quantum::{random_state, random_unitary, BranchEnsemble, UnitaryMatrix, C64};
use ebitnet::rational::{self, int, Rational};
use ebitnet::Permutation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

/// Largest party count accepted by the multi-party protocols.
pub const MAX_PARTIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Teleport,
    TwoQubitOp,
    StarOp,
    SwapComm,
    SwapEntangle,
    PermEntangle,
    PermComm,
    Ps,
    PsCp,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Teleport => "teleport",
            Protocol::TwoQubitOp => "two-qubit-op",
            Protocol::StarOp => "star-op",
            Protocol::SwapComm => "swap-comm",
            Protocol::SwapEntangle => "swap-entangle",
            Protocol::PermEntangle => "perm-entangle",
            Protocol::PermComm => "perm-comm",
            Protocol::Ps => "ps",
            Protocol::PsCp => "ps-cp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::value_variants().iter().copied().find(|p| p.name() == name)
    }

    fn uses_hub(self) -> bool {
        matches!(self, Protocol::StarOp | Protocol::Ps | Protocol::PsCp)
    }

    fn default_n(self) -> usize {
        match self {
            Protocol::StarOp | Protocol::PermEntangle | Protocol::PermComm | Protocol::PsCp => 3,
            Protocol::Ps => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub protocol: Protocol,
    pub n: Option<usize>,
    pub seed: u64,
    pub hub: Option<usize>,
    pub max_qubits: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

pub struct Simulation {
    pub protocol: Protocol,
    pub seed: u64,
    pub hub: Option<usize>,
    pub session: Session,
    /// Ebits held before the run started.
    pub initial: EntanglementGraph,
    pub checks: Vec<Check>,
}

impl Simulation {
    pub fn n(&self) -> usize {
        self.session.n
    }

    pub fn trace(&self) -> ProtocolTrace {
        self.session.trace(self.protocol.name(), self.seed, self.hub)
    }

    /// The held ebits at the start and the bits actually sent.
    pub fn graphs(&self) -> ResourceGraphs {
        let (_, c) = self.session.ledger.usage_graphs(self.n()).expect("ledger parties are in range");
        ResourceGraphs::new(self.initial.clone(), c).expect("same party count")
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn failure(e: impl fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn resolve_n(cfg: &SimConfig) -> Result<usize, CliError> {
    let p = cfg.protocol;
    let n = cfg.n.unwrap_or(p.default_n());
    match p {
        Protocol::Teleport | Protocol::TwoQubitOp | Protocol::SwapComm | Protocol::SwapEntangle if n != 2 => {
            Err(usage(format!("{p} runs between exactly 2 parties, got --n {n}")))
        }
        Protocol::StarOp | Protocol::PermEntangle | Protocol::PermComm if !(2..=MAX_PARTIES).contains(&n) => {
            Err(usage(format!("{p} needs 2 <= n <= {MAX_PARTIES}, got {n}")))
        }
        Protocol::Ps if n % 2 != 0 || !(2..=MAX_PARTIES).contains(&n) => {
            Err(usage(format!("ps needs an even n in 2..={MAX_PARTIES}, got {n}")))
        }
        Protocol::PsCp if n % 2 != 1 || !(3..=MAX_PARTIES).contains(&n) => {
            Err(usage(format!("ps-cp needs an odd n in 3..={MAX_PARTIES}, got {n}")))
        }
        _ => Ok(n),
    }
}

fn resolve_hub(cfg: &SimConfig, n: usize) -> Result<Option<usize>, CliError> {
    if !cfg.protocol.uses_hub() {
        return match cfg.hub {
            Some(_) => Err(usage(format!("{} takes no --hub", cfg.protocol))),
            None => Ok(None),
        };
    }
    let hub = cfg.hub.unwrap_or(1);
    if hub == 0 || hub > n {
        return Err(usage(format!("--hub must lie in 1..={n}, got {hub}")));
    }
    Ok(Some(hub))
}

/// `u |psi>` with the first qubit as the most significant.
fn apply(u: &UnitaryMatrix, psi: &[C64]) -> Vec<C64> {
    let m = u.matrix();
    (0..psi.len())
        .map(|i| psi.iter().enumerate().map(|(j, a)| m[(i, j)] * a).sum())
        .collect()
}

fn fidelity_check(name: &str, f: f64, tol: f64) -> Check {
    Check::new(name, f >= 1.0 - tol, format!("fidelity {f:.12}"))
}

fn count_check(name: &str, got: &Rational, want: &Rational) -> Check {
    Check::new(
        name,
        got == want,
        format!("{} (expected {})", rational::format(got), rational::format(want)),
    )
}

fn entropy_check(name: &str, got: f64, want: f64) -> Check {
    Check::new(name, (got - want).abs() <= ENTROPY_TOL, format!("{got:.12} (expected {want})"))
}

/// Runs one protocol with all randomness drawn from `seed`. Invalid
/// arguments are usage errors; failed postconditions are recorded as checks.
pub fn simulate(cfg: &SimConfig) -> Result<Simulation, CliError> {
    let n = resolve_n(cfg)?;
    let hub = resolve_hub(cfg, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = Session::with_ensemble(n, BranchEnsemble::with_max_qubits(cfg.max_qubits));
    let mut checks = Vec::new();
    let initial;

    match cfg.protocol {
        Protocol::Teleport => {
            let psi = random_state(1, &mut rng);
            let q = s.ensemble.allocate_with_state(&[1], psi.clone()).map_err(failure)?[0];
            s.ledger.grant(1, 2, 1);
            initial = s.ledger.held_graph(n).map_err(failure)?;
            s.enable_monitor();
            let moved = teleport(&mut s, q, 2).map_err(failure)?;
            let f = s.ensemble.fidelity_with(&psi, &[moved]).map_err(failure)?;
            checks.push(fidelity_check("state arrives intact", f, 1e-10));
            checks.push(count_check("ebits consumed", &s.ledger.total_consumed(), &int(1)));
            checks.push(count_check("bits sent 1 -> 2", &s.ledger.sent(1, 2), &int(2)));
        }
        Protocol::TwoQubitOp => {
            let psi = random_state(2, &mut rng);
            let u = random_unitary(2, &mut rng);
            let ids = s.ensemble.allocate_with_state(&[1, 2], psi.clone()).map_err(failure)?;
            s.ledger.grant(1, 2, 2);
            initial = s.ledger.held_graph(n).map_err(failure)?;
            s.enable_monitor();
            let run = collective_op_two_qubit(&mut s, [ids[0], ids[1]], &CollectiveOp::Unitary(u.clone()))
                .map_err(failure)?;
            let f = s.ensemble.fidelity_with(&apply(&u, &psi), &run.data).map_err(failure)?;
            checks.push(fidelity_check("output equals direct application", f, 1e-9));
            checks.push(count_check("ebits consumed", &s.ledger.total_consumed(), &int(2)));
            checks.push(count_check("bits sent 1 -> 2", &s.ledger.sent(1, 2), &int(2)));
            checks.push(count_check("bits sent 2 -> 1", &s.ledger.sent(2, 1), &int(2)));
        }
        Protocol::StarOp | Protocol::Ps | Protocol::PsCp => {
            let hub = hub.expect("hub protocols resolve a hub");
            let psi = random_state(n, &mut rng);
            let u = match cfg.protocol {
                Protocol::StarOp => random_unitary(n, &mut rng),
                Protocol::Ps => ps_unitary(n).map_err(|e| usage(e.to_string()))?,
                _ => ps_cp_unitary(n).map_err(|e| usage(e.to_string()))?,
            };
            let parties: Vec<usize> = (1..=n).collect();
            let ids = s.ensemble.allocate_with_state(&parties, psi.clone()).map_err(failure)?;
            for p in (1..=n).filter(|&p| p != hub) {
                s.ledger.grant(p, hub, 2);
            }
            initial = s.ledger.held_graph(n).map_err(failure)?;
            s.enable_monitor();
            let run = collective_op_star(&mut s, &ids, &CollectiveOp::Unitary(u.clone()), hub).map_err(failure)?;
            let f = s.ensemble.fidelity_with(&apply(&u, &psi), &run.data).map_err(failure)?;
            checks.push(fidelity_check("output equals direct application", f, 1e-9));
            let (want_e, want_c) = star_graphs(n, hub).map_err(failure)?;
            let (got_e, got_c) = s.ledger.usage_graphs(n).map_err(failure)?;
            checks.push(Check::new(
                "ledger matches the star graphs",
                got_e == want_e && got_c == want_c,
                format!("hub {hub}"),
            ));
            let want = teleport_resources(n).map_err(failure)?;
            checks.push(count_check("ebits consumed", &s.ledger.total_consumed(), &want.ebits));
            checks.push(count_check("bits sent", &s.ledger.total_sent(), &want.bits));
        }
        Protocol::SwapComm => {
            let (m1, m2) = (rng.random_range(0..4u32), rng.random_range(0..4u32));
            s.ledger.grant(1, 2, 2);
            initial = s.ledger.held_graph(n).map_err(failure)?;
            s.enable_monitor();
            let (read_2, read_1) = swap_communicate_demo(&mut s, m1, m2).map_err(failure)?;
            checks.push(Check::new(
                "messages decoded",
                (read_2, read_1) == (m1, m2),
                format!("sent {m1:02b}/{m2:02b}, read {read_2:02b}/{read_1:02b}"),
            ));
            let mut correct = 0;
            for a in 0..4 {
                for b in 0..4 {
                    let mut t = Session::new(2);
                    t.ledger.grant(1, 2, 2);
                    if swap_communicate_demo(&mut t, a, b).ok() == Some((a, b)) {
                        correct += 1;
                    }
                }
            }
            checks.push(Check::new("all message pairs decode", correct == 16, format!("{correct}/16")));
            checks.push(count_check("ebits consumed", &s.ledger.total_consumed(), &int(2)));
            checks.push(count_check("bits sent", &s.ledger.total_sent(), &int(0)));
        }
        Protocol::SwapEntangle => {
            initial = EntanglementGraph::zero(n);
            s.enable_monitor();
            let entropy = swap_entangle_demo(&mut s, SwapEntangleOptions::default()).map_err(failure)?;
            checks.push(entropy_check("entropy across the cut", entropy, 2.0));
            checks.push(count_check("ebits created", &s.ledger.total_created(), &int(2)));
        }
        Protocol::PermEntangle => {
            initial = EntanglementGraph::zero(n);
            s.enable_monitor();
            let run = permutation_entangle(&mut s, &Permutation::cycle(n)).map_err(failure)?;
            let caps = distillation_caps(n).map_err(failure)?;
            checks.push(count_check("ebits created", &run.created, &caps.ebits));
            let worst = run.pair_entropy.iter().map(|e| (e - 1.0).abs()).fold(0.0, f64::max);
            checks.push(Check::new(
                "every pair holds one ebit",
                worst <= ENTROPY_TOL,
                format!("max deviation {worst:.3e}"),
            ));
            let mixed = run.joint_entropy.iter().copied().fold(0.0, f64::max);
            checks.push(Check::new("pairs are pure", mixed <= ENTROPY_TOL, format!("max joint entropy {mixed:.3e}")));
        }
        Protocol::PermComm => {
            let p = Permutation::cycle(n);
            let msgs: Vec<u32> = (0..n).map(|_| rng.random_range(0..4u32)).collect();
            grant_communication_pairs(&mut s.ledger, &p);
            initial = s.ledger.held_graph(n).map_err(failure)?;
            s.enable_monitor();
            let run = permutation_communicate(&mut s, &p, &msgs).map_err(failure)?;
            checks.push(Check::new(
                "bits decoded",
                run.correct_bits == 2 * n,
                format!("{}/{}", run.correct_bits, 2 * n),
            ));
            checks.push(count_check("bits sent", &s.ledger.total_sent(), &int(0)));
        }
    }

    let mut sim = Simulation {
        protocol: cfg.protocol,
        seed: cfg.seed,
        hub,
        session: s,
        initial,
        checks,
    };
    let monitor = sim.session.monitor().expect("monitor enabled");
    sim.checks.push(Check::new(
        "entropy monitor",
        monitor.violations.is_empty(),
        format!("{} steps, {} violations", monitor.steps, monitor.violations.len()),
    ));
    let report = audit(&sim.trace(), &sim.graphs());
    sim.checks.push(Check::new(
        "audit against own graphs",
        report.passed(),
        format!("{} cuts, {} violations", report.cuts_checked, report.violations.len()),
    ));
    Ok(sim)
}

#[derive(Serialize)]
struct LedgerFile<'a> {
    protocol: &'a str,
    n: usize,
    seed: u64,
    hub: Option<usize>,
    ledger: ebitnet::protocols::LedgerSummary,
    checks: &'a [Check],
}

pub fn ledger_json(sim: &Simulation) -> String {
    let file = LedgerFile {
        protocol: sim.protocol.name(),
        n: sim.n(),
        seed: sim.seed,
        hub: sim.hub,
        ledger: sim.session.ledger.summary(),
        checks: &sim.checks,
    };
    let mut out = serde_json::to_string_pretty(&file).expect("ledger serialises");
    out.push('\n');
    out
}

#[derive(Serialize)]
struct SampleRecord {
    step: usize,
    party: usize,
    outcomes: Vec<String>,
}

/// Draws `k` outcomes from every recorded measurement distribution. The
/// stream is separate from the one that built the run.
pub fn samples_json(sim: &Simulation, k: usize) -> String {
    use ebitnet::protocols::Event;
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    rng.set_stream(1);
    let mut records = Vec::new();
    for (step, e) in sim.session.events.iter().enumerate() {
        if let Event::LocalMeasure { party, distribution, .. } = e {
            let outcomes = (0..k)
                .map(|_| {
                    let mut x: f64 = rng.random();
                    let mut pick = distribution.keys().next_back().cloned().unwrap_or_default();
                    for (label, p) in distribution {
                        if x < *p {
                            pick = label.clone();
                            break;
                        }
                        x -= p;
                    }
                    pick
                })
                .collect();
            records.push(SampleRecord {
                step: step + 1,
                party: *party,
                outcomes,
            });
        }
    }
    let mut out = serde_json::to_string_pretty(&records).expect("samples serialise");
    out.push('\n');
    out
}
