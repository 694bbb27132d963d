use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ebitnet::bounds::{bound_table, half_transfer_bits_threshold, table_csv, table_json};
use ebitnet::graphs::{
    import_json, symmetrised_edge_weight, CommunicationGraph, EntanglementGraph, GraphKind, ResourceGraphs,
    MAX_BRUTE_FORCE_N,
};
use ebitnet::protocols::{audit, ProtocolTrace};
use ebitnet::quantum::DEFAULT_MAX_QUBITS;
use ebitnet::rational::{self, Rational};

pub mod simulate;

use simulate::{ledger_json, samples_json, simulate, Protocol, SimConfig, Simulation};

pub const MAX_QUBITS_ENV: &str = "EBITNET_MAX_QUBITS";
pub const MAX_TABLE_N: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Dot,
}

#[derive(Parser, Debug)]
#[command(name = "ebitnet", version, about = "Simulate collective operations on separated qubits and tabulate their resource bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a protocol and write its trace, ledger and resource graphs
    Simulate {
        protocol: Protocol,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hub party for star-op, ps and ps-cp
        #[arg(long)]
        hub: Option<usize>,
        /// Output directory
        #[arg(long, default_value = ".")]
        output: PathBuf,
        /// Also write k sampled outcomes per measurement
        #[arg(long, value_name = "K")]
        sample: Option<usize>,
    },
    /// Tabulate the resource bounds for n = 2..=n-max
    Bounds {
        #[arg(long, default_value_t = 16)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Symmetrise a pair of resource graphs over all relabellings
    Symmetrise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check a trace against resource graphs
    Audit {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        graphs: PathBuf,
        /// Re-run the recorded protocol and watch entropy step by step
        #[arg(long)]
        replay: bool,
    },
}

/// Parses the process arguments, runs the command and maps errors to exit codes.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            protocol,
            n,
            seed,
            hub,
            output,
            sample,
        } => {
            let cfg = SimConfig {
                protocol,
                n,
                seed,
                hub,
                max_qubits: max_qubits()?,
            };
            cmd_simulate(&cfg, &output, sample)
        }
        Command::Bounds { n_max, format, output } => cmd_bounds(n_max, format, output.as_deref()),
        Command::Symmetrise { input, output, format } => cmd_symmetrise(&input, output.as_deref(), format),
        Command::Audit { trace, graphs, replay } => cmd_audit(&trace, &graphs, replay),
    }
}

pub fn max_qubits() -> Result<usize, CliError> {
    match std::env::var(MAX_QUBITS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_QUBITS),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(CliError::Usage(format!("{MAX_QUBITS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(e) => Err(CliError::Usage(format!("{MAX_QUBITS_ENV}: {e}"))),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn print_summary(sim: &Simulation) {
    let l = &sim.session.ledger;
    match sim.hub {
        Some(h) => println!("{} n={} seed={} hub={h}", sim.protocol, sim.n(), sim.seed),
        None => println!("{} n={} seed={}", sim.protocol, sim.n(), sim.seed),
    }
    println!(
        "ebits consumed {}, created {}; bits sent {}; supplementary {}",
        rational::format(&l.total_consumed()),
        rational::format(&l.total_created()),
        rational::format(&l.total_sent()),
        l.supplementary_bits()
    );
    for c in &sim.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("  [{mark}] {}: {}", c.name, c.detail);
    }
}

pub fn cmd_simulate(cfg: &SimConfig, dir: &Path, sample: Option<usize>) -> Result<(), CliError> {
    let sim = simulate(cfg)?;
    fs::create_dir_all(dir).map_err(|e| CliError::Failure(format!("cannot create {}: {e}", dir.display())))?;
    let name = sim.protocol.name();
    let mut files = vec![
        (format!("{name}.trace.jsonl"), sim.trace().export_jsonl()),
        (format!("{name}.ledger.json"), ledger_json(&sim)),
        (format!("{name}.graphs.json"), sim.graphs().to_json()),
    ];
    if let Some(k) = sample {
        files.push((format!("{name}.samples.json"), samples_json(&sim, k)));
    }
    print_summary(&sim);
    for (file, contents) in &files {
        let path = dir.join(file);
        write(&path, contents)?;
        println!("wrote {}", path.display());
    }
    if sim.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = sim.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Failure(format!("postconditions failed: {}", failed.join(", "))))
    }
}

pub fn cmd_bounds(n_max: usize, format: Format, output: Option<&Path>) -> Result<(), CliError> {
    if !(2..=MAX_TABLE_N).contains(&n_max) {
        return Err(CliError::Usage(format!("--n-max must lie in 2..={MAX_TABLE_N}, got {n_max}")));
    }
    let rows = bound_table(n_max).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = match format {
        Format::Csv => table_csv(&rows),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table_json(&rows)).expect("table serialises");
            s.push('\n');
            s
        }
        Format::Dot => return Err(CliError::Usage("bounds writes csv or json".into())),
    };
    if n_max >= 3 {
        eprintln!("note: n = 3 is flagged open; its lower bounds are not known to be tight");
    }
    match half_transfer_bits_threshold(n_max) {
        Some(t) => eprintln!(
            "note: for odd n >= {t} up to {n_max}, the rounded half-transfer communication bound equals the teleportation cost"
        ),
        None if n_max >= 3 => eprintln!("note: the rounded half-transfer communication bound stays below the teleportation cost up to {n_max}"),
        None => {}
    }
    match output {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub struct SymmetriseReport {
    pub n: usize,
    pub e: Rational,
    pub c: Rational,
    /// `None` when `n` is too large for the permutation sum.
    pub brute_force_agrees: Option<bool>,
    pub graphs: ResourceGraphs,
}

pub fn symmetrise_graphs(g: &ResourceGraphs) -> Result<SymmetriseReport, CliError> {
    let n = g.n();
    let e = symmetrised_edge_weight(GraphKind::Entanglement, &g.entanglement.total(), n);
    let c = symmetrised_edge_weight(GraphKind::Communication, &g.communication.total(), n);
    let closed = ResourceGraphs::new(
        EntanglementGraph::regular_complete(n, e.clone()),
        CommunicationGraph::regular_complete(n, c.clone()),
    )
    .map_err(|err| CliError::Failure(err.to_string()))?;
    let brute_force_agrees = if n <= MAX_BRUTE_FORCE_N {
        let se = g.entanglement.symmetrise().map_err(|err| CliError::Failure(err.to_string()))?;
        let sc = g.communication.symmetrise().map_err(|err| CliError::Failure(err.to_string()))?;
        Some(se == closed.entanglement && sc == closed.communication)
    } else {
        None
    };
    Ok(SymmetriseReport {
        n,
        e,
        c,
        brute_force_agrees,
        graphs: closed,
    })
}

pub fn cmd_symmetrise(input: &Path, output: Option<&Path>, format: Format) -> Result<(), CliError> {
    let text = read(input)?;
    let g = import_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
    let report = symmetrise_graphs(&g)?;
    println!("n = {}", report.n);
    println!("e = {}", rational::format(&report.e));
    println!("c = {}", rational::format(&report.c));
    if report.e != Rational::from_integer(0.into()) {
        let half = &report.e / Rational::from_integer(2.into());
        println!(
            "note: e counts every edge in both orientations of the permutation sum; counting each unordered edge once would give {}",
            rational::format(&half)
        );
    }
    match report.brute_force_agrees {
        Some(true) => println!("brute-force check over {}! relabellings: agrees", report.n),
        Some(false) => println!("brute-force check over {}! relabellings: DISAGREES", report.n),
        None => println!(
            "brute-force check skipped: n = {} exceeds {MAX_BRUTE_FORCE_N}, closed form only",
            report.n
        ),
    }
    if let Some(path) = output {
        let body = match format {
            Format::Json => report.graphs.to_json(),
            Format::Dot => report.graphs.to_dot(),
            Format::Csv => return Err(CliError::Usage("symmetrise writes json or dot".into())),
        };
        write(path, &body)?;
        println!("wrote {}", path.display());
    }
    if report.brute_force_agrees == Some(false) {
        return Err(CliError::Failure("closed form and brute force differ".into()));
    }
    Ok(())
}

pub fn cmd_audit(trace_path: &Path, graphs_path: &Path, replay: bool) -> Result<(), CliError> {
    let trace_text = read(trace_path)?;
    let trace = ProtocolTrace::parse_jsonl(&trace_text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", trace_path.display())))?;
    let graphs = import_json(&read(graphs_path)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", graphs_path.display())))?;

    let report = audit(&trace, &graphs);
    println!(
        "{} events, {} cuts checked; ebits consumed {}, created {}; bits sent {}, decoded {}",
        report.events, report.cuts_checked, report.consumed, report.created, report.bits_sent, report.bits_decoded
    );
    for v in &report.violations {
        println!("violation [{}]: {}", v.rule, v.detail);
    }
    let mut failures = report.violations.len();

    if replay {
        let h = &trace.header;
        let protocol = Protocol::from_name(&h.protocol)
            .ok_or_else(|| CliError::Usage(format!("cannot replay unknown protocol {:?}", h.protocol)))?;
        let sim = simulate(&SimConfig {
            protocol,
            n: Some(h.n),
            seed: h.seed,
            hub: h.hub,
            max_qubits: max_qubits()?,
        })?;
        let monitor = sim.session.monitor().expect("simulations enable the monitor");
        println!(
            "replay: {} steps, {} entropy violations",
            monitor.steps,
            monitor.violations.len()
        );
        for v in &monitor.violations {
            println!(
                "violation [entropy]: step {} cut {:?} rose from {:.9} to {:.9} with allowance {}",
                v.step, v.cut, v.before, v.after, v.allowance
            );
        }
        failures += monitor.violations.len();
        // compare the exported text, which keeps every float digit
        let replayed = sim.trace().export_jsonl();
        let ours: Vec<&str> = replayed.lines().collect();
        let theirs: Vec<&str> = trace_text.lines().filter(|l| !l.trim().is_empty()).collect();
        if ours == theirs {
            println!("replay: events match the trace");
        } else {
            let at = ours
                .iter()
                .zip(&theirs)
                .position(|(a, b)| a != b)
                .unwrap_or(ours.len().min(theirs.len()));
            println!("violation [replay]: trace diverges at line {}", at + 1);
            failures += 1;
        }
    }

    if failures == 0 {
        println!("no violations");
        Ok(())
    } else {
        Err(CliError::Failure(format!("{failures} violation(s)")))
    }
}
