//! `qlump`: reduce, simulate, benchmark and generate quantum circuits.
//!
//! Exit codes: 0 ok, 2 parse error, 3 capacity exceeded, 4 timeout,
//! 5 configuration error, 1 anything else.

mod bench;
mod circuits;

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use qlump_core::circuit::emit_qasm;
use qlump_core::lumping::{
    check_bcb, check_fcb, lump_krylov_opts, lump_residual_opts, write_reduced_system,
    LumpOptions, DEFAULT_D_MAX,
};
use qlump_core::sim::{
    qaoa_expectation, run_regime, KappaPolicy, RegimeMode, RunConfig, RunStatus,
    TrajectoryPolicy,
};
use qlump_core::state::{DdBackend, DenseBackend};
use qlump_core::{Error, Result, TolerancePolicy};

use circuits::{parse_seed_spec, CircuitSpec};

#[derive(Parser)]
#[command(
    name = "qlump",
    about = "Constrained-bisimulation reduction and simulation of quantum circuits",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a reduction and report d, the reduction ratio, and the
    /// forward/backward invariance residuals.
    Lump(LumpArgs),
    /// Run one circuit end to end in a chosen regime.
    Simulate(SimulateArgs),
    /// Run a benchmark manifest and emit a CSV of records.
    Bench(BenchArgs),
    /// Emit a built-in family as an OpenQASM file.
    Generate(GenerateArgs),
}

#[derive(Args, Clone)]
struct CircuitArgs {
    /// Family name: ghz qft dj graphstate wstate grover orderfinding
    /// qaoasat qaoamaxcut.
    #[arg(long)]
    family: Option<String>,
    /// OpenQASM 2.0 file (alternative to --family).
    #[arg(long)]
    qasm: Option<PathBuf>,
    /// Qubit count for family circuits.
    #[arg(short = 'n', long = "qubits")]
    n: Option<usize>,
    /// Marked basis indices for grover (comma separated).
    #[arg(long, value_delimiter = ',')]
    marked: Vec<u64>,
    /// Base x for orderfinding.
    #[arg(long)]
    base: Option<u64>,
    /// Modulus N for orderfinding.
    #[arg(long)]
    modulus: Option<u64>,
    /// Time step for the phase-separation families.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Seed for randomized instances (qaoasat, qaoamaxcut, random marked
    /// sets, random graphs).
    #[arg(long)]
    rng_seed: Option<u64>,
}

impl CircuitArgs {
    fn to_spec(&self) -> CircuitSpec {
        CircuitSpec {
            family: self.family.clone(),
            qasm: self.qasm.clone(),
            n: self.n,
            marked: self.marked.clone(),
            base: self.base,
            modulus: self.modulus,
            delta: self.delta,
            rng_seed: self.rng_seed,
        }
    }
}

#[derive(Args)]
struct LumpArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Seed spec: ket0 | psi | ket1 | indices:3,5 | file:PATH.
    #[arg(long, default_value = "ket0")]
    seed: String,
    /// Backend for the reduction: dense | dd.
    #[arg(long, default_value = "dense")]
    backend: String,
    /// Use the residual-projection procedure instead of the Krylov one.
    #[arg(long)]
    residual: bool,
    /// Rank cutoff override.
    #[arg(long)]
    tol_rank: Option<f64>,
    /// Cap on the reduced dimension.
    #[arg(long, default_value_t = DEFAULT_D_MAX)]
    d_max: usize,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Output path for the serialized reduced system
    /// (default `<circuit>.reduced.txt`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    #[arg(long, default_value = "ket0")]
    seed: String,
    /// Regime: reduced-dense | reduced-dd | full-dense | full-dd.
    #[arg(long, default_value = "reduced-dense")]
    regime: String,
    /// Fixed step count (default: ceil(sqrt(2^n))).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    timeout_s: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_D_MAX)]
    d_max: usize,
    /// Print `|<index|w>|^2` for these basis indices after the run.
    #[arg(long, value_delimiter = ',')]
    observe: Vec<u64>,
    /// Trajectory CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Manifest path (see the bench module docs for the format).
    #[arg(long)]
    manifest: PathBuf,
    /// Repetition override.
    #[arg(long)]
    reps: Option<usize>,
    /// Timeout override in seconds.
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Instance-randomization seed override.
    #[arg(long)]
    rng_seed: Option<u64>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    circuit: CircuitArgs,
    /// Output path (default `<circuit>.qasm`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Lump(args) => cmd_lump(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::UnsupportedGate { .. } => 2,
        Error::Capacity { .. } => 3,
        Error::Timeout { .. } => 4,
        Error::Config(_) => 5,
        _ => 1,
    }
}

fn timeout_of(seconds: Option<f64>) -> Option<Duration> {
    seconds.map(Duration::from_secs_f64)
}

fn tolerances(tol_rank: Option<f64>) -> Result<TolerancePolicy<f64>> {
    let tol = TolerancePolicy::default();
    match tol_rank {
        Some(eps) => tol.with_eps_rank(eps),
        None => Ok(tol),
    }
}

fn cmd_lump(args: LumpArgs) -> Result<i32> {
    let built = args.circuit.to_spec().build()?;
    let circuit = &built.circuit;
    let n = circuit.qubits();
    let seed = parse_seed_spec(&args.seed, n)?;
    let tol = tolerances(args.tol_rank)?;
    let opts = LumpOptions {
        d_max: args.d_max,
        deadline: timeout_of(args.timeout_s).map(qlump_core::error::Deadline::new),
    };

    macro_rules! run_and_report {
        ($backend:expr) => {{
            let backend = $backend;
            let rs = if args.residual {
                lump_residual_opts(&backend, circuit, &seed, &tol, opts)?
            } else {
                lump_krylov_opts(&backend, circuit, &seed, &tol, opts)?
            };
            let fcb = check_fcb(rs.basis(), circuit)?;
            let bcb = check_bcb(rs.basis(), circuit)?;
            println!("circuit: {}", circuit.name());
            println!("n: {n}");
            println!("d: {}", rs.d());
            println!("rr: {:.2}%", rs.reduction_ratio_percent());
            println!("fcb_residual: {fcb:.3e}");
            println!("bcb_residual: {bcb:.3e}");
            let path = args
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.reduced.txt", circuit.name())));
            std::fs::write(&path, write_reduced_system(&rs, 12))?;
            println!("wrote: {}", path.display());
        }};
    }
    match args.backend.parse::<qlump_core::state::BackendKind>()? {
        qlump_core::state::BackendKind::Dense => run_and_report!(DenseBackend),
        qlump_core::state::BackendKind::Dd => {
            run_and_report!(DdBackend::<f64>::default())
        }
    }
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let built = args.circuit.to_spec().build()?;
    let circuit = &built.circuit;
    let n = circuit.qubits();
    let mode: RegimeMode = args.regime.parse()?;
    let cfg = RunConfig {
        seed: parse_seed_spec(&args.seed, n)?,
        tol: TolerancePolicy::default(),
        kappa: match args.steps {
            Some(k) => KappaPolicy::Fixed(k),
            None => KappaPolicy::SqrtN,
        },
        d_max: args.d_max,
        timeout: timeout_of(args.timeout_s),
        trajectory: TrajectoryPolicy::EveryStep,
    };
    let run = run_regime(circuit, &cfg, mode)?;
    println!("circuit: {}", circuit.name());
    println!("mode: {mode}");
    println!("steps: {}", run.steps);
    if let Some(d) = run.d {
        println!("d: {d}");
    }
    println!("reduce_ms: {:.3}", run.reduce_ms);
    println!("sim_ms: {:.3}", run.sim_ms);
    println!("status: {}", run.status);
    if run.seed_outside_span {
        println!("warning: initial state lies outside the reduced subspace");
    }
    if run.status == RunStatus::Ok {
        for &idx in &args.observe {
            println!("p[{idx}]: {:.12}", run.basis_probability(idx)?);
        }
        if let Some(problem) = &built.problem {
            let state = run.final_state()?.to_dense()?;
            println!(
                "expected_score: {:.12}",
                qaoa_expectation(&state, problem)?
            );
        }
    }
    let csv = run.trajectory_csv();
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(match run.status {
        RunStatus::Ok => 0,
        RunStatus::Capacity => 3,
        RunStatus::Timeout => 4,
    })
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.manifest)
        .map_err(|e| Error::Config(format!("cannot read manifest: {e}")))?;
    let mut manifest = bench::Manifest::parse(&text)?;
    if let Some(reps) = args.reps {
        if reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        manifest.set_reps(reps);
    }
    if let Some(t) = timeout_of(args.timeout_s) {
        manifest.set_timeout(t);
    }
    if let Some(seed) = args.rng_seed {
        manifest.set_rng_seed(seed);
    }
    let records = manifest.run()?;
    let csv = bench::records_to_csv(&records);
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn cmd_generate(args: GenerateArgs) -> Result<i32> {
    let built = args.circuit.to_spec().build_elementary()?;
    let text = emit_qasm(&built.circuit)?;
    let path = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}.qasm", built.circuit.name())));
    std::fs::write(&path, text)?;
    println!("wrote: {}", path.display());
    Ok(0)
}
