use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dioph_core::oracle::{emulate_oracle, s_assignment};
use dioph_core::poly::{brute_force_solve_capped, classical_cost_estimate};
use dioph_core::resources::sweep::{
    equation_count_stratum, exponent_fit, linear_stratum, linear_stratum_fits, quadratic_stratum, rows_to_csv,
    sweep_and_fit, variable_count_stratum, SweepConfig, SweepRow,
};
use dioph_core::resources::{qubit_count_model, toffoli_equiv_cost};
use dioph_core::simulator::search::{
    bbht_search, calibrated_search, enumerate_all, SearchConfig, SearchReport, DEFAULT_BUDGET_MULTIPLIER,
};
use dioph_core::simulator::trace::{calibrated_depth, optimal_iterations, Backend, GroverEngine};
use dioph_core::simulator::DEFAULT_MAX_QUBITS;
use dioph_core::{parse_system, DiophantineSystem, Error, OracleBundle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_VERIFY: u8 = 4;
const EXIT_BUDGET: u8 = 5;

/// Default cap on exhaustively enumerated domain points.
const DEFAULT_MAX_DOMAIN: u128 = 1 << 22;
const VERIFY_SAMPLES: usize = 10_000;

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
}

#[derive(Parser)]
#[command(name = "dioph", version, about = "Grover oracle compiler and simulator for bounded Diophantine systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the Grover iteration; writes circuit text and prints its cost.
    Synth {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the synthesized oracle against brute force by classical emulation.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        caps: Caps,
        /// Required when the domain exceeds --max-domain and inputs are sampled.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Amplification trace as CSV.
    Simulate {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendArg::Hybrid)]
        backend: BackendArg,
        /// Number of Grover steps, or `auto`.
        #[arg(long, default_value = "auto")]
        steps: Steps,
        #[command(flatten)]
        caps: Caps,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for solutions.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Bbht)]
        mode: Mode,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = BackendArg::Hybrid)]
        backend: BackendArg,
        #[command(flatten)]
        caps: Caps,
        /// Oracle queries allowed per search; default 3 ceil(sqrt|D|).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        /// Solution-count estimate for `--mode calibrated`; default 1.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        m_estimate: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Register plan and Toffoli-equivalent cost of one system.
    Resources {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesis-only scaling sweep: CSV rows plus fitted exponent.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Caps {
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS, value_parser = positive_usize)]
    max_qubits: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_DOMAIN, value_parser = positive_u128)]
    max_domain: u128,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Stratum::Global)]
    stratum: Stratum,
    #[arg(long, default_value_t = 1500)]
    instances: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Dense,
    Hybrid,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Dense => Backend::Dense,
            BackendArg::Hybrid => Backend::Hybrid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Bbht,
    Calibrated,
    Enumerate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stratum {
    Global,
    Linear,
    Quadratic,
    Equations,
    Variables,
}

#[derive(Clone, Copy)]
enum Steps {
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for Steps {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Steps::Auto);
        }
        s.parse().map(Steps::Fixed).map_err(|_| format!("expected a step count or `auto`, got `{s}`"))
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    positive_u128(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

fn positive_u128(s: &str) -> Result<u128, String> {
    match s.parse::<u128>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn load(path: &Path) -> anyhow::Result<DiophantineSystem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_system(&text)?)
}

/// Writes `text` to `out`, or stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn synth(input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let sys = load(input)?;
    let bundle = OracleBundle::new(&sys)?;
    let report = toffoli_equiv_cost(&bundle.iteration).with_descriptor(&sys);
    match out {
        Some(p) => {
            emit(Some(p), &bundle.iteration.to_text())?;
            print!("{}", report.to_text());
        }
        None => {
            print!("{}", bundle.iteration.to_text());
            eprint!("{}", report.to_text());
        }
    }
    Ok(())
}

fn verify(input: &Path, caps: &Caps, seed: Option<u64>) -> anyhow::Result<()> {
    let sys = load(input)?;
    let bundle = OracleBundle::new(&sys)?;
    let domain = sys.domain_size().unwrap_or(u128::MAX);
    let s_bits = bundle.plan.s_span().width;
    if domain <= caps.max_domain {
        let emu = emulate_oracle(&bundle, s_bits).map_err(|e| match e {
            Error::GarbageDetected(msg) => Failure::Verification(format!("garbage: {msg}")).into(),
            other => anyhow::Error::from(other),
        })?;
        let truth = brute_force_solve_capped(&sys, caps.max_domain)?;
        for (i, &marked) in emu.marked.iter().enumerate() {
            let x = s_assignment(&bundle.plan, i as u128);
            if marked != truth.binary_search(&x).is_ok() {
                return Err(Failure::Verification(format!(
                    "phase at {x} is {}, brute force says {}",
                    if marked { "flipped" } else { "unflipped" },
                    if marked { "not a solution" } else { "a solution" }
                ))
                .into());
            }
        }
        println!("exhaustive: {} basis states, workspace restored on every input", emu.marked.len());
        println!("marked set = brute-force set ({} solutions)", truth.len());
    } else {
        let seed = seed.ok_or_else(|| anyhow!("domain of {domain} points exceeds --max-domain; sampling needs --seed"))?;
        let compiled = bundle.compiled_oracle()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..VERIFY_SAMPLES {
            let s = if s_bits == 128 { rng.gen() } else { rng.gen_range(0..1u128 << s_bits) };
            let x = s_assignment(&bundle.plan, s);
            let (state, negative) = compiled.run(s);
            if state != s {
                return Err(Failure::Verification(format!("garbage: input {x} left state {state:#x}")).into());
            }
            if negative != sys.is_solution(&x)? {
                return Err(Failure::Verification(format!("phase at {x} disagrees with classical check")).into());
            }
        }
        println!("sampled: {VERIFY_SAMPLES} basis states (seed {seed}), workspace restored, phases match classical check");
    }
    Ok(())
}

fn simulate(input: &Path, backend: Backend, steps: Steps, caps: &Caps, out: Option<&Path>) -> anyhow::Result<()> {
    let sys = load(input)?;
    let domain = sys.domain_size().unwrap_or(u128::MAX);
    let steps = match steps {
        Steps::Fixed(t) => t,
        Steps::Auto if domain <= caps.max_domain => {
            let m = brute_force_solve_capped(&sys, caps.max_domain)?.len() as u128;
            calibrated_depth(m.max(1), domain)? as usize
        }
        Steps::Auto => optimal_iterations(domain, 1)? as usize,
    };
    let engine = GroverEngine::<f64>::new(OracleBundle::new(&sys)?, backend, caps.max_qubits)?;
    let trace = engine.trace(steps)?;
    emit(out, &trace.to_csv())?;
    let (t, p) = trace.peak();
    eprintln!("peak success probability {p:.6} at step {t} ({backend}, M = {})", engine.target_count());
    Ok(())
}

fn describe(report: &SearchReport) -> String {
    format!("{} queries, {} attempts, budget {}", report.queries, report.attempts, report.budget)
}

#[allow(clippy::too_many_arguments)]
fn solve(
    input: &Path,
    mode: Mode,
    seed: u64,
    backend: Backend,
    caps: &Caps,
    budget: Option<u64>,
    m_estimate: Option<u64>,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let sys = load(input)?;
    let cfg = SearchConfig { backend, max_qubits: caps.max_qubits, budget, budget_multiplier: DEFAULT_BUDGET_MULTIPLIER };
    let mut text = String::new();
    match mode {
        Mode::Bbht | Mode::Calibrated => {
            let report = match mode {
                Mode::Bbht => bbht_search(&sys, seed, &cfg)?,
                _ => calibrated_search(&sys, m_estimate.unwrap_or(1).into(), seed, &cfg)?,
            };
            match &report.solution {
                Some(x) => writeln!(text, "solution {x} ({})", describe(&report))?,
                None => {
                    return Err(Failure::Budget(format!(
                        "no solution found ({}); the system may be unsatisfiable",
                        describe(&report)
                    ))
                    .into())
                }
            }
        }
        Mode::Enumerate => {
            let e = enumerate_all(&sys, seed, &cfg)?;
            for x in &e.solutions {
                writeln!(text, "solution {x}")?;
            }
            writeln!(
                text,
                "{} solutions, {} queries over {} searches; stopped after a full-budget search found nothing",
                e.solutions.len(),
                e.total_queries,
                e.searches.len()
            )?;
        }
    }
    emit(out, &text)
}

fn resources(input: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let sys = load(input)?;
    let bundle = OracleBundle::new(&sys)?;
    let mut text = String::new();
    for (label, span) in bundle.plan.labelled_spans() {
        writeln!(text, "register {label} offset {} width {}", span.offset, span.width)?;
    }
    let model = qubit_count_model(&sys);
    writeln!(text, "model_qubits {} (system {} accumulator {} workspace {} counter {})", model.total(), model.system, model.accumulator, model.workspace, model.counter)?;
    let classical = classical_cost_estimate(&sys);
    writeln!(text, "classical q_cl {} cost_order {}", classical.q_cl, classical.cost_order)?;
    text.push_str(&toffoli_equiv_cost(&bundle.iteration).with_descriptor(&sys).to_text());
    emit(out, &text)
}

fn fit_line(rows: &[SweepRow]) -> String {
    match exponent_fit(rows) {
        Ok(f) => format!("exponent {:.4} r_squared {:.4} rows {}", f.slope, f.r_squared, rows.len()),
        Err(e) => format!("no fit: {e}"),
    }
}

fn sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let mut summary = Vec::new();
    let rows: Vec<SweepRow> = match args.stratum {
        Stratum::Global => {
            let cfg = SweepConfig { instances: args.instances, ..SweepConfig::global() };
            let outcome = sweep_and_fit(&cfg, args.seed);
            for (id, seed, err) in &outcome.failures {
                summary.push(format!("failed instance {id} (seed {seed}): {err}"));
            }
            summary.push(fit_line(&outcome.rows));
            outcome.rows
        }
        Stratum::Linear => {
            let groups = linear_stratum(&[1, 2, 3, 4], &(2..=12).collect::<Vec<_>>())?;
            for (k, f) in linear_stratum_fits(&groups)? {
                summary.push(format!("w_H {k}: slope {:.4} intercept {:.4} r_squared {:.4}", f.slope, f.intercept, f.r_squared));
            }
            groups.into_iter().flat_map(|(_, r)| r).collect()
        }
        Stratum::Quadratic => {
            let groups = quadratic_stratum(&[1, 2, 3], &(2..=16).collect::<Vec<_>>())?;
            for (k, rows) in &groups {
                summary.push(format!("w_H {k}: {}", fit_line(rows)));
            }
            let rows: Vec<SweepRow> = groups.into_iter().flat_map(|(_, r)| r).collect();
            summary.push(format!("pooled: {}", fit_line(&rows)));
            rows
        }
        Stratum::Equations => {
            let rows = equation_count_stratum(4, &[1, 2, 3, 4])?;
            for r in &rows {
                summary.push(format!("m {}: q {} toffoli_equiv {}", r.m, r.q_planned, r.total_toffoli_equiv));
            }
            rows
        }
        Stratum::Variables => {
            let mut all = Vec::new();
            for n in 4..=7 {
                let rows = variable_count_stratum(n, &(2..=8).collect::<Vec<_>>())?;
                summary.push(format!("n {n}: {}", fit_line(&rows)));
                all.extend(rows);
            }
            all
        }
    };
    emit(args.out.as_deref(), &rows_to_csv(&rows))?;
    for line in summary {
        if args.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return match f {
            Failure::Verification(_) => EXIT_VERIFY,
            Failure::Budget(_) => EXIT_BUDGET,
        };
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => EXIT_PARSE,
        Some(Error::CapExceeded { .. } | Error::DomainTooLarge { .. }) => EXIT_CAP,
        Some(Error::GarbageDetected(_)) => EXIT_VERIFY,
        _ => EXIT_FAILURE,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("DIOPH_THREADS") {
        let n: usize = v.parse().map_err(|_| anyhow!("DIOPH_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err(anyhow!("DIOPH_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Synth { input, out } => synth(&input, out.as_deref()),
        Command::Verify { input, caps, seed } => verify(&input, &caps, seed),
        Command::Simulate { input, backend, steps, caps, out } => {
            simulate(&input, backend.into(), steps, &caps, out.as_deref())
        }
        Command::Solve { input, mode, seed, backend, caps, budget, m_estimate, out } => {
            solve(&input, mode, seed, backend.into(), &caps, budget, m_estimate, out.as_deref())
        }
        Command::Resources { input, out } => resources(&input, out.as_deref()),
        Command::Sweep(args) => sweep(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
