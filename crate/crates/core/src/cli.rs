//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O or schema error, 4 internal
//! invariant breach.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::model::{ModelError, Scenario};
use crate::planner::{PlannerError, WeightSet};
use crate::plot::render_svg;
use crate::simloop::{
    aggregate, compute_metrics, decide_once, plan_once, run, Metrics, Mode, SimConfig, SimError,
    SimLog,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mvplan", version, about = "Joint decision-making and trajectory planning for multiple vehicles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run closed-loop simulations, one per seed.
    Simulate(RunArgs),
    /// Run one joint decision at the initial state and print the sequences.
    Decide(RunArgs),
    /// Decide and plan once at the initial state and print the trajectories.
    Plan(RunArgs),
    /// Recompute metrics from saved logs and print their aggregate.
    Metrics {
        /// Log files written by `simulate`.
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Write the aggregate document into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a saved log as SVG.
    Plot {
        log: PathBuf,
        /// Output file (defaults to the log path with an .svg extension).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Weight-set file; the built-in habit weights are used when absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value = "full", value_parser = parse_mode)]
    mode: Mode,
    /// Comma-separated seeds.
    #[arg(long, default_value = "0", value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write an SVG per run.
    #[arg(long)]
    plot: bool,
    /// Maximum simulated time per run (s); overrides the config file.
    #[arg(long)]
    max_duration: Option<f64>,
    /// Engine configuration (TOML); built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Expand every joint action combination instead of the pruned set.
    #[arg(long)]
    no_pruning: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::io(e.to_string())
    }
}

impl From<PlannerError> for Failure {
    fn from(e: PlannerError) -> Self {
        Failure::io(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::ScenarioInvalid(_) => EXIT_IO,
            SimError::Config(_) => EXIT_USAGE,
            SimError::Internal(_) => EXIT_INTERNAL,
        };
        Failure { code, message: e.to_string() }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Prints one document; a closed reader is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

struct Inputs {
    scenario: Scenario,
    weights: WeightSet,
    base: SimConfig,
}

fn load_inputs(args: &RunArgs) -> Result<Inputs, Failure> {
    let scenario = Scenario::load(&args.scenario)?;
    let weights = match &args.weights {
        Some(p) => WeightSet::load(p)?,
        None => WeightSet::default(),
    };
    let mut base = match &args.config {
        Some(p) => SimConfig::from_toml_str(&read_file(p)?)
            .map_err(|e| Failure::io(format!("{}: {e}", p.display())))?,
        None => SimConfig::default(),
    };
    base.mode = args.mode;
    if let Some(t) = args.max_duration {
        base.max_duration = t;
    }
    if args.no_pruning {
        base.pruning = false;
    }
    base.validate()?;
    Ok(Inputs { scenario, weights, base })
}

fn config(inputs: &Inputs, seed: u64) -> SimConfig {
    SimConfig { seed, ..inputs.base }
}

fn simulate(args: &RunArgs) -> Result<(), Failure> {
    if args.seeds.is_empty() {
        return Err(Failure { code: EXIT_USAGE, message: "at least one seed is required".into() });
    }
    let inputs = load_inputs(args)?;
    let (scenario, weights) = (&inputs.scenario, &inputs.weights);
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(format!("{}: {e}", args.out.display())))?;
    let stem = format!("{}_{}", scenario.id(), args.mode);
    let results: Vec<Result<Metrics, Failure>> = args
        .seeds
        .par_iter()
        .map(|&seed| {
            let log = run(scenario, weights, &config(&inputs, seed))?;
            let base = args.out.join(format!("{stem}_seed{seed}"));
            write_file(&base.with_extension("csv"), &log.csv_string())?;
            write_file(&base.with_extension("log.json"), &log.to_json())?;
            let metrics = compute_metrics(&log);
            write_file(&base.with_extension("metrics.json"), &metrics.to_json())?;
            if args.plot {
                write_file(&base.with_extension("svg"), &render_svg(&log))?;
            }
            Ok(metrics)
        })
        .collect();
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let agg = aggregate(&runs);
    write_file(&args.out.join(format!("{stem}_aggregate.json")), &agg.to_json())?;
    emit(&agg.to_json())?;
    Ok(())
}

fn decide(args: &RunArgs) -> Result<(), Failure> {
    let inputs = load_inputs(args)?;
    let scenario = &inputs.scenario;
    let seed = args.seeds.first().copied().unwrap_or(0);
    let record = decide_once(scenario, &inputs.weights, &config(&inputs, seed))?;
    let doc = serde_json::json!({
        "scenario_id": scenario.id(),
        "seed": seed,
        "decision": record,
    });
    emit(&serde_json::to_string_pretty(&doc).expect("json values serialize"))?;
    Ok(())
}

fn plan_cmd(args: &RunArgs) -> Result<(), Failure> {
    let inputs = load_inputs(args)?;
    let scenario = &inputs.scenario;
    let seed = args.seeds.first().copied().unwrap_or(0);
    let cycle = plan_once(scenario, &inputs.weights, &config(&inputs, seed))?;
    let doc = serde_json::json!({
        "scenario_id": scenario.id(),
        "seed": seed,
        "cycle": cycle,
    });
    emit(&serde_json::to_string_pretty(&doc).expect("json values serialize"))?;
    Ok(())
}

fn load_log(path: &Path) -> Result<SimLog, Failure> {
    SimLog::from_json(&read_file(path)?).map_err(|e| Failure::io(format!("{}: malformed log: {e}", path.display())))
}

fn metrics_cmd(logs: &[PathBuf], out: Option<&Path>) -> Result<(), Failure> {
    let runs = logs
        .iter()
        .map(|p| load_log(p).map(|l| compute_metrics(&l)))
        .collect::<Result<Vec<_>, _>>()?;
    let agg = aggregate(&runs);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
        write_file(&dir.join(format!("{}_{}_aggregate.json", agg.scenario_id, agg.mode)), &agg.to_json())?;
    }
    let doc = serde_json::json!({ "runs": runs, "aggregate": agg });
    emit(&serde_json::to_string_pretty(&doc).expect("json values serialize"))?;
    Ok(())
}

fn plot_cmd(log: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let parsed = load_log(log)?;
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| log.with_extension("svg"));
    write_file(&target, &render_svg(&parsed))?;
    emit(&target.display().to_string())?;
    Ok(())
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Decide(a) => decide(a),
        Command::Plan(a) => plan_cmd(a),
        Command::Metrics { logs, out } => metrics_cmd(logs, out.as_deref()),
        Command::Plot { log, out } => plot_cmd(log, out.as_deref()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
