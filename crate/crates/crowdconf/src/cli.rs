//! Command-line surface: `estimate`, `aggregate`, `experiment <name>` and
//! `simulate`. Reports are JSON, plot-ready series are CSV, diagnostics go
//! to stderr. A JSON config file can pre-set any optional flag; explicit
//! flags override it. `CROWDCONF_THREADS` caps internal parallelism
//! (0 = auto).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::aggregation::{weighted_decision, worst_case_accuracy, Selectivity, WorstCaseMode};
use crate::baselines::{em_estimate, majority_estimate, EmConfig};
use crate::diff3::{estimate_three, Diff3Options, IntervalMode};
use crate::diffgen::{search_general, Strategy, StrategyConfig};
use crate::error::{Error, Result};
use crate::extensions::{stratify, with_selectivity_worker, StratifyRule, SELECTIVITY_WORKER};
use crate::model::{
    read_gold_csv, read_responses_csv, read_responses_json, read_task_column_csv, Interval,
    Method, ResponseMatrix, ResponseSet, WorkerEstimate,
};
use crate::report::{
    decisions_csv, estimates_csv, input_digest, to_json_bytes, AggregateReport, DecisionReport,
    EmDiagnostics, EstimateReport, ExperimentSummary, StratumReport, WorkerReport, TOOL_VERSION,
};
use crate::sim::{
    comparison_experiment, coverage_real, coverage_synthetic, decision_error_sweep,
    eviction_threshold_sweep, price_experiment, run_eviction_sim, ComparisonConfig,
    CoverageConfig, EvictionRule, PriceConfig, PriceSweep, SimConfig, WorkerPool,
};

#[derive(Parser)]
#[command(
    name = "crowdconf",
    version,
    about = "Worker error rates with confidence intervals from disagreement alone, \
             weighted answer aggregation, and eviction-policy simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate worker error rates from a responses file
    Estimate(EstimateArgs),
    /// Aggregate task answers using worker error rates
    Aggregate(AggregateArgs),
    /// Run a named experiment, writing CSV plus a JSON summary
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Run one multi-phase eviction scenario and report its costs
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Diff3,
    Diffgen,
    Em,
    Majority,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Linearized,
    Conservative,
}

impl From<ModeArg> for IntervalMode {
    fn from(m: ModeArg) -> IntervalMode {
        match m {
            ModeArg::Linearized => IntervalMode::Linearized,
            ModeArg::Conservative => IntervalMode::Conservative,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Pruning,
    Greedy,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Exhaustive => Strategy::Exhaustive,
            StrategyArg::Pruning => Strategy::Pruning,
            StrategyArg::Greedy => Strategy::Greedy,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Responses file
    #[arg(long)]
    input: PathBuf,
    /// Input format
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Estimator
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Confidence level for intervals, in (0,1)
    #[arg(long, default_value_t = 0.9)]
    confidence: f64,
    /// Interval labeling mode (diff3/diffgen only)
    #[arg(long, value_enum, default_value = "linearized")]
    mode: ModeArg,
    /// Use the large-n approximation for agreement intervals
    #[arg(long, default_value_t = false)]
    approx_intervals: bool,
    /// Partition search strategy (diffgen only)
    #[arg(long, value_enum, default_value = "exhaustive")]
    strategy: StrategyArg,
    /// Peer pruning threshold (strategy pruning only)
    #[arg(long, default_value_t = 0.35)]
    pruning_threshold: f64,
    /// Seed for seeded strategies
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict to these workers (comma-separated ids)
    #[arg(long, value_delimiter = ',')]
    workers: Option<Vec<String>>,
    /// Stratify tasks: "type:<column>" or "difficulty:<threshold>"
    #[arg(long)]
    stratify: Option<String>,
    /// Known task selectivity; injects a constant pseudo-worker
    #[arg(long)]
    selectivity: Option<f64>,
    /// Treat answers as categorical labels: reduce to one binary matrix
    /// per code bit and estimate each (CSV input only)
    #[arg(long, default_value_t = false)]
    categorical: bool,
    /// JSON report output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional per-worker CSV output path
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// JSON config file supplying optional flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EstimateFileConfig {
    confidence: Option<f64>,
    mode: Option<IntervalMode>,
    approx_intervals: Option<bool>,
    strategy: Option<Strategy>,
    pruning_threshold: Option<f64>,
    seed: Option<u64>,
    workers: Option<Vec<String>>,
    stratify: Option<String>,
    selectivity: Option<f64>,
}

/// Effective configuration echoed into estimate reports.
#[derive(Debug, Serialize)]
struct EstimateEffectiveConfig {
    input: String,
    format: &'static str,
    method: &'static str,
    confidence: f64,
    mode: IntervalMode,
    approx_intervals: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<Strategy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pruning_threshold: Option<f64>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stratify: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selectivity: Option<f64>,
    categorical: bool,
}

#[derive(Args)]
struct AggregateArgs {
    /// Responses file
    #[arg(long)]
    input: PathBuf,
    /// Input format
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Estimates report produced by `estimate` (JSON)
    #[arg(long)]
    estimates: Option<PathBuf>,
    /// Inline per-worker error rates in matrix worker order
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    /// Task selectivity prior
    #[arg(long, default_value_t = 0.5)]
    selectivity: f64,
    /// Also compute worst-case accuracy and the combined error bound
    #[arg(long, default_value_t = false)]
    worst_case: bool,
    /// Sign-aware worst case: deflate rates of disagreeing workers
    #[arg(long, default_value_t = false)]
    strict_worst_case: bool,
    /// Restrict to these workers (comma-separated ids)
    #[arg(long, value_delimiter = ',')]
    workers: Option<Vec<String>>,
    /// Decisions CSV output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional JSON report output path
    #[arg(long)]
    report: Option<PathBuf>,
    /// JSON config file supplying optional flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AggregateFileConfig {
    selectivity: Option<f64>,
    worst_case: Option<bool>,
    strict_worst_case: Option<bool>,
    workers: Option<Vec<String>>,
}

#[derive(Debug, Serialize)]
struct AggregateEffectiveConfig {
    input: String,
    format: &'static str,
    rates_source: String,
    selectivity: f64,
    worst_case: bool,
    strict_worst_case: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Interval coverage vs confidence level (synthetic or real data)
    Coverage(CoverageArgs),
    /// Mean estimation error of the differences scheme vs EM and majority
    Table1(Table1Args),
    /// Exact decision error of weighted vs simple majority voting
    Fig3(Fig3Args),
    /// Tasks/workers required for a target worst-case accuracy
    Price(PriceArgs),
    /// Eviction-rule cost comparison over a threshold sweep
    Eviction(EvictionArgs),
}

#[derive(Args)]
struct CoverageArgs {
    /// Monte-Carlo trials
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Workers per trial (3 runs the plain three-worker scheme)
    #[arg(long, default_value_t = 3)]
    workers: usize,
    /// Tasks per synthetic trial
    #[arg(long, default_value_t = 500)]
    tasks: usize,
    /// Confidence grid (comma-separated); default 0.05..0.95 step 0.05
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    /// Lower bound of the synthetic rate range
    #[arg(long, default_value_t = 0.05)]
    rate_lo: f64,
    /// Upper bound of the synthetic rate range
    #[arg(long, default_value_t = 0.45)]
    rate_hi: f64,
    /// Partition search strategy for more than 3 workers
    #[arg(long, value_enum, default_value = "greedy")]
    strategy: StrategyArg,
    /// Which rate the CSV coverage column checks: the true generator rate
    /// or the realized error fraction
    #[arg(long, value_enum, default_value = "proxy")]
    target: CoverageTargetArg,
    /// Real responses file (switches from synthetic to real-data mode)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Gold labels for real-data mode
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CoverageTargetArg {
    True,
    Proxy,
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, default_value_t = 400)]
    tasks: usize,
    #[arg(long, default_value_t = 3)]
    workers: usize,
    /// Monte-Carlo repetitions
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct Fig3Args {
    /// Crew size
    #[arg(long, default_value_t = 9)]
    workers: usize,
    #[arg(long, default_value_t = 0.1)]
    good_rate: f64,
    #[arg(long, default_value_t = 0.3)]
    bad_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    selectivity: f64,
    /// Emit only the row with this many bad workers
    #[arg(long)]
    bad: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PriceArgs {
    /// Sweep dimension
    #[arg(long, value_enum, default_value = "tradeoff")]
    sweep: PriceSweepArg,
    /// Required mean worst-case accuracy bound
    #[arg(long, default_value_t = 0.9)]
    target: f64,
    /// Confidence level (tradeoff sweep)
    #[arg(long, default_value_t = 0.9)]
    confidence: f64,
    /// Confidence grid for workers/tasks sweeps (comma-separated)
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 500)]
    fixed_tasks: usize,
    #[arg(long, default_value_t = 3)]
    fixed_workers: usize,
    /// Worker counts to scan (comma-separated)
    #[arg(long, value_delimiter = ',')]
    worker_grid: Option<Vec<usize>>,
    /// Task counts to scan (comma-separated)
    #[arg(long, value_delimiter = ',')]
    task_grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PriceSweepArg {
    Workers,
    Tasks,
    Tradeoff,
}

impl From<PriceSweepArg> for PriceSweep {
    fn from(s: PriceSweepArg) -> PriceSweep {
        match s {
            PriceSweepArg::Workers => PriceSweep::Workers,
            PriceSweepArg::Tasks => PriceSweep::Tasks,
            PriceSweepArg::Tradeoff => PriceSweep::Tradeoff,
        }
    }
}

#[derive(Args)]
struct EvictionArgs {
    /// Which rules to sweep
    #[arg(long, value_enum, default_value = "both")]
    rule: RuleArg,
    /// Mistaken-eviction cost weight
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Thresholds to sweep (comma-separated); default -0.4..0.4 step 0.05
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 30)]
    phases: usize,
    #[arg(long, default_value_t = 25)]
    tasks: usize,
    #[arg(long, default_value_t = 7)]
    team: usize,
    #[arg(long, default_value_t = 0.35)]
    confidence: f64,
    /// Partition search strategy for the per-phase estimates
    #[arg(long, value_enum, default_value = "greedy")]
    strategy: StrategyArg,
    /// Monte-Carlo runs per (threshold, rule) cell
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    Normal,
    Conservative,
    Both,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 30)]
    phases: usize,
    #[arg(long, default_value_t = 25)]
    tasks: usize,
    #[arg(long, default_value_t = 7)]
    team: usize,
    /// Eviction threshold (may be negative)
    #[arg(long, default_value_t = 0.25)]
    threshold: f64,
    #[arg(long, default_value_t = 0.35)]
    confidence: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Eviction rule
    #[arg(long, value_enum, default_value = "conservative")]
    rule: SimRuleArg,
    #[arg(long, value_enum, default_value = "greedy")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 0.5)]
    selectivity: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    /// JSON report output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file supplying optional flags (may include "pool")
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimRuleArg {
    Normal,
    Conservative,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SimulateFileConfig {
    phases: Option<usize>,
    tasks: Option<usize>,
    team: Option<usize>,
    threshold: Option<f64>,
    confidence: Option<f64>,
    alpha: Option<f64>,
    rule: Option<EvictionRule>,
    strategy: Option<Strategy>,
    selectivity: Option<f64>,
    seed: Option<u64>,
    runs: Option<usize>,
    pool: Option<WorkerPool>,
}

/// Entry point used by the binary.
pub fn run() {
    init_thread_pool();
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let code = match dispatch(&cli, &matches) {
        Ok(()) => 0,
        Err(Error::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("CROWDCONF_THREADS") {
        match value.trim().parse::<usize>() {
            Ok(0) => {} // auto
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => eprintln!("warning: ignoring invalid CROWDCONF_THREADS value '{value}'"),
        }
    }
}

fn dispatch(cli: &Cli, matches: &ArgMatches) -> Result<()> {
    match (&cli.command, matches.subcommand()) {
        (Command::Estimate(args), Some(("estimate", sub))) => run_estimate(args, sub),
        (Command::Aggregate(args), Some(("aggregate", sub))) => run_aggregate(args, sub),
        (Command::Experiment(exp), Some(("experiment", sub))) => match (exp, sub.subcommand()) {
            (ExperimentCommand::Coverage(args), Some(("coverage", _))) => run_coverage(args),
            (ExperimentCommand::Table1(args), Some(("table1", _))) => run_table1(args),
            (ExperimentCommand::Fig3(args), Some(("fig3", _))) => run_fig3(args),
            (ExperimentCommand::Price(args), Some(("price", _))) => run_price(args),
            (ExperimentCommand::Eviction(args), Some(("eviction", _))) => run_eviction(args),
            _ => Err(Error::Usage("unknown experiment".to_string())),
        },
        (Command::Simulate(args), Some(("simulate", sub))) => run_simulate(args, sub),
        _ => Err(Error::Usage("unknown command".to_string())),
    }
}

fn explicit(matches: &ArgMatches, id: &str) -> bool {
    matches.value_source(id) == Some(ValueSource::CommandLine)
}

/// Flag value unless the config file overrides a non-explicit flag.
fn pick<T>(matches: &ArgMatches, id: &str, flag: T, file: Option<T>) -> T {
    if explicit(matches, id) {
        flag
    } else {
        file.unwrap_or(flag)
    }
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(p) => {
            let raw = fs::read(p)?;
            Ok(serde_json::from_slice(&raw)?)
        }
        None => Ok(T::default()),
    }
}

fn write_output(path: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(p, bytes)?;
        }
        None => {
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn write_in_dir(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn load_responses(path: &Path, format: FormatArg) -> Result<(ResponseSet, String)> {
    let raw = fs::read(path)?;
    let digest = input_digest(&raw);
    let set = match format {
        FormatArg::Csv => read_responses_csv(&raw[..])?,
        FormatArg::Json => read_responses_json(&raw[..])?,
    };
    Ok((set, digest))
}

fn matrix_for(set: &ResponseSet, workers: &Option<Vec<String>>) -> Result<ResponseMatrix> {
    match workers {
        Some(ws) => {
            let refs: Vec<&str> = ws.iter().map(String::as_str).collect();
            set.restrict_to(&refs)
        }
        None => set.complete_matrix(),
    }
}

enum StratifySpec {
    Type(String),
    Difficulty(f64),
}

fn parse_stratify(spec: &str) -> Result<StratifySpec> {
    if let Some(col) = spec.strip_prefix("type:") {
        if col.is_empty() {
            return Err(Error::Usage("--stratify type: needs a column name".to_string()));
        }
        Ok(StratifySpec::Type(col.to_string()))
    } else if let Some(thr) = spec.strip_prefix("difficulty:") {
        let threshold: f64 = thr
            .parse()
            .map_err(|_| Error::Usage(format!("invalid difficulty threshold '{thr}'")))?;
        Ok(StratifySpec::Difficulty(threshold))
    } else {
        Err(Error::Usage(format!(
            "invalid --stratify '{spec}': expected type:<column> or difficulty:<threshold>"
        )))
    }
}

/// Difficulty labels from the full sparse response set, before any
/// subsetting: a task is easy when the majority fraction among all workers
/// who attempted it reaches the threshold.
fn difficulty_labels(set: &ResponseSet, threshold: f64) -> Result<Vec<(String, String)>> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(Error::domain(format!(
            "difficulty threshold must be in (0.5, 1], got {threshold}"
        )));
    }
    Ok(set
        .task_vote_counts()
        .into_iter()
        .map(|(task, yes, total)| {
            let majority = yes.max(total - yes) as f64 / total as f64;
            let label = if majority >= threshold { "easy" } else { "hard" };
            (task, label.to_string())
        })
        .collect())
}

fn run_estimate(args: &EstimateArgs, matches: &ArgMatches) -> Result<()> {
    let started = Instant::now();
    let file: EstimateFileConfig = load_config(&args.config)?;

    let method = args.method;
    let confidence = pick(matches, "confidence", args.confidence, file.confidence);
    let mode: IntervalMode = pick(matches, "mode", args.mode.into(), file.mode);
    let approx = pick(matches, "approx_intervals", args.approx_intervals, file.approx_intervals);
    let strategy_kind: Strategy = pick(matches, "strategy", args.strategy.into(), file.strategy);
    let pruning_threshold =
        pick(matches, "pruning_threshold", args.pruning_threshold, file.pruning_threshold);
    let seed = pick(matches, "seed", args.seed, file.seed);
    let workers = pick(matches, "workers", args.workers.clone(), file.workers.map(Some));
    let stratify_spec = pick(matches, "stratify", args.stratify.clone(), file.stratify.map(Some));
    let selectivity = pick(matches, "selectivity", args.selectivity, file.selectivity.map(Some));

    let interval_free = matches!(method, MethodArg::Em | MethodArg::Majority);
    if interval_free {
        for id in ["strategy", "mode", "approx_intervals"] {
            if explicit(matches, id) {
                return Err(Error::Usage(format!(
                    "--{} only applies to interval-based methods (diff3/diffgen)",
                    id.replace('_', "-")
                )));
            }
        }
    }
    if method != MethodArg::Diffgen && explicit(matches, "strategy") {
        return Err(Error::Usage(
            "--strategy only applies to --method diffgen".to_string(),
        ));
    }
    if explicit(matches, "pruning_threshold")
        && !(method == MethodArg::Diffgen && strategy_kind == Strategy::Pruning)
    {
        return Err(Error::Usage(
            "--pruning-threshold only applies to --method diffgen --strategy pruning".to_string(),
        ));
    }

    let strategy = StrategyConfig {
        kind: strategy_kind,
        pruning_threshold,
        seed,
        mode,
        approx_intervals: approx,
    };

    if args.categorical {
        if stratify_spec.is_some() || selectivity.is_some() || workers.is_some() {
            return Err(Error::Usage(
                "--categorical cannot be combined with --stratify, --selectivity or --workers"
                    .to_string(),
            ));
        }
        if args.format != FormatArg::Csv {
            return Err(Error::Usage("--categorical requires CSV input".to_string()));
        }
        return run_estimate_categorical(args, method, confidence, mode, approx, &strategy, started);
    }

    let (set, digest) = load_responses(&args.input, args.format)?;
    let base = matrix_for(&set, &workers)?;

    // inject the selectivity pseudo-worker before stratifying so every
    // stratum keeps the extra column
    let (matrix, declared_rate) = match selectivity {
        Some(s) => {
            let aug = with_selectivity_worker(&base, Selectivity::new(s)?)?;
            (aug.matrix, Some(aug.declared_rate))
        }
        None => (base, None),
    };

    let strata_matrices: Vec<(String, ResponseMatrix)> = match &stratify_spec {
        None => vec![("all".to_string(), matrix)],
        Some(spec) => {
            let parsed = parse_stratify(spec)?;
            let is_difficulty = matches!(parsed, StratifySpec::Difficulty(_));
            let rule = match parsed {
                StratifySpec::Type(col) => {
                    if args.format != FormatArg::Csv {
                        return Err(Error::Usage(
                            "--stratify type:<column> requires CSV input".to_string(),
                        ));
                    }
                    let raw = fs::read(&args.input)?;
                    StratifyRule::ByType(read_task_column_csv(&raw[..], &col)?)
                }
                // difficulty uses the full crowd's votes, before subsetting
                StratifySpec::Difficulty(threshold) => {
                    StratifyRule::ByType(difficulty_labels(&set, threshold)?)
                }
            };
            let result = stratify(&matrix, &rule)?;
            if is_difficulty {
                for expected in ["easy", "hard"] {
                    if !result.strata.contains_key(expected) {
                        eprintln!("note: stratum '{expected}' has no tasks and is omitted");
                    }
                }
            }
            result.strata.into_iter().collect()
        }
    };

    let mut strata = Vec::with_capacity(strata_matrices.len());
    for (label, m) in &strata_matrices {
        let mut stratum = estimate_stratum(label, m, method, confidence, mode, approx, &strategy)?;
        if declared_rate.is_some() {
            for r in &mut stratum.estimates {
                if r.worker == SELECTIVITY_WORKER {
                    r.declared_rate = declared_rate;
                }
            }
        }
        strata.push(stratum);
    }

    let config = EstimateEffectiveConfig {
        input: args.input.display().to_string(),
        format: match args.format {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        },
        method: method_name(method),
        confidence,
        mode,
        approx_intervals: approx,
        strategy: (method == MethodArg::Diffgen).then_some(strategy_kind),
        pruning_threshold: (method == MethodArg::Diffgen && strategy_kind == Strategy::Pruning)
            .then_some(pruning_threshold),
        seed,
        workers,
        stratify: stratify_spec,
        selectivity,
        categorical: false,
    };
    finish_estimate(args, digest, serde_json::to_value(&config)?, strata, started)
}

fn method_name(method: MethodArg) -> &'static str {
    match method {
        MethodArg::Diff3 => "diff3",
        MethodArg::Diffgen => "diffgen",
        MethodArg::Em => "em",
        MethodArg::Majority => "majority",
    }
}

/// Per-matrix estimation shared by the binary and categorical paths.
fn estimate_stratum(
    label: &str,
    m: &ResponseMatrix,
    method: MethodArg,
    confidence: f64,
    mode: IntervalMode,
    approx: bool,
    strategy: &StrategyConfig,
) -> Result<StratumReport> {
    let mut em_diag = None;
    let estimates: Vec<WorkerReport> = match method {
        MethodArg::Diff3 => {
            let opts = Diff3Options::new(confidence, mode, approx)?;
            estimate_three(m, &opts)?
                .estimates
                .iter()
                .map(|e| WorkerReport::from_estimate(e, m, None))
                .collect()
        }
        MethodArg::Diffgen => (0..m.worker_count())
            .map(|w| {
                let outcome = search_general(m, w, strategy, confidence)?;
                Ok(WorkerReport::from_estimate(
                    &outcome.estimate,
                    m,
                    Some(outcome.candidates_considered),
                ))
            })
            .collect::<Result<_>>()?,
        MethodArg::Em => {
            let result = em_estimate(m, &EmConfig { seed: strategy.seed, ..EmConfig::default() })?;
            em_diag = Some(EmDiagnostics::from_result(&result));
            result
                .estimates
                .iter()
                .zip(m.workers())
                .map(|(&p, worker)| {
                    let est = WorkerEstimate::new(worker.clone(), p, None, Method::Em, false, None);
                    WorkerReport::from_estimate(&est, m, None)
                })
                .collect()
        }
        MethodArg::Majority => majority_estimate(m)?
            .iter()
            .zip(m.workers())
            .map(|(&p, worker)| {
                let est =
                    WorkerEstimate::new(worker.clone(), p, None, Method::Majority, false, None);
                WorkerReport::from_estimate(&est, m, None)
            })
            .collect(),
    };
    Ok(StratumReport {
        stratum: label.to_string(),
        tasks: m.task_count(),
        workers: m.workers().to_vec(),
        estimates,
        em: em_diag,
    })
}

/// Categorical answers: reduce to one binary matrix per code bit and
/// estimate each bit as its own stratum.
fn run_estimate_categorical(
    args: &EstimateArgs,
    method: MethodArg,
    confidence: f64,
    mode: IntervalMode,
    approx: bool,
    strategy: &StrategyConfig,
    started: Instant,
) -> Result<()> {
    use crate::extensions::{categorical_reduce, read_categorical_csv, CategoricalScheme};

    let raw = fs::read(&args.input)?;
    let digest = input_digest(&raw);
    let matrix = read_categorical_csv(&raw[..])?;
    let scheme = CategoricalScheme::from_answers(matrix.cells())?;
    let bits = categorical_reduce(&matrix, &scheme)?;

    let mut strata = Vec::with_capacity(bits.len());
    for (bit, m) in bits.iter().enumerate() {
        strata.push(estimate_stratum(&format!("bit{bit}"), m, method, confidence, mode, approx, strategy)?);
    }

    let config = serde_json::json!({
        "input": args.input.display().to_string(),
        "format": "csv",
        "method": method_name(method),
        "confidence": confidence,
        "mode": mode,
        "approx_intervals": approx,
        "strategy": (method == MethodArg::Diffgen).then_some(strategy.kind),
        "seed": strategy.seed,
        "categorical": true,
        "categories": scheme.categories(),
        "bit_count": scheme.bit_count(),
    });
    finish_estimate(args, digest, config, strata, started)
}

fn finish_estimate(
    args: &EstimateArgs,
    digest: String,
    config: serde_json::Value,
    strata: Vec<StratumReport>,
    started: Instant,
) -> Result<()> {
    let report = EstimateReport {
        tool_version: TOOL_VERSION.to_string(),
        input_digest: digest,
        config,
        strata,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    if let Some(csv_path) = &args.csv_out {
        write_output(&Some(csv_path.clone()), estimates_csv(&report.strata).as_bytes())?;
    }
    write_output(&args.out, &to_json_bytes(&report)?)
}

fn run_aggregate(args: &AggregateArgs, matches: &ArgMatches) -> Result<()> {
    let started = Instant::now();
    let file: AggregateFileConfig = load_config(&args.config)?;
    let selectivity_v = pick(matches, "selectivity", args.selectivity, file.selectivity);
    let worst_case = pick(matches, "worst_case", args.worst_case, file.worst_case);
    let strict = pick(matches, "strict_worst_case", args.strict_worst_case, file.strict_worst_case);
    let workers = pick(matches, "workers", args.workers.clone(), file.workers.map(Some));
    let worst_case = worst_case || strict;

    let (set, digest) = load_responses(&args.input, args.format)?;
    let matrix = matrix_for(&set, &workers)?;
    let selectivity = Selectivity::new(selectivity_v)?;

    // per-worker estimates aligned with matrix worker order
    let estimates: Vec<WorkerEstimate> = match (&args.estimates, &args.rates) {
        (Some(_), Some(_)) => {
            return Err(Error::Usage("--estimates and --rates are mutually exclusive".to_string()));
        }
        (None, None) => {
            return Err(Error::Usage("one of --estimates or --rates is required".to_string()));
        }
        (Some(path), None) => {
            let raw = fs::read(path)?;
            let report: EstimateReport = serde_json::from_slice(&raw)?;
            if report.strata.len() != 1 {
                return Err(Error::Consistency(format!(
                    "estimates report has {} strata; aggregate needs an unstratified report",
                    report.strata.len()
                )));
            }
            let stratum = &report.strata[0];
            matrix
                .workers()
                .iter()
                .map(|worker| {
                    let found = stratum
                        .estimates
                        .iter()
                        .find(|e| &e.worker == worker)
                        .ok_or_else(|| {
                            Error::Consistency(format!(
                                "worker '{worker}' has no estimate in the report"
                            ))
                        })?;
                    Ok(WorkerEstimate::new(
                        found.worker.clone(),
                        found.p_hat,
                        found.interval,
                        found.method,
                        found.degenerate,
                        None,
                    ))
                })
                .collect::<Result<_>>()?
        }
        (None, Some(rates)) => {
            if worst_case {
                return Err(Error::Usage(
                    "--worst-case needs interval-carrying estimates; use --estimates".to_string(),
                ));
            }
            if rates.len() != matrix.worker_count() {
                return Err(Error::Consistency(format!(
                    "{} rates supplied for {} workers",
                    rates.len(),
                    matrix.worker_count()
                )));
            }
            rates
                .iter()
                .zip(matrix.workers())
                .map(|(&p, worker)| {
                    WorkerEstimate::new(worker.clone(), p, None, Method::Diff3, false, None)
                })
                .collect()
        }
    };

    let confidence = if worst_case {
        let interval: Interval = estimates
            .first()
            .and_then(|e| e.interval)
            .ok_or_else(|| {
                Error::Consistency("worst-case bounds need estimates with intervals".to_string())
            })?;
        Some(interval.level)
    } else {
        None
    };

    let mut decisions = Vec::with_capacity(matrix.task_count());
    for (t, task) in matrix.tasks().iter().enumerate() {
        let answers = matrix.row(t);
        let decision = if worst_case {
            let mode = if strict { WorstCaseMode::Strict } else { WorstCaseMode::Inflate };
            worst_case_accuracy(answers, &estimates, selectivity, confidence.unwrap(), mode)?
        } else {
            let with_rates: Vec<_> = answers
                .iter()
                .zip(&estimates)
                .map(|(&a, e)| (a, e.p_hat))
                .collect();
            weighted_decision(&with_rates, selectivity)?
        };
        decisions.push(DecisionReport::new(task, &decision));
    }

    let config = AggregateEffectiveConfig {
        input: args.input.display().to_string(),
        format: match args.format {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        },
        rates_source: match (&args.estimates, &args.rates) {
            (Some(p), _) => format!("estimates:{}", p.display()),
            (_, Some(_)) => "inline".to_string(),
            _ => unreachable!(),
        },
        selectivity: selectivity_v,
        worst_case,
        strict_worst_case: strict,
        workers,
    };

    if let Some(report_path) = &args.report {
        let report = AggregateReport {
            tool_version: TOOL_VERSION.to_string(),
            input_digest: digest,
            config: serde_json::to_value(&config)?,
            decisions: decisions.clone(),
            timing_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        write_output(&Some(report_path.clone()), &to_json_bytes(&report)?)?;
    }
    write_output(&args.out, decisions_csv(&decisions).as_bytes())
}

fn default_c_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

fn run_coverage(args: &CoverageArgs) -> Result<()> {
    let started = Instant::now();
    let c_grid = args.c_grid.clone().unwrap_or_else(default_c_grid);
    let cfg = CoverageConfig {
        trials: args.trials,
        workers: args.workers,
        tasks: args.tasks,
        c_grid,
        rate_range: (args.rate_lo, args.rate_hi),
        strategy: StrategyConfig {
            kind: args.strategy.into(),
            seed: args.seed,
            ..StrategyConfig::default()
        },
        seed: args.seed,
    };
    let rows = match (&args.input, &args.gold) {
        (Some(input), Some(gold)) => {
            let (set, _) = load_responses(input, FormatArg::Csv)?;
            let gold = read_gold_csv(fs::read(gold)?.as_slice())?;
            coverage_real(&set, &gold, &cfg)?
        }
        (None, None) => coverage_synthetic(&cfg)?,
        _ => {
            return Err(Error::Usage(
                "real-data coverage needs both --input and --gold".to_string(),
            ));
        }
    };

    let mut csv = String::from("confidence,pairs,covered,coverage\n");
    for row in &rows {
        let covered = match args.target {
            CoverageTargetArg::True => row.covered_true.ok_or_else(|| {
                Error::Usage("--target true is only available for synthetic coverage".to_string())
            })?,
            CoverageTargetArg::Proxy => row.covered_proxy,
        };
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.confidence,
            row.total,
            covered,
            covered as f64 / row.total as f64
        ));
    }
    write_in_dir(&args.out_dir, "coverage.csv", csv.as_bytes())?;

    let config = serde_json::json!({
        "trials": args.trials,
        "workers": args.workers,
        "tasks": args.tasks,
        "c_grid": cfg.c_grid,
        "rate_lo": args.rate_lo,
        "rate_hi": args.rate_hi,
        "strategy": cfg.strategy.kind,
        "target": match args.target { CoverageTargetArg::True => "true", CoverageTargetArg::Proxy => "proxy" },
        "input": args.input.as_ref().map(|p| p.display().to_string()),
        "seed": args.seed,
    });
    let summary = ExperimentSummary {
        tool_version: TOOL_VERSION.to_string(),
        experiment: "coverage".to_string(),
        config,
        results: rows,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_in_dir(&args.out_dir, "coverage_summary.json", &to_json_bytes(&summary)?)
}

fn run_table1(args: &Table1Args) -> Result<()> {
    let started = Instant::now();
    let cfg = ComparisonConfig::new(args.tasks, args.workers, args.reps, args.seed);
    let result = comparison_experiment(&cfg)?;
    let csv = format!(
        "tasks,workers,reps,diff_error,em_error,majority_error\n{},{},{},{},{},{}\n",
        result.tasks, result.workers, result.reps, result.diff_error, result.em_error,
        result.majority_error
    );
    write_in_dir(&args.out_dir, "table1.csv", csv.as_bytes())?;
    let summary = ExperimentSummary {
        tool_version: TOOL_VERSION.to_string(),
        experiment: "table1".to_string(),
        config: serde_json::to_value(&cfg)?,
        results: result,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_in_dir(&args.out_dir, "table1_summary.json", &to_json_bytes(&summary)?)
}

fn run_fig3(args: &Fig3Args) -> Result<()> {
    let started = Instant::now();
    let rows = decision_error_sweep(
        args.workers,
        args.good_rate,
        args.bad_rate,
        Selectivity::new(args.selectivity)?,
    )?;
    let rows: Vec<_> = match args.bad {
        Some(bad) => {
            if bad > args.workers {
                return Err(Error::Usage(format!(
                    "--bad {bad} exceeds the crew size {}",
                    args.workers
                )));
            }
            rows.into_iter().filter(|r| r.bad_workers == bad).collect()
        }
        None => rows,
    };
    let mut csv =
        String::from("bad_workers,total_workers,good_rate,bad_rate,weighted_error,majority_error\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.bad_workers,
            row.total_workers,
            args.good_rate,
            args.bad_rate,
            row.weighted_error,
            row.majority_error
        ));
    }
    write_in_dir(&args.out_dir, "fig3.csv", csv.as_bytes())?;
    let config = serde_json::json!({
        "workers": args.workers,
        "good_rate": args.good_rate,
        "bad_rate": args.bad_rate,
        "selectivity": args.selectivity,
        "bad": args.bad,
    });
    let summary = ExperimentSummary {
        tool_version: TOOL_VERSION.to_string(),
        experiment: "fig3".to_string(),
        config,
        results: rows,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_in_dir(&args.out_dir, "fig3_summary.json", &to_json_bytes(&summary)?)
}

fn run_price(args: &PriceArgs) -> Result<()> {
    let started = Instant::now();
    let defaults = PriceConfig::default();
    let cfg = PriceConfig {
        sweep: args.sweep.into(),
        target_accuracy: args.target,
        confidence: args.confidence,
        confidence_grid: args.c_grid.clone().unwrap_or(defaults.confidence_grid),
        fixed_tasks: args.fixed_tasks,
        fixed_workers: args.fixed_workers,
        worker_grid: args.worker_grid.clone().unwrap_or(defaults.worker_grid),
        task_grid: args.task_grid.clone().unwrap_or(defaults.task_grid),
        reps: args.reps,
        seed: args.seed,
        ..defaults
    };
    let points = price_experiment(&cfg)?;
    let mut csv = String::from("sweep,confidence,workers,tasks,cost,mean_bound,saturated\n");
    let sweep_name = match cfg.sweep {
        PriceSweep::Workers => "workers",
        PriceSweep::Tasks => "tasks",
        PriceSweep::Tradeoff => "tradeoff",
    };
    for p in &points {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            sweep_name, p.confidence, p.workers, p.tasks, p.cost, p.mean_bound, p.saturated
        ));
    }
    write_in_dir(&args.out_dir, "price.csv", csv.as_bytes())?;
    let config = serde_json::json!({
        "sweep": sweep_name,
        "target": cfg.target_accuracy,
        "confidence": cfg.confidence,
        "confidence_grid": cfg.confidence_grid,
        "fixed_tasks": cfg.fixed_tasks,
        "fixed_workers": cfg.fixed_workers,
        "worker_grid": cfg.worker_grid,
        "task_grid": cfg.task_grid,
        "reps": cfg.reps,
        "seed": cfg.seed,
    });
    let summary = ExperimentSummary {
        tool_version: TOOL_VERSION.to_string(),
        experiment: "price".to_string(),
        config,
        results: points,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_in_dir(&args.out_dir, "price_summary.json", &to_json_bytes(&summary)?)
}

fn default_thresholds() -> Vec<f64> {
    (-8..=8).map(|i| i as f64 * 0.05).collect()
}

fn run_eviction(args: &EvictionArgs) -> Result<()> {
    let started = Instant::now();
    let thresholds = args.thresholds.clone().unwrap_or_else(default_thresholds);
    let rules: Vec<EvictionRule> = match args.rule {
        RuleArg::Normal => vec![EvictionRule::Normal],
        RuleArg::Conservative => vec![EvictionRule::Conservative],
        RuleArg::Both => vec![EvictionRule::Normal, EvictionRule::Conservative],
    };
    let base = SimConfig {
        phases: args.phases,
        tasks_per_phase: args.tasks,
        team_size: args.team,
        confidence: args.confidence,
        alpha: args.alpha,
        strategy: StrategyConfig { kind: args.strategy.into(), ..StrategyConfig::default() },
        seed: args.seed,
        runs: args.runs,
        ..SimConfig::default()
    };
    let entries = eviction_threshold_sweep(&base, &thresholds, &rules)?;

    let mut csv = String::from("threshold,rule,mean_cost,mean_c1,mean_c2,evicted_total\n");
    #[derive(Serialize)]
    struct CellSummary {
        threshold: f64,
        rule: EvictionRule,
        mean_cost: f64,
        mean_c1: f64,
        mean_c2: f64,
        evictions_by_rate: Vec<(f64, u64)>,
        subset_dominance_held: bool,
    }
    let mut cells = Vec::with_capacity(entries.len());
    for entry in &entries {
        let rule_name = match entry.rule {
            EvictionRule::Normal => "normal",
            EvictionRule::Conservative => "conservative",
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            entry.threshold,
            rule_name,
            entry.report.mean_cost,
            entry.report.mean_c1,
            entry.report.mean_c2,
            entry.report.evicted_total
        ));
        cells.push(CellSummary {
            threshold: entry.threshold,
            rule: entry.rule,
            mean_cost: entry.report.mean_cost,
            mean_c1: entry.report.mean_c1,
            mean_c2: entry.report.mean_c2,
            evictions_by_rate: entry.report.evictions_by_rate.clone(),
            subset_dominance_held: entry.report.subset_dominance_held,
        });
    }
    write_in_dir(&args.out_dir, "eviction.csv", csv.as_bytes())?;
    let config = serde_json::json!({
        "rules": rules,
        "alpha": args.alpha,
        "thresholds": thresholds,
        "phases": args.phases,
        "tasks": args.tasks,
        "team": args.team,
        "confidence": args.confidence,
        "strategy": base.strategy.kind,
        "runs": args.runs,
        "seed": args.seed,
    });
    let summary = ExperimentSummary {
        tool_version: TOOL_VERSION.to_string(),
        experiment: "eviction".to_string(),
        config,
        results: cells,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_in_dir(&args.out_dir, "eviction_summary.json", &to_json_bytes(&summary)?)
}

fn run_simulate(args: &SimulateArgs, matches: &ArgMatches) -> Result<()> {
    let started = Instant::now();
    let file: SimulateFileConfig = load_config(&args.config)?;
    let rule = if explicit(matches, "rule") {
        match args.rule {
            SimRuleArg::Normal => EvictionRule::Normal,
            SimRuleArg::Conservative => EvictionRule::Conservative,
        }
    } else {
        file.rule.unwrap_or(match args.rule {
            SimRuleArg::Normal => EvictionRule::Normal,
            SimRuleArg::Conservative => EvictionRule::Conservative,
        })
    };
    let strategy_kind = if explicit(matches, "strategy") {
        args.strategy.into()
    } else {
        file.strategy.unwrap_or(args.strategy.into())
    };
    let cfg = SimConfig {
        phases: pick(matches, "phases", args.phases, file.phases),
        tasks_per_phase: pick(matches, "tasks", args.tasks, file.tasks),
        team_size: pick(matches, "team", args.team, file.team),
        pool: file.pool.unwrap_or_else(WorkerPool::standard),
        threshold: pick(matches, "threshold", args.threshold, file.threshold),
        confidence: pick(matches, "confidence", args.confidence, file.confidence),
        alpha: pick(matches, "alpha", args.alpha, file.alpha),
        rule,
        strategy: StrategyConfig { kind: strategy_kind, ..StrategyConfig::default() },
        selectivity: pick(matches, "selectivity", args.selectivity, file.selectivity),
        seed: pick(matches, "seed", args.seed, file.seed),
        runs: pick(matches, "runs", args.runs, file.runs),
    };
    let report = run_eviction_sim(&cfg)?;

    #[derive(Serialize)]
    struct SimulateReport<'a> {
        tool_version: String,
        config: &'a SimConfig,
        report: &'a crate::sim::CostReport,
        timing_ms: f64,
    }
    let out = SimulateReport {
        tool_version: TOOL_VERSION.to_string(),
        config: &cfg,
        report: &report,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_output(&args.out, &to_json_bytes(&out)?)
}
