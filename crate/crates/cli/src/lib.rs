// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `kscpd` command line.
//!
//! Every JSON document written by the tool carries `schema_version`. Errors
//! go to stderr as `{"schema_version": 1, "error": {"kind", "message", ..}}`
//! with exit code 2 for usage errors and 1 otherwise.

#![forbid(unsafe_code)]

pub mod config;
pub mod error;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use kscpd_core::evaluation::{
    RunReport, SamplePolicy, Scenario, ScenarioSpec, generate, monte_carlo::replicate_rng,
    run_monte_carlo,
};
use kscpd_core::io::{Format, emit, ingest};
use kscpd_core::selection::{AutoOutcome, PenaltyConfig, default_lambda, detect_auto};
use kscpd_core::{ChangePoint, Dataset, Segmentation, SplitMode, update_merge};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use config::{Method, RunArgs, RunConfig};
pub use error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
/// Default worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "KSCPD_THREADS";
/// How reported change points are to be read.
pub const CONVENTION: &str = "last index of the left segment; the distribution changes at b + 1";

#[derive(Parser, Debug)]
#[command(
    name = "kscpd",
    version,
    about = "Nonparametric change-point detection with the CUSUM Kolmogorov-Smirnov statistic",
    after_help = "A reported change point b is the last time index of the left segment."
)]
pub struct Cli {
    /// Worker threads [default: all cores].
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Detect change points in a data file and write a JSON report.
    Detect(DetectArgs),
    /// Run a Monte Carlo benchmark on a simulation scenario.
    Bench(BenchArgs),
    /// Draw one dataset from a simulation scenario.
    Generate(GenerateArgs),
    /// Merge two candidate sets with the penalised sum-of-squares test.
    Merge(MergeArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Data file: long CSV (`t,value`) or ragged JSON.
    #[arg(long, short)]
    pub input: PathBuf,
    /// long-csv or ragged-json [default: from the file extension].
    #[arg(long)]
    pub format: Option<Format>,
}

impl InputArgs {
    fn load(&self) -> CliResult<(Dataset, Format)> {
        let format = self.format.unwrap_or_else(|| Format::from_path(&self.input));
        let data = ingest(&self.input, format).map_err(|e| match e {
            kscpd_core::Error::Io(source) => CliError::io(&self.input, source),
            e => CliError::Core(e),
        })?;
        Ok((data, format))
    }
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Report path [default: stdout].
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ScenarioArgs {
    /// Scenario id, 2 to 5.
    #[arg(long, value_parser = parse_scenario, required_unless_present = "spec")]
    pub scenario: Option<Scenario>,
    /// JSON scenario spec file (for example a custom scenario).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["scenario", "length", "n"])]
    pub spec: Option<PathBuf>,
    /// Series length.
    #[arg(long = "T", value_name = "T", default_value_t = 1000)]
    pub length: usize,
    /// Observations per time: `5`, `const:5` or `poisson:5`.
    #[arg(long, default_value = "1")]
    pub n: SamplePolicy,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    Scenario::from_id(s).map_err(|e| e.to_string())
}

impl ScenarioArgs {
    fn spec(&self) -> CliResult<ScenarioSpec> {
        let spec = match (&self.spec, &self.scenario) {
            (Some(path), _) => serde_json::from_str(&read_text(path)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            (None, Some(scenario)) => {
                ScenarioSpec::new(scenario.clone(), self.length).with_policy(self.n)
            }
            (None, None) => return Err(CliError::Usage("need --scenario or --spec".into())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[command(flatten)]
    pub run: RunArgs,
    /// JSON report path [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    /// Per-replicate CSV path.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// The dataset equals replicate 0 of `bench` with the same seed
    /// [default: the spec's seed, else 0].
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "long-csv")]
    pub format: Format,
    /// Data path [default: stdout].
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write the true change points as JSON here.
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MergeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// First point set: a JSON array of times or a report with `change_points`.
    #[arg(long, value_name = "FILE")]
    pub first: PathBuf,
    /// Second point set, same format.
    #[arg(long, value_name = "FILE")]
    pub second: PathBuf,
    /// Penalty [default: 2 ln(n_total) / 3].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Report path [default: stdout].
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return 0;
        }
        Err(e) => return report_error(&CliError::Usage(e.render().to_string().trim().to_owned())),
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &CliError) -> i32 {
    eprintln!("{}", e.to_json());
    e.exit_code()
}

pub fn run(cli: Cli) -> CliResult<()> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be >= 1".into())),
        t => t.unwrap_or(0),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Detect(args) => detect(&args),
        Command::Bench(args) => bench(&args),
        Command::Generate(args) => generate_cmd(&args),
        Command::Merge(args) => merge(&args),
    })
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[derive(Serialize)]
struct DetectReport<'a> {
    schema_version: u32,
    command: &'static str,
    input: String,
    format: Format,
    #[serde(rename = "T")]
    length: usize,
    n_total: usize,
    method: &'static str,
    parameters: &'a RunConfig,
    seed: u64,
    convention: &'static str,
    change_points: Vec<usize>,
    /// Window and statistic behind each change point.
    points: &'a [ChangePoint],
    #[serde(skip_serializing_if = "Option::is_none")]
    selection: Option<SelectionSummary<'a>>,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct SelectionSummary<'a> {
    split: SplitMode,
    penalty: &'a PenaltyConfig,
    #[serde(flatten)]
    outcome: &'a AutoOutcome,
}

fn detect(args: &DetectArgs) -> CliResult<()> {
    let (data, format) = args.input.load()?;
    let config = args.run.resolve()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = Instant::now();
    let (seg, auto) = match config.method {
        Method::NwbsAuto => {
            let det = detect_auto(&data, &config.auto_config(), &mut rng)?;
            (det.segmentation.clone(), Some(det))
        }
        _ => (config.detector()?.run(&data, &mut rng)?, None),
    };
    let wall_time_ms = elapsed_ms(start);
    let report = DetectReport {
        schema_version: SCHEMA_VERSION,
        command: "detect",
        input: args.input.input.display().to_string(),
        format,
        length: data.len(),
        n_total: data.total(),
        method: config.method.name(),
        parameters: &config,
        seed: config.seed,
        convention: CONVENTION,
        change_points: seg.times(),
        points: seg.change_points(),
        selection: auto.as_ref().map(|d| SelectionSummary {
            split: d.split,
            penalty: &d.penalty,
            outcome: &d.outcome,
        }),
        wall_time_ms,
    };
    write_out(args.output.as_deref(), &to_json(&report))
}

#[derive(Serialize)]
struct BenchReport<'a> {
    schema_version: u32,
    command: &'static str,
    method: &'static str,
    parameters: &'a RunConfig,
    #[serde(flatten)]
    report: &'a RunReport,
}

const CSV_HEADER: [&str; 14] = [
    "scenario",
    "T",
    "n_policy",
    "method",
    "seed",
    "replicate",
    "true_k",
    "est_k",
    "abs_k_error",
    "d_est_given_true",
    "d_true_given_est",
    "change_points",
    "failure",
    "wall_time_ms",
];

fn policy_label(p: &SamplePolicy) -> String {
    match p {
        SamplePolicy::Constant(n) => format!("const:{n}"),
        SamplePolicy::Poisson(m) => format!("poisson:{m}"),
    }
}

/// One row per replicate.
pub fn bench_csv(report: &RunReport, method: &str) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &report.replicates {
        let points: Vec<String> = r.change_points.iter().map(usize::to_string).collect();
        w.write_record([
            report.spec.scenario.id().to_owned(),
            report.spec.length.to_string(),
            policy_label(&report.spec.n_policy),
            method.to_owned(),
            report.seed.to_string(),
            r.index.to_string(),
            r.true_k.to_string(),
            r.est_k.to_string(),
            r.abs_k_error.to_string(),
            r.d_est_given_true.to_string(),
            r.d_true_given_est.to_string(),
            points.join(" "),
            r.failure.clone().unwrap_or_default(),
            format!("{:.3}", r.wall_time_ms),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn bench(args: &BenchArgs) -> CliResult<()> {
    let config = args.run.resolve()?;
    let spec = args.scenario.spec()?.with_seed(config.seed);
    let detector = config.detector()?;
    let report = run_monte_carlo(&spec, &detector, args.reps, config.seed)?;
    if let Some(path) = &args.csv {
        let text = bench_csv(&report, config.method.name())?;
        fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    }
    let doc = BenchReport {
        schema_version: SCHEMA_VERSION,
        command: "bench",
        method: config.method.name(),
        parameters: &config,
        report: &report,
    };
    write_out(args.json.as_deref(), &to_json(&doc))
}

#[derive(Serialize)]
struct Truth<'a> {
    schema_version: u32,
    spec: &'a ScenarioSpec,
    seed: u64,
    convention: &'static str,
    change_points: &'a [usize],
}

fn generate_cmd(args: &GenerateArgs) -> CliResult<()> {
    let spec = args.scenario.spec()?;
    let seed = args.seed.unwrap_or(spec.seed);
    let spec = spec.with_seed(seed);
    let mut rng = replicate_rng(seed, 0);
    let (data, truth) = generate(&spec, &mut rng)?;
    if let Some(path) = &args.truth {
        let doc = Truth {
            schema_version: SCHEMA_VERSION,
            spec: &spec,
            seed,
            convention: CONVENTION,
            change_points: &truth,
        };
        fs::write(path, to_json(&doc)).map_err(|e| CliError::io(path, e))?;
    }
    let mut text = emit(&data, args.format)?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    write_out(args.output.as_deref(), &text)
}

/// A bare array of times, or any object with a `change_points` array of
/// times or of `{"time": ..}` records.
#[derive(Deserialize)]
#[serde(untagged)]
enum PointSet {
    Times(Vec<usize>),
    Report { change_points: Vec<Value> },
}

pub fn read_point_set(path: &Path) -> CliResult<Segmentation> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let set: PointSet = serde_json::from_str(&read_text(path)?).map_err(|_| {
        bad("expected an array of times or an object with `change_points`".into())
    })?;
    let times = match set {
        PointSet::Times(t) => t,
        PointSet::Report { change_points } => change_points
            .iter()
            .map(|v| {
                v.as_u64()
                    .or_else(|| v.get("time").and_then(Value::as_u64))
                    .map(|t| t as usize)
                    .ok_or_else(|| bad(format!("not a time: {v}")))
            })
            .collect::<CliResult<_>>()?,
    };
    Ok(Segmentation::from_times(times))
}

#[derive(Serialize)]
struct MergeReport<'a> {
    schema_version: u32,
    command: &'static str,
    lambda: f64,
    first: Vec<usize>,
    second: Vec<usize>,
    convention: &'static str,
    change_points: Vec<usize>,
    #[serde(flatten)]
    outcome: &'a kscpd_core::selection::MergeOutcome,
}

fn merge(args: &MergeArgs) -> CliResult<()> {
    let (data, _) = args.input.load()?;
    let first = read_point_set(&args.first)?;
    let second = read_point_set(&args.second)?;
    let lambda = args.lambda.unwrap_or_else(|| default_lambda(data.total()));
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(CliError::Config(format!("lambda must be positive, got {lambda}")));
    }
    let outcome = update_merge(&data, &first, &second, lambda)?;
    let report = MergeReport {
        schema_version: SCHEMA_VERSION,
        command: "merge",
        lambda,
        first: first.times(),
        second: second.times(),
        convention: CONVENTION,
        change_points: outcome.segmentation.times(),
        outcome: &outcome,
    };
    write_out(args.output.as_deref(), &to_json(&report))
}
