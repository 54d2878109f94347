//! `polarity` command line: resolve, baseline, eval, gen and dump-ground.
//!
//! Exit codes: 0 on success, 1 for invalid input or arguments, 2 when the
//! engine itself fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use polarity_core::baselines::{run_baseline, BaselineKind};
use polarity_core::harness::io::{format_predictions, write_file};
use polarity_core::harness::report::{baseline_report, evaluation_report, resolve_report};
use polarity_core::harness::{evaluate, generate, load_dataset, load_predictions, write_dataset, ClusterSize, GenSpec, Mode, RunConfig};
use polarity_core::kb::{Dataset, PolarityOrder, ToolId};
use polarity_core::mln::{dump_network, ground, MlnError, DEFAULT_ORACLE_CAP};
use polarity_core::resolve::{resolve, ResolveError};
use polarity_core::rules::{generate_default_rules, parse_rules, RuleSet};
use polarity_core::saturation::instantiate;

#[derive(Debug)]
enum CliError {
    Validation(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn mln_error(e: MlnError) -> CliError {
    match e {
        MlnError::UnknownTool { .. }
        | MlnError::UnknownDocument { .. }
        | MlnError::UnknownRule(_)
        | MlnError::Unsatisfiable(_)
        | MlnError::OverCap { .. }
        | MlnError::InvalidConfig(_) => CliError::Validation(e.to_string()),
        other => CliError::Internal(other.to_string()),
    }
}

fn resolve_error(e: ResolveError) -> CliError {
    match e {
        ResolveError::Mln(m) => mln_error(m),
        ResolveError::InvalidConfig(_) => invalid(e),
        ResolveError::EmptyCluster => CliError::Internal(e.to_string()),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "polarity",
    version,
    about = "Detect and resolve polarity-label inconsistencies across sentiment tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn rule weights, infer marginals and vote within clusters.
    Resolve(ResolveArgs),
    /// Run a majority-voting baseline.
    Baseline(BaselineArgs),
    /// Score a prediction file, or the tools and baselines, against gold.
    Eval(EvalArgs),
    /// Write a synthetic dataset.
    Gen(GenArgs),
    /// Print the ground network as text.
    DumpGround(DumpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Documents CSV (doc_id,cluster_id,gold).
    #[arg(long)]
    docs: PathBuf,
    /// Labels CSV (doc_id,tool_id,polarity).
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// MC-SAT samples, summed over chains.
    #[arg(long, default_value_t = 1000)]
    num_samples: usize,
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    #[arg(long, default_value_t = 0.5)]
    samplesat_sa_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    sa_temperature: f64,
    #[arg(long, default_value_t = 0.2)]
    walksat_noise: f64,
    /// Flip budget per SampleSat call [default: 100 per query atom].
    #[arg(long)]
    max_flips: Option<usize>,
    #[arg(long, default_value_t = 3)]
    chains: usize,
    #[arg(long, default_value_t = 10)]
    learn_iters: usize,
    /// MC-SAT samples per expectation during learning.
    #[arg(long, default_value_t = 300)]
    learn_samples: usize,
    #[arg(long, default_value_t = 1e-4)]
    damping: f64,
    #[arg(long, default_value_t = 1.0)]
    max_step: f64,
    /// Preference among tied polarities, e.g. neg,pos,neu.
    #[arg(long, default_value = "neg,pos,neu")]
    tie_break: PolarityOrder,
    /// Query-atom limit for exact inference per independent component.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    /// Rule file in the rule language; defaults to the built-in rules.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Starting weight of the built-in soft rules.
    #[arg(long, default_value_t = 1.0)]
    init_weight: f64,
}

impl ModelArgs {
    fn config(&self, mode: Mode) -> RunConfig {
        RunConfig {
            seed: self.seed,
            num_samples: self.num_samples,
            burn_in: self.burn_in,
            samplesat_sa_prob: self.samplesat_sa_prob,
            sa_temperature: self.sa_temperature,
            walksat_noise: self.walksat_noise,
            max_flips: self.max_flips,
            chains: self.chains,
            learn_iters: self.learn_iters,
            learn_samples: self.learn_samples,
            damping: self.damping,
            max_step: self.max_step,
            tie_break: self.tie_break,
            rules_file: self.rules.clone(),
            init_weight: self.init_weight,
            mode,
            oracle_cap: self.oracle_cap,
        }
    }
}

#[derive(Args, Debug)]
struct ResolveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Report step-1 argmaxes without the cluster vote.
    #[arg(long)]
    no_step2: bool,
    /// Include wall-clock phase timings (makes reports differ run to run).
    #[arg(long)]
    with_timing: bool,
    /// Also write final labels as doc_id,polarity CSV.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    InTool,
    InterTool,
    Both,
}

impl From<KindArg> for BaselineKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::InTool => BaselineKind::InTool,
            KindArg::InterTool => BaselineKind::InterTool,
            KindArg::Both => BaselineKind::Both,
        }
    }
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Tool for in-tool voting.
    #[arg(long)]
    tool: Option<String>,
    #[arg(long, default_value = "neg,pos,neu")]
    tie_break: PolarityOrder,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write predictions as doc_id,polarity CSV.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Predictions CSV (doc_id,polarity).
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long, default_value = "neg,pos,neu")]
    tie_break: PolarityOrder,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    clusters: usize,
    /// K, or MIN-MAX for uniformly drawn sizes.
    #[arg(long, default_value = "4")]
    cluster_size: ClusterSize,
    /// Comma-separated accuracy per tool; tools are named t0, t1, ...
    #[arg(long, value_delimiter = ',', required = true)]
    accuracies: Vec<f64>,
    /// Gold prior over pos,neg,neu.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0.3333333333333333,0.3333333333333333,0.3333333333333334")]
    prior: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for docs.csv, labels.csv and spec.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    init_weight: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(data: &DataArgs) -> Result<Dataset, CliError> {
    load_dataset(&data.docs, &data.labels).map_err(invalid)
}

fn load_rules(path: Option<&Path>, ds: &Dataset, init_weight: f64) -> Result<RuleSet, CliError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| invalid(format!("cannot read {}: {e}", p.display())))?;
            parse_rules(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))
        }
        None => generate_default_rules(ds.tools(), init_weight).map_err(invalid),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text).map_err(invalid),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

fn render(report: &polarity_core::harness::RunReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    }
}

fn cmd_resolve(a: &ResolveArgs) -> Result<(), CliError> {
    let mode = if a.no_step2 { Mode::Step1Only } else { Mode::Pipeline };
    let cfg = a.model.config(mode);
    cfg.validate().map_err(invalid)?;
    let ds = load(&a.data)?;
    let rules = load_rules(a.model.rules.as_deref(), &ds, a.model.init_weight)?;
    let res = resolve(&ds.without_gold(), &rules, &cfg.resolve_config()).map_err(resolve_error)?;
    if let Some(p) = &a.predictions {
        let text = format_predictions(&res.predictions()).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(p, &text).map_err(invalid)?;
    }
    let report = resolve_report(&ds, &res, &cfg, a.with_timing);
    emit(a.output.out.as_deref(), &render(&report, a.output.format))
}

fn cmd_baseline(a: &BaselineArgs) -> Result<(), CliError> {
    let ds = load(&a.data)?;
    let tool = a.tool.as_deref().map(ToolId::new).transpose().map_err(invalid)?;
    let kind = BaselineKind::from(a.kind);
    let preds = run_baseline(&ds, kind, tool.as_ref(), &a.tie_break).map_err(invalid)?;
    if let Some(p) = &a.predictions {
        let text = format_predictions(&preds).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(p, &text).map_err(invalid)?;
    }
    let cfg = RunConfig {
        seed: a.seed,
        tie_break: a.tie_break,
        mode: Mode::Baseline { baseline: kind, tool },
        ..RunConfig::default()
    };
    let report = baseline_report(&ds, &preds, &cfg);
    emit(a.output.out.as_deref(), &render(&report, a.output.format))
}

fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    let ds = load(&a.data)?;
    let preds = a.predictions.as_deref().map(load_predictions).transpose().map_err(invalid)?;
    let accuracy = preds.as_ref().map(|p| evaluate(&ds, p)).transpose().map_err(invalid)?;
    let cfg = RunConfig {
        tie_break: a.tie_break,
        ..RunConfig::default()
    };
    let report = evaluation_report(&ds, preds.as_ref(), accuracy, &cfg);
    emit(a.output.out.as_deref(), &render(&report, a.output.format))
}

fn cmd_gen(a: &GenArgs) -> Result<(), CliError> {
    let prior: [f64; 3] = a
        .prior
        .as_slice()
        .try_into()
        .map_err(|_| invalid("--prior takes exactly three values (pos,neg,neu)"))?;
    let mut spec = GenSpec::new(a.clusters, a.cluster_size, &a.accuracies, a.seed);
    spec.polarity_prior = prior;
    let ds = generate(&spec).map_err(invalid)?;
    fs::create_dir_all(&a.out).map_err(|e| invalid(format!("cannot create {}: {e}", a.out.display())))?;
    write_dataset(&ds, &a.out.join("docs.csv"), &a.out.join("labels.csv")).map_err(invalid)?;
    let mut json = serde_json::to_string_pretty(&spec).map_err(|e| CliError::Internal(e.to_string()))?;
    json.push('\n');
    write_file(&a.out.join("spec.json"), &json).map_err(invalid)
}

fn cmd_dump(a: &DumpArgs) -> Result<(), CliError> {
    let ds = load(&a.data)?;
    let rules = load_rules(a.rules.as_deref(), &ds, a.init_weight)?;
    let net = ground(&rules, &instantiate(&ds), &ds).map_err(mln_error)?;
    emit(a.out.as_deref(), &dump_network(&net, &net.initial_weights()))
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Resolve(a) => cmd_resolve(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Gen(a) => cmd_gen(a),
        Command::DumpGround(a) => cmd_dump(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Validation(m) => eprintln!("error: {m}"),
                CliError::Internal(m) => eprintln!("internal error: {m}"),
            }
            e.code()
        }
    }
}
