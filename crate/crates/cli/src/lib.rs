//! The `judgecal` command-line tool.
//!
//! Every subcommand writes its outputs plus a `manifest.json` into the
//! directory given by `--out`. Exit codes: 0 on success, 1 for invalid input
//! or arguments, 2 when a numeric routine fails.

mod commands;
pub mod manifest;
pub mod settings;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use judgecal_core::{ParamBox, SoftReducer};

use settings::{parse_reals, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] judgecal_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "judgecal", version, about = "Calibrate and aggregate three-way judge votes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit Davidson parameters on labeled votes
    Calibrate(CalibrateArgs),
    /// Aggregate each item's votes into one verdict
    Aggregate(AggregateArgs),
    /// Compare methods over repeated calibration/evaluation splits
    Evaluate(EvaluateArgs),
    /// Mean MAE as a function of calibration-set size
    Sweep(SweepArgs),
    /// Cross-task parameter transfer matrix
    Transfer(TransferArgs),
    /// Leave-one-rater-out comparison against human raters
    Loo(LooArgs),
    /// Generate synthetic votes, labels and true label distributions
    Simulate(SimulateArgs),
    /// Verdict of each method on every tally with n votes
    Regions(RegionsArgs),
    /// MAE of single-order versus balanced vote budgets
    OrderReport(OrderReportArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output directory (created if missing)
    #[arg(long, short)]
    pub out: PathBuf,
    /// JSON file with default settings; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed [env: JUDGECAL_SEED]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Margin smoothing
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Tie smoothing
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitArgs {
    /// Optimizer restarts
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Parameter box as beta_lo,beta_hi,nu_lo,nu_hi,gamma_lo,gamma_hi
    #[arg(long = "box", value_parser = parse_box)]
    pub param_box: Option<ParamBox>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SplitArgs {
    /// Calibration fraction of each split
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Number of random splits
    #[arg(long)]
    pub splits: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SignificanceArgs {
    /// Sign-flip resamples per split
    #[arg(long)]
    pub resamples: Option<usize>,
    /// Significance level for clustering
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Btd,
    Sc,
    SoftSc,
    CiSc,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReducerName {
    Min,
    Mean,
    Product,
}

impl From<ReducerName> for SoftReducer {
    fn from(r: ReducerName) -> Self {
        match r {
            ReducerName::Min => SoftReducer::Minimum,
            ReducerName::Mean => SoftReducer::Mean,
            ReducerName::Product => SoftReducer::Product,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LabeledInput {
    /// Vote records (JSON lines)
    #[arg(long)]
    pub votes: PathBuf,
    /// Gold labels (JSON lines); several raters per item are majority-voted
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: LabeledInput,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub votes: PathBuf,
    #[arg(long, value_enum, default_value = "btd")]
    pub method: MethodName,
    #[arg(long, value_enum, default_value = "mean")]
    pub reducer: ReducerName,
    /// Parameter file written by `calibrate` (required for btd)
    #[arg(long)]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: LabeledInput,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub significance: SignificanceArgs,
    /// Methods to compare, comma-separated
    #[arg(long = "method", value_enum, value_delimiter = ',', default_values = ["btd", "sc"])]
    pub methods: Vec<MethodName>,
    #[arg(long, value_enum, default_value = "mean")]
    pub reducer: ReducerName,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: LabeledInput,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Calibration sizes, comma-separated
    #[arg(long, value_delimiter = ',', default_values = ["20", "40", "60", "80", "100", "200"])]
    pub sizes: Vec<usize>,
}

/// `name=votes.jsonl,labels.jsonl`
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub name: String,
    pub votes: PathBuf,
    pub labels: PathBuf,
}

fn parse_task(text: &str) -> Result<TaskSpec, String> {
    let (name, files) = text
        .split_once('=')
        .ok_or_else(|| "expected name=votes,labels".to_string())?;
    let (votes, labels) = files
        .split_once(',')
        .ok_or_else(|| "expected name=votes,labels".to_string())?;
    if name.is_empty() {
        return Err("task name is empty".into());
    }
    Ok(TaskSpec {
        name: name.to_string(),
        votes: votes.into(),
        labels: labels.into(),
    })
}

fn parse_box(text: &str) -> Result<ParamBox, String> {
    let values = parse_reals::<6>(text)?;
    ParamBox::from_array(values).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// A task as name=votes.jsonl,labels.jsonl; repeat for each task
    #[arg(long = "task", value_parser = parse_task, required = true)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, Args)]
pub struct LooArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Human labels with a rater_id on every line
    #[arg(long)]
    pub ratings: PathBuf,
    /// System predictions (JSON lines)
    #[arg(long)]
    pub predictions: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub items: Option<usize>,
    /// Votes per item
    #[arg(long)]
    pub votes: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Dirichlet concentrations for -1,0,+1
    #[arg(long, value_parser = parse_reals::<3>)]
    pub concentration: Option<[f64; 3]>,
    /// Probability shifted toward the first-shown response
    #[arg(long, allow_hyphen_values = true)]
    pub order_bias: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RegionsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Votes per item
    #[arg(long, default_value_t = 20)]
    pub n: u32,
    /// Parameter files; each adds a btd column
    #[arg(long)]
    pub params: Vec<PathBuf>,
    /// Tie strengths; each adds a btd column with --beta and --gamma
    #[arg(long, value_delimiter = ',')]
    pub nu: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OrderReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: LabeledInput,
    /// Aggregator: btd (needs --params) or sc
    #[arg(long, value_enum, default_value = "btd")]
    pub method: MethodName,
    #[arg(long)]
    pub params: Option<PathBuf>,
}

impl CommonArgs {
    /// Defaults, then the config file, then these flags.
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        if let Some(seed) = self.seed {
            s.seed = Some(seed);
        }
        if let Some(a) = self.alpha {
            s.smoothing.alpha = a;
        }
        if let Some(k) = self.kappa {
            s.smoothing.kappa = k;
        }
        s.resolve_seed()?;
        Ok(s)
    }
}

impl FitArgs {
    fn apply(&self, s: &mut Settings) {
        if let Some(r) = self.restarts {
            s.fit.restarts = r;
        }
        if let Some(b) = self.param_box {
            s.fit.param_box = b;
        }
    }
}

impl SplitArgs {
    fn apply(&self, s: &mut Settings) {
        if let Some(r) = self.ratio {
            s.split.ratio = r;
        }
        if let Some(k) = self.splits {
            s.split.splits = k;
        }
    }
}

impl SignificanceArgs {
    fn apply(&self, s: &mut Settings) {
        if let Some(r) = self.resamples {
            s.significance.resamples = r;
        }
        if let Some(t) = self.tau {
            s.significance.tau = t;
        }
    }
}

impl SimulateArgs {
    fn apply(&self, s: &mut Settings) {
        let g = &mut s.generator;
        if let Some(v) = self.items {
            g.items = v;
        }
        if let Some(v) = self.votes {
            g.votes = v;
        }
        if let Some(v) = self.beta {
            g.beta = v;
        }
        if let Some(v) = self.nu {
            g.nu = v;
        }
        if let Some(v) = self.gamma {
            g.gamma = v;
        }
        if let Some(v) = self.concentration {
            g.concentration = v;
        }
        if let Some(v) = self.order_bias {
            g.order_bias = v;
        }
    }
}

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Calibrate(a) => {
            let mut s = a.common.settings()?;
            a.fit.apply(&mut s);
            commands::calibrate(&a, s)
        }
        Command::Aggregate(a) => {
            let s = a.common.settings()?;
            commands::aggregate(&a, s)
        }
        Command::Evaluate(a) => {
            let mut s = a.common.settings()?;
            a.fit.apply(&mut s);
            a.split.apply(&mut s);
            a.significance.apply(&mut s);
            commands::evaluate(&a, s)
        }
        Command::Sweep(a) => {
            let mut s = a.common.settings()?;
            a.fit.apply(&mut s);
            a.split.apply(&mut s);
            commands::sweep(&a, s)
        }
        Command::Transfer(a) => {
            let mut s = a.common.settings()?;
            a.fit.apply(&mut s);
            a.split.apply(&mut s);
            commands::transfer(&a, s)
        }
        Command::Loo(a) => {
            let s = a.common.settings()?;
            commands::loo(&a, s)
        }
        Command::Simulate(a) => {
            let mut s = a.common.settings()?;
            a.apply(&mut s);
            commands::simulate(&a, s)
        }
        Command::Regions(a) => {
            let s = a.common.settings()?;
            commands::regions(&a, s)
        }
        Command::OrderReport(a) => {
            let s = a.common.settings()?;
            commands::order_report(&a, s)
        }
    }
}
