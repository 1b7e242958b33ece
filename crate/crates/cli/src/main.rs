//! `sglb` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime or data error, 3 a
//! diagnostic check failed.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sglb::data::TargetColumn;

const TUNING_RANGES: &str = "\
Tuning: random search (200 samples) with the following distributions:
  learning-rate          log-uniform distribution over [1e-5, 1]
  l2-leaf-reg            log-uniform distribution over [1e-1, 1e1] for SGB and l2-leaf-reg=0 for SGLB
  depth                  uniform distribution over {6, 7, 8, 9, 10}
  subsample              uniform distribution over [0, 1]
  model-shrink-rate      log-uniform distribution over [1e-5, 1e-2] for SGLB
  diffusion-temperature  log-uniform distribution over [1e2, 1e5] for SGLB
Leaves are plain gradient averages, so l2-leaf-reg is fixed at 0 here.";

#[derive(Parser, Debug)]
#[command(name = "sglb", version, about = "Gradient boosting with Langevin noise over oblivious trees", after_help = TUNING_RANGES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model on a CSV file and save it as JSON.
    #[command(after_help = TUNING_RANGES, allow_negative_numbers = true)]
    Train(TrainArgs),
    /// Print one prediction per input row.
    Predict(PredictArgs),
    /// Print mean loss and 0-1 loss of a model on labelled data.
    Eval(EvalArgs),
    /// Run benchmark suites.
    Bench {
        #[command(subcommand)]
        suite: BenchSuite,
    },
    /// Run structural and statistical self-checks.
    Diagnose(DiagnoseArgs),
    /// Write a synthetic dataset: three N(0,1) features, y = 1{N(sin(x1 x2 x3), 1) > 0}.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Input CSV (comma separated, numeric).
    #[arg(long)]
    data: std::path::PathBuf,
    /// Target column: header name or 0-based index.
    #[arg(long, default_value = "y")]
    target: TargetColumn,
    /// The CSV has no header row.
    #[arg(long)]
    no_header: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Gb,
    Sgb,
    Sglb,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LossArg {
    Sla,
    Logloss,
    Mse,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Optional validation CSV (same layout as --data).
    #[arg(long)]
    valid: Option<std::path::PathBuf>,
    /// Output model path.
    #[arg(long)]
    model: std::path::PathBuf,
    #[arg(long, value_enum, default_value = "sglb")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "sla")]
    loss: LossArg,
    /// Temperature of the smoothed 0-1 loss.
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    sla_sigma: f64,
    /// Learning rate (tuning range: log-uniform over [1e-5, 1]).
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    learning_rate: f64,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    /// Inverse diffusion temperature beta, SGLB only (tuning range: log-uniform over [1e2, 1e5]).
    #[arg(long, default_value_t = 1e3, value_parser = positive_or_inf)]
    diffusion_temperature: f64,
    /// Shrink rate gamma, SGLB only (tuning range: log-uniform over [1e-5, 1e-2]).
    #[arg(long, default_value_t = 1e-3, value_parser = non_negative)]
    model_shrink_rate: f64,
    /// Split-score noise strength.
    #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
    random_strength: f64,
    /// Tree depth (tuning range: uniform over {6..10}).
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u16).range(1..=16))]
    depth: u16,
    /// Maximum borders per feature.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u16).range(1..))]
    border_count: u16,
    /// Bernoulli row sampling rate for SGB/SGLB (tuning range: uniform over [0, 1]).
    #[arg(long, default_value_t = 1.0, value_parser = unit_rate)]
    subsample: f64,
    /// Keep only the iterations up to the best validation loss.
    #[arg(long)]
    use_best_model: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PredictType {
    /// Raw ensemble score.
    Raw,
    /// 1 if the raw score is > 0, else 0.
    Class,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: std::path::PathBuf,
    /// Feature CSV (comma separated, numeric).
    #[arg(long)]
    data: std::path::PathBuf,
    /// Column to drop before predicting (name or 0-based index).
    #[arg(long)]
    target: Option<TargetColumn>,
    #[arg(long)]
    no_header: bool,
    #[arg(long, value_enum, default_value = "raw")]
    predict_type: PredictType,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: std::path::PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Loss to report; defaults to the loss the model was trained with.
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    #[arg(long, value_parser = positive)]
    sla_sigma: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum BenchSuite {
    /// Cross-validated 0-1 loss of Logloss+GB, SLA+GB, SLA+SGB and SLA+SGLB on synthetic data.
    Synthetic(BenchArgs),
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(2..))]
    folds: u32,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
    train_size: u32,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u32).range(1..))]
    test_size: u32,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    /// Master seed (required).
    #[arg(long)]
    seed: u64,
    /// Machine-readable results (JSON lines).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    Projector,
    Pinv,
    Pinfinity,
    Gibbs,
    All,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long, value_enum, default_value = "all")]
    check: Check,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Machine-readable results (JSON lines).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: std::path::PathBuf,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|e| format!("{s:?} is not a number: {e}"))
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a positive finite number, got {v}"))
    }
}

fn positive_or_inf(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a finite number >= 0, got {v}"))
    }
}

fn unit_rate(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1], got {v}"))
    }
}

/// Failure categories mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
    CheckFailed(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<sglb::Error> for Failure {
    fn from(e: sglb::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Eval(a) => commands::eval(a),
        Command::Bench {
            suite: BenchSuite::Synthetic(a),
        } => commands::bench_synthetic(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
    }
}
