//! `sik`: fit, score and evaluate isolation-kernel anomaly detectors.
//!
//! Exit codes: 0 success, 2 argument error, 3 IO error, 4 domain error.
//! Machine-readable run metadata is printed to stdout as JSON; diagnostics go to stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sik_core::eval::{DEFAULT_PSI_GRID, DEFAULT_T};

#[derive(Parser, Debug)]
#[command(name = "sik", version, about = "Isolation-kernel anomaly detection on embedding vectors")]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "SIK_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a hypersphere ensemble and write it as a SIKM model file.
    Fit(FitArgs),
    /// Score a matrix with a fitted model.
    Score(ScoreArgs),
    /// Fit on the train split, score the test split, report AUROC per seed.
    Eval(EvalArgs),
    /// Hyperparameter or contamination sweep.
    Sweep(SweepArgs),
    /// Time SIK against IDK on synthetic data of growing size.
    Bench(BenchArgs),
    /// Generate a labeled synthetic dataset.
    Gen(GenArgs),
    /// Export SIK or IK feature maps as CSV.
    Features(FeaturesArgs),
}

#[derive(Args, Debug)]
struct SeedArg {
    #[arg(long, env = "SIK_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Training matrix (CSV or .sikd).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    psi: usize,
    #[arg(long, default_value_t = DEFAULT_T)]
    t: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Output model path.
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    /// Matrix to score (CSV or .sikd).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "sik")]
    method: String,
    /// Reference matrix for methods that need one (idk).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Score CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Labeled dataset. Without --test it is split: alternate normals train, the rest test.
    #[arg(long)]
    input: PathBuf,
    /// Labeled test set; the whole --input is then used for training.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value = "sik")]
    method: String,
    /// Comma-separated seeds, one run each.
    #[arg(long, value_delimiter = ',', default_values_t = sik_core::eval::DEFAULT_SEEDS)]
    seeds: Vec<u64>,
    /// Report path (.csv, or .jsonl for JSON lines); stdout JSON lines when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    psi: usize,
    #[arg(long, default_value_t = DEFAULT_T)]
    t: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PSI_GRID)]
    psi_grid: Vec<usize>,
    /// t used across the ψ grid.
    #[arg(long, default_value_t = DEFAULT_T)]
    t: usize,
    /// Also sweep t at --fixed-psi.
    #[arg(long, value_delimiter = ',')]
    t_grid: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    fixed_psi: usize,
    /// Contamination ratios; switches to a contamination sweep at --psi.
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
    #[arg(long)]
    psi: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 128)]
    dim: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [4000usize, 8000, 16000])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 128)]
    psi: usize,
    #[arg(long, default_value_t = DEFAULT_T)]
    t: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    normal: usize,
    #[arg(long)]
    anomaly: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    sep: f64,
    #[command(flatten)]
    seed: SeedArg,
    /// Output path (.sikd for binary, otherwise CSV).
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// `sik` (0/1 per partitioning) or `ik` (sphere index, -1 when outside).
    #[arg(long, default_value = "sik")]
    kind: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.threads > 0 {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Fit(args) => commands::fit(args),
        Command::Score(args) => commands::score(args),
        Command::Eval(args) => commands::eval(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Bench(args) => commands::bench(args),
        Command::Gen(args) => commands::gen(args),
        Command::Features(args) => commands::features(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if err.is_broken_pipe() => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
