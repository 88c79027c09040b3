//! `lprx` — decode, simulate, analyze.
//!
//! Exit codes: 0 on success (including a decoded configuration), 2 when
//! the receiver reports a failure (a fractional optimum), 1 on any error.

mod commands;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "lprx", version, about = "Factor-graph LP receiver toolkit")]
struct Cli {
    #[command(subcommand)]
    pub(crate) command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode one instance: a JSON model, or a coded ISI channel observation.
    Decode(DecodeArgs),
    /// Monte-Carlo error-rate sweep of the joint equalizer over an SNR grid.
    Simulate(SimulateArgs),
    /// Convert a rational feasible point to a graph cover and back.
    CoverRoundtrip(CoverArgs),
    /// Per-trial comparison of the LP receiver against sum-product.
    Compare(CompareArgs),
    /// Parse and validate a model file, reporting its basic structure.
    ValidateModel(ValidateArgs),
}

#[derive(Args)]
struct DecodeArgs {
    /// JSON model file (with evidence).
    #[arg(long)]
    pub(crate) model: Option<std::path::PathBuf>,
    /// Parity-check matrix in alist format (requires --taps and --received).
    #[arg(long)]
    pub(crate) alist: Option<std::path::PathBuf>,
    /// Channel taps, comma separated (e.g. 1.0,0.5).
    #[arg(long, value_delimiter = ',')]
    pub(crate) taps: Vec<f64>,
    /// Received samples file: one real per line.
    #[arg(long)]
    pub(crate) received: Option<std::path::PathBuf>,
    /// Noise variance.
    #[arg(long)]
    pub(crate) sigma2: Option<f64>,
    /// SNR in dB (alternative to --sigma2).
    #[arg(long)]
    pub(crate) snr_db: Option<f64>,
    /// LP formulation: vrep, reduced, qtilde or q.
    #[arg(long, default_value = "qtilde")]
    pub(crate) formulation: String,
    /// Enumeration cap for exact formulations and oracles.
    #[arg(long, default_value_t = lprx_core::model::DEFAULT_ENUM_CAP)]
    pub(crate) cap: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Parity-check matrix in alist format.
    #[arg(long)]
    pub(crate) alist: std::path::PathBuf,
    /// Channel taps, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1.0,0.5")]
    pub(crate) taps: Vec<f64>,
    /// SNR grid in dB, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub(crate) snr_db: Vec<f64>,
    /// Trials per SNR point.
    #[arg(long)]
    pub(crate) trials: usize,
    /// Base seed; per-trial streams derive from it.
    #[arg(long)]
    pub(crate) seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub(crate) out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct CoverArgs {
    /// JSON model file.
    #[arg(long)]
    pub(crate) model: std::path::PathBuf,
    /// Rational point file; mutually exclusive with --solve.
    #[arg(long)]
    pub(crate) point: Option<std::path::PathBuf>,
    /// Derive the point by running the relaxation receiver on the model.
    #[arg(long)]
    pub(crate) solve: bool,
    /// Where to write the cover JSON (stdout when omitted).
    #[arg(long)]
    pub(crate) out: Option<std::path::PathBuf>,
    /// Enumeration cap used by the receiver path.
    #[arg(long, default_value_t = lprx_core::model::DEFAULT_ENUM_CAP)]
    pub(crate) cap: u64,
}

#[derive(Args)]
struct CompareArgs {
    /// JSON model file (structure; evidence is redrawn per trial).
    #[arg(long)]
    pub(crate) model: std::path::PathBuf,
    /// Number of trials.
    #[arg(long)]
    pub(crate) trials: usize,
    /// Base seed.
    #[arg(long)]
    pub(crate) seed: u64,
    /// LP formulation to compare against sum-product.
    #[arg(long, default_value = "qtilde")]
    pub(crate) formulation: String,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub(crate) out: Option<std::path::PathBuf>,
    /// Enumeration cap for exact formulations.
    #[arg(long, default_value_t = lprx_core::model::DEFAULT_ENUM_CAP)]
    pub(crate) cap: u64,
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON model file.
    #[arg(long)]
    pub(crate) model: std::path::PathBuf,
    /// Enumeration cap for the behaviour and injectivity reports.
    #[arg(long, default_value_t = lprx_core::model::DEFAULT_ENUM_CAP)]
    pub(crate) cap: u64,
}

fn main() {
    // Bound the worker pool before any parallel work starts.
    if let Ok(threads) = std::env::var("LPRX_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };

    let outcome = match cli.command {
        Command::Decode(args) => commands::decode(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::CoverRoundtrip(args) => commands::cover_roundtrip(args),
        Command::Compare(args) => commands::compare(args),
        Command::ValidateModel(args) => commands::validate_model(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
