//! Command-line front end. Every command writes its tables and a `manifest.json`
//! into `--out-dir`.

pub mod commands;

use crate::error::Result;
use crate::inflation::{Scheme, WellVariant};
use crate::io::RunManifest;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

pub use commands::{
    cmd_complexity_sweep, cmd_eig_fd, cmd_eig_qsim, cmd_hybrid, cmd_well_overlap, log_log_slope, trial_function,
};

/// Environment variable that caps the worker pool.
pub const THREADS_ENV: &str = "SPECTRALDIFF_THREADS";

#[derive(Debug, Parser)]
#[command(name = "spectraldiff", version, about = "Smallest-eigenvalue estimation for elliptic operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble the finite-difference matrix and solve it classically.
    EigFd(EigFdArgs),
    /// Simulated threshold-projector estimation of the ground energy.
    EigQsim(EigQsimArgs),
    /// Analytic test-function overlaps on the flat wells, swept over `r`.
    WellOverlap(WellOverlapArgs),
    /// Spectrum and overlaps of the two-field hybrid model.
    Hybrid(HybridArgs),
    /// Oracle-call counts against `1/eps`, with log-log slopes.
    ComplexitySweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialArg {
    Gaussian,
    Sine,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EigFdArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub n_gr: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EigQsimArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Estimator configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = TrialArg::Gaussian)]
    pub trial: TrialArg,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run on this fixed grid instead of choosing one from `eps`.
    #[arg(long)]
    pub n_gr: Option<usize>,
    /// Number of consecutive seeds, starting at the config seed.
    #[arg(long)]
    pub batch_seeds: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WellOverlapArgs {
    #[arg(long)]
    pub variant: WellVariant,
    #[arg(long, default_value_t = 0.05)]
    pub r_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 391)]
    pub steps: usize,
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HybridArgs {
    /// Hybrid model JSON; the reference parameters when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub scale: f64,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value = "weighted")]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 1.0)]
    pub mpl: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated target accuracies.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps_list: Vec<f64>,
    /// Grid of the fixed-matrix runs.
    #[arg(long, default_value_t = 31)]
    pub n_gr: usize,
    #[arg(long, value_enum, default_value_t = TrialArg::Gaussian)]
    pub trial: TrialArg,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(cli: &Cli) -> Result<RunManifest> {
    match &cli.command {
        Command::EigFd(a) => cmd_eig_fd(a),
        Command::EigQsim(a) => cmd_eig_qsim(a),
        Command::WellOverlap(a) => cmd_well_overlap(a),
        Command::Hybrid(a) => cmd_hybrid(a),
        Command::ComplexitySweep(a) => cmd_complexity_sweep(a),
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`]; unset or `0` leaves the default.
pub fn init_thread_pool() -> Result<()> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|e| crate::Error::Config(format!("{THREADS_ENV}={s:?}: {e}")))?,
        Err(_) => 0,
    };
    if n > 0 {
        // a second initialization (tests) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
