//! `tmcm`: solve energy files, run synthetic sweeps, denoise, stereo and audit.
//!
//! Exit codes: 0 success, 1 bad input or flags, 2 internal error, 3 audit
//! found a violated bound.

mod commands;

use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "tmcm",
    version,
    about = "Range-expansion minimizer for truncated max-of-convex energies"
)]
pub struct Cli {
    /// Worker threads for independent instances (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize a model stored as an energy file.
    Solve(SolveArgs),
    /// Average final energies over seeded lattice instances per interval length.
    Synthetic(SyntheticArgs),
    /// Denoise or inpaint a gray image with one clique per segment.
    Denoise(DenoiseArgs),
    /// Disparity labeling of a rectified image pair.
    Stereo(StereoArgs),
    /// Compare solver output with brute force and the multiplicative bound.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// `linear`, `quadratic` or `table:v0,v1,...`.
    #[arg(long, default_value = "linear")]
    pub dist: String,
    /// Truncation M.
    #[arg(long, default_value_t = 5)]
    pub truncation: u64,
    /// Pairs m charged per clique.
    #[arg(long, default_value_t = 1)]
    pub max_pairs: usize,
    /// Clique weight.
    #[arg(long, default_value_t = 5)]
    pub weight: u64,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Interval length h'; defaults to the bound-balancing length.
    #[arg(long)]
    pub interval_len: Option<usize>,
    /// `constant` (all label 1) or `unary-argmin`.
    #[arg(long, default_value = "constant")]
    pub init: String,
    /// Starting labeling file; overrides --init.
    #[arg(long)]
    pub init_labeling: Option<std::path::PathBuf>,
    /// Stop after this many sweeps.
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    /// Recorded in logs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub model: std::path::PathBuf,
    /// Labeling output, one label per line.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Per-interval CSV log.
    #[arg(long)]
    pub log: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 30)]
    pub side: usize,
    #[arg(long, default_value_t = 8)]
    pub labels: usize,
    /// Clique window edge; every window position is a clique.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 1)]
    pub unary_lo: u64,
    #[arg(long, default_value_t = 100)]
    pub unary_hi: u64,
    #[command(flatten)]
    pub dist: DistArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    /// Comma-separated interval lengths; defaults to 1 and the balancing length.
    #[arg(long, value_delimiter = ',')]
    pub interval_len: Vec<usize>,
    /// CSV output; standard output when omitted.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub image: std::path::PathBuf,
    /// Integer raster; equal values form one clique.
    #[arg(long)]
    pub segmentation: std::path::PathBuf,
    /// Pixels with mask value 0 are unobserved.
    #[arg(long)]
    pub mask: Option<std::path::PathBuf>,
    /// Intensity step between consecutive labels.
    #[arg(long, default_value_t = 1)]
    pub label_stride: u16,
    #[command(flatten)]
    pub dist: DistArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output PGM.
    #[arg(long)]
    pub out: std::path::PathBuf,
    #[arg(long)]
    pub log: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct StereoArgs {
    #[arg(long)]
    pub left: std::path::PathBuf,
    #[arg(long)]
    pub right: std::path::PathBuf,
    #[arg(long)]
    pub segmentation: std::path::PathBuf,
    #[arg(long, default_value_t = 15)]
    pub max_disparity: usize,
    /// Gray levels per disparity step in the output image.
    #[arg(long, default_value_t = 16)]
    pub gray_scale: u16,
    #[command(flatten)]
    pub dist: DistArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: std::path::PathBuf,
    #[arg(long)]
    pub log: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Audit one energy file instead of random tiny models.
    #[arg(long)]
    pub model: Option<std::path::PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub max_vars: usize,
    #[arg(long, default_value_t = 5)]
    pub max_labels: usize,
    #[arg(long, default_value_t = 4)]
    pub max_clique: usize,
    #[arg(long, default_value_t = 3)]
    pub max_cliques: usize,
    /// Largest m drawn for random models.
    #[arg(long, default_value_t = 2)]
    pub max_pairs: usize,
    /// Comma-separated truncations drawn for random models.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub truncation: Vec<u64>,
    #[arg(long, default_value = "linear")]
    pub dist: String,
    /// Interval length; defaults to each model's balancing length.
    #[arg(long)]
    pub interval_len: Option<usize>,
    /// Largest number of labelings brute force may enumerate.
    #[arg(long, default_value_t = tmcm::oracle::DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let flags = commands::flag_lines(&matches);
    match commands::dispatch(cli.command, &flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
