//! Command-line surface: subcommands, flags, and their conversion into the
//! merged [`RunConfig`] bag.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::execute;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "spsp",
    version,
    about = "Variable selection by partitioning penalized solution paths"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a penalized solution path on a CSV dataset
    Paths(PathsArgs),
    /// Fit a path, partition it, and report the selected variables
    Select(SelectArgs),
    /// Replicated benchmark on a synthetic design, comparing selection rules
    Simulate(SimulateArgs),
    /// Sensitivity of the error rates to the partitioning ratio
    SweepR(SweepArgs),
    /// Rank covariates by absolute correlation with y and keep the top d
    Screen(ScreenArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output directory; created if missing
    #[arg(long, value_name = "DIR")]
    pub output: PathBuf,
    /// JSON file supplying defaults for any option of this subcommand
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Replay a recorded manifest.json byte for byte; only --output may differ
    #[arg(long, value_name = "FILE")]
    pub from_manifest: Option<PathBuf>,
}

/// Penalty-family and solver flags shared by the fitting subcommands.
#[derive(Debug, Args, Default)]
pub struct FitFlags {
    /// Penalty family: lasso, enet, alasso, scad, mcp or ridge
    #[arg(long)]
    pub penalty: Option<String>,
    /// Elastic-net mixing weight on the l1 part, in (0, 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Concavity parameter of the scad penalty (> 2)
    #[arg(long)]
    pub scad_a: Option<f64>,
    /// Concavity parameter of the mcp penalty (> 1)
    #[arg(long)]
    pub mcp_gamma: Option<f64>,
    /// Exponent on the initial-estimate weights of the adaptive lasso
    #[arg(long)]
    pub adaptive_power: Option<f64>,
    /// Number of lambda values on the path
    #[arg(long)]
    pub grid_k: Option<usize>,
    /// Smallest lambda as a fraction of the largest
    #[arg(long)]
    pub min_ratio: Option<f64>,
    /// Coordinate-descent convergence tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sweep budget per lambda before the solver gives up
    #[arg(long)]
    pub max_sweeps: Option<usize>,
}

impl FitFlags {
    fn fill(self, cfg: &mut RunConfig) {
        cfg.penalty = self.penalty;
        cfg.alpha = self.alpha;
        cfg.scad_a = self.scad_a;
        cfg.mcp_gamma = self.mcp_gamma;
        cfg.adaptive_power = self.adaptive_power;
        cfg.grid_k = self.grid_k;
        cfg.min_ratio = self.min_ratio;
        cfg.tol = self.tol;
        cfg.max_sweeps = self.max_sweeps;
    }
}

/// Partition/refit flags shared by `select`, `simulate` and `sweep-r`.
#[derive(Debug, Args, Default)]
pub struct PartitionFlags {
    /// Fixed partitioning ratio; omitted means estimate it from the path
    #[arg(long)]
    pub r: Option<f64>,
    /// Ratio used when the estimate is degenerate
    #[arg(long)]
    pub fallback_r: Option<f64>,
    /// Ridge amount for refits on singular or oversized selected sets
    #[arg(long)]
    pub refit_ridge_lambda: Option<f64>,
}

impl PartitionFlags {
    fn fill(self, cfg: &mut RunConfig) {
        cfg.r = self.r;
        cfg.fallback_r = self.fallback_r;
        cfg.refit_ridge_lambda = self.refit_ridge_lambda;
    }
}

/// Synthetic-design flags shared by `simulate` and `sweep-r`.
#[derive(Debug, Args, Default)]
pub struct DesignFlags {
    /// Benchmark design: m1, m2, m3, m4 or motivating
    #[arg(long)]
    pub design: Option<String>,
    /// Override the number of observations
    #[arg(long)]
    pub n: Option<usize>,
    /// Override the number of covariates
    #[arg(long)]
    pub p: Option<usize>,
    /// Override the noise standard deviation
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Number of independent replicates
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Base seed; replicate r uses seed + r
    #[arg(long)]
    pub seed: Option<u64>,
}

impl DesignFlags {
    fn fill(self, cfg: &mut RunConfig) {
        cfg.design = self.design;
        cfg.n = self.n;
        cfg.p = self.p;
        cfg.sigma = self.sigma;
        cfg.replicates = self.replicates;
        cfg.seed = self.seed;
    }
}

#[derive(Debug, Args)]
pub struct PathsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Input CSV with a header row and a response column named 'y'
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub fit: FitFlags,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Input CSV with a header row and a response column named 'y'
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub fit: FitFlags,
    #[command(flatten)]
    pub partition: PartitionFlags,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub design: DesignFlags,
    #[command(flatten)]
    pub fit: FitFlags,
    #[command(flatten)]
    pub partition: PartitionFlags,
    /// Comma-separated penalty families to fit
    #[arg(long, value_delimiter = ',')]
    pub penalties: Option<Vec<String>>,
    /// Comma-separated selection rules to compare
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Folds for the cross-validation baseline
    #[arg(long)]
    pub folds: Option<usize>,
    /// Extra model-size weight of the extended information criterion
    #[arg(long)]
    pub ebic_gamma: Option<f64>,
    /// Half-subsamples for the stability baseline
    #[arg(long)]
    pub stability_b: Option<usize>,
    /// Selection-frequency threshold for the stability baseline
    #[arg(long)]
    pub stability_pi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub design: DesignFlags,
    #[command(flatten)]
    pub fit: FitFlags,
    #[command(flatten)]
    pub partition: PartitionFlags,
    /// Smallest candidate ratio
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Largest candidate ratio
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Spacing between candidate ratios
    #[arg(long)]
    pub r_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Input CSV with a header row and a response column named 'y'
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Covariates to keep; defaults to floor(n / ln n)
    #[arg(long)]
    pub top_d: Option<usize>,
}

/// Configure the global thread pool from `SPSP_THREADS` before any parallel
/// work starts.  Unset or empty means the library default (all cores).
pub fn init_threads() -> CliResult<()> {
    match std::env::var("SPSP_THREADS") {
        Ok(raw) if !raw.trim().is_empty() => {
            let threads: usize = raw.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "SPSP_THREADS must be a positive integer, got '{raw}'"
                ))
            })?;
            if threads == 0 {
                return Err(CliError::Config(
                    "SPSP_THREADS must be a positive integer, got '0'".to_string(),
                ));
            }
            // building twice is harmless here: tests may call this repeatedly
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Route a parsed command line to its implementation.
pub fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Paths(args) => {
            let mut cfg = RunConfig::default();
            cfg.input = args.input;
            args.fit.fill(&mut cfg);
            execute(
                "paths",
                cfg,
                args.common.config.as_deref(),
                args.common.from_manifest.as_deref(),
                &args.common.output,
            )
        }
        Command::Select(args) => {
            let mut cfg = RunConfig::default();
            cfg.input = args.input;
            args.fit.fill(&mut cfg);
            args.partition.fill(&mut cfg);
            execute(
                "select",
                cfg,
                args.common.config.as_deref(),
                args.common.from_manifest.as_deref(),
                &args.common.output,
            )
        }
        Command::Simulate(args) => {
            let mut cfg = RunConfig::default();
            args.design.fill(&mut cfg);
            args.fit.fill(&mut cfg);
            args.partition.fill(&mut cfg);
            // a single --penalty is shorthand for a one-element list
            if cfg.penalty.is_some() && args.penalties.is_some() {
                return Err(CliError::Config(
                    "use either --penalty or --penalties, not both".to_string(),
                ));
            }
            cfg.penalties = args.penalties.or_else(|| cfg.penalty.take().map(|p| vec![p]));
            cfg.methods = args.methods;
            cfg.folds = args.folds;
            cfg.ebic_gamma = args.ebic_gamma;
            cfg.stability_b = args.stability_b;
            cfg.stability_pi = args.stability_pi;
            execute(
                "simulate",
                cfg,
                args.common.config.as_deref(),
                args.common.from_manifest.as_deref(),
                &args.common.output,
            )
        }
        Command::SweepR(args) => {
            let mut cfg = RunConfig::default();
            args.design.fill(&mut cfg);
            args.fit.fill(&mut cfg);
            args.partition.fill(&mut cfg);
            cfg.r_min = args.r_min;
            cfg.r_max = args.r_max;
            cfg.r_step = args.r_step;
            execute(
                "sweep-r",
                cfg,
                args.common.config.as_deref(),
                args.common.from_manifest.as_deref(),
                &args.common.output,
            )
        }
        Command::Screen(args) => {
            let mut cfg = RunConfig::default();
            cfg.input = args.input;
            cfg.top_d = args.top_d;
            execute(
                "screen",
                cfg,
                args.common.config.as_deref(),
                args.common.from_manifest.as_deref(),
                &args.common.output,
            )
        }
    }
}
