//! Run configuration: flag/config-file merging, validation, and the manifest.
//!
//! Every subcommand folds its inputs into a single [`RunConfig`] bag with the
//! precedence `command-line flags > --config file > built-in defaults`.  After
//! validation the fully resolved configuration (defaults materialised) is
//! written to `manifest.json` in the output directory, minus the output path
//! itself, so that `--from-manifest` reruns reproduce the run byte for byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spsp::{
    DesignName, DesignOverrides, FitOptions, Method, PartitionOptions, PenaltyConfig,
    ADAPTIVE_POWER_DEFAULT, CV_FOLDS_DEFAULT, EBIC_GAMMA_DEFAULT, FALLBACK_R_DEFAULT,
    GRID_K_DEFAULT, MCP_GAMMA_DEFAULT, REFIT_RIDGE_LAMBDA_DEFAULT, SCAD_A_DEFAULT,
    STABILITY_B_DEFAULT, STABILITY_PI_DEFAULT,
};

use crate::error::{CliError, CliResult};

pub const REPLICATES_DEFAULT: usize = 100;
pub const SEED_DEFAULT: u64 = 17;
pub const R_MIN_DEFAULT: f64 = 1.0;
pub const R_MAX_DEFAULT: f64 = 10.0;
pub const R_STEP_DEFAULT: f64 = 0.5;

/// The merged settings bag.  All fields are optional so that "not provided"
/// is distinguishable from an explicit value during merging; resolution fills
/// in defaults and re-serialises the result as the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    // Penalty family and its shape parameters.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scad_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcp_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adaptive_power: Option<f64>,

    // Grid and solver controls.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,

    // Partitioning and refit controls.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refit_ridge_lambda: Option<f64>,

    // Synthetic-benchmark controls.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalties: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ebic_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_pi: Option<f64>,

    // Ratio-sweep controls.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_step: Option<f64>,

    // Screening controls.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_d: Option<usize>,
}

impl RunConfig {
    /// True when any field other than `command` carries a value.  Used to
    /// reject extra flags next to `--from-manifest`.
    pub fn any_field_set(&self) -> bool {
        let RunConfig {
            command: _,
            input,
            penalty,
            alpha,
            scad_a,
            mcp_gamma,
            adaptive_power,
            grid_k,
            min_ratio,
            tol,
            max_sweeps,
            r,
            fallback_r,
            refit_ridge_lambda,
            design,
            n,
            p,
            sigma,
            replicates,
            seed,
            penalties,
            methods,
            folds,
            ebic_gamma,
            stability_b,
            stability_pi,
            r_min,
            r_max,
            r_step,
            top_d,
        } = self;
        input.is_some()
            || penalty.is_some()
            || alpha.is_some()
            || scad_a.is_some()
            || mcp_gamma.is_some()
            || adaptive_power.is_some()
            || grid_k.is_some()
            || min_ratio.is_some()
            || tol.is_some()
            || max_sweeps.is_some()
            || r.is_some()
            || fallback_r.is_some()
            || refit_ridge_lambda.is_some()
            || design.is_some()
            || n.is_some()
            || p.is_some()
            || sigma.is_some()
            || replicates.is_some()
            || seed.is_some()
            || penalties.is_some()
            || methods.is_some()
            || folds.is_some()
            || ebic_gamma.is_some()
            || stability_b.is_some()
            || stability_pi.is_some()
            || r_min.is_some()
            || r_max.is_some()
            || r_step.is_some()
            || top_d.is_some()
    }

    /// Field-wise merge where `self` (flags) wins over `fallback` (config file).
    pub fn merged_over(self, fallback: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(fallback.command),
            input: self.input.or(fallback.input),
            penalty: self.penalty.or(fallback.penalty),
            alpha: self.alpha.or(fallback.alpha),
            scad_a: self.scad_a.or(fallback.scad_a),
            mcp_gamma: self.mcp_gamma.or(fallback.mcp_gamma),
            adaptive_power: self.adaptive_power.or(fallback.adaptive_power),
            grid_k: self.grid_k.or(fallback.grid_k),
            min_ratio: self.min_ratio.or(fallback.min_ratio),
            tol: self.tol.or(fallback.tol),
            max_sweeps: self.max_sweeps.or(fallback.max_sweeps),
            r: self.r.or(fallback.r),
            fallback_r: self.fallback_r.or(fallback.fallback_r),
            refit_ridge_lambda: self.refit_ridge_lambda.or(fallback.refit_ridge_lambda),
            design: self.design.or(fallback.design),
            n: self.n.or(fallback.n),
            p: self.p.or(fallback.p),
            sigma: self.sigma.or(fallback.sigma),
            replicates: self.replicates.or(fallback.replicates),
            seed: self.seed.or(fallback.seed),
            penalties: self.penalties.or(fallback.penalties),
            methods: self.methods.or(fallback.methods),
            folds: self.folds.or(fallback.folds),
            ebic_gamma: self.ebic_gamma.or(fallback.ebic_gamma),
            stability_b: self.stability_b.or(fallback.stability_b),
            stability_pi: self.stability_pi.or(fallback.stability_pi),
            r_min: self.r_min.or(fallback.r_min),
            r_max: self.r_max.or(fallback.r_max),
            r_step: self.r_step.or(fallback.r_step),
            top_d: self.top_d.or(fallback.top_d),
        }
    }
}

/// Read a `RunConfig` from a JSON file (used for both `--config` and
/// `--from-manifest`).
pub fn read_config(path: &Path) -> CliResult<RunConfig> {
    let file = File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

/// Write the resolved configuration as `manifest.json` under `outdir`.
pub fn write_manifest(outdir: &Path, resolved: &RunConfig) -> CliResult<()> {
    let path = outdir.join("manifest.json");
    let file = File::create(&path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, resolved)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Combine flag values, an optional config file and an optional manifest into
/// the effective configuration for `command`.
///
/// With `--from-manifest` the manifest is authoritative: the command must
/// match and no other flag or config file may be supplied, so the rerun
/// cannot silently diverge from the recorded run.
pub fn effective_config(
    command: &str,
    flags: RunConfig,
    config_path: Option<&Path>,
    manifest_path: Option<&Path>,
) -> CliResult<RunConfig> {
    if let Some(mpath) = manifest_path {
        if flags.any_field_set() {
            return Err(CliError::Config(
                "--from-manifest replays a recorded run; only --output may be changed"
                    .to_string(),
            ));
        }
        if config_path.is_some() {
            return Err(CliError::Config(
                "--from-manifest cannot be combined with --config".to_string(),
            ));
        }
        let manifest = read_config(mpath)?;
        match manifest.command.as_deref() {
            Some(c) if c == command => {}
            Some(c) => {
                return Err(CliError::Config(format!(
                    "manifest {} records command '{c}', not '{command}'",
                    mpath.display()
                )))
            }
            None => {
                return Err(CliError::Config(format!(
                    "manifest {} has no 'command' field",
                    mpath.display()
                )))
            }
        }
        return Ok(manifest);
    }

    let mut effective = match config_path {
        Some(cpath) => {
            let file_cfg = read_config(cpath)?;
            if let Some(c) = file_cfg.command.as_deref() {
                if c != command {
                    return Err(CliError::Config(format!(
                        "config {} names command '{c}', not '{command}'",
                        cpath.display()
                    )));
                }
            }
            flags.merged_over(file_cfg)
        }
        None => flags,
    };
    effective.command = Some(command.to_string());
    Ok(effective)
}

/// Parse a penalty-family name plus its shape parameters (falling back to the
/// library defaults) into a [`PenaltyConfig`].
pub fn parse_penalty(name: &str, cfg: &RunConfig) -> CliResult<PenaltyConfig> {
    let penalty = match name {
        "lasso" => PenaltyConfig::Lasso,
        "enet" | "elastic_net" | "elastic-net" => PenaltyConfig::ElasticNet {
            alpha: cfg.alpha.unwrap_or(0.5),
        },
        "alasso" | "adaptive" | "adaptive_lasso" | "adaptive-lasso" => {
            PenaltyConfig::AdaptiveLasso {
                power: cfg.adaptive_power.unwrap_or(ADAPTIVE_POWER_DEFAULT),
            }
        }
        "scad" => PenaltyConfig::Scad {
            a: cfg.scad_a.unwrap_or(SCAD_A_DEFAULT),
        },
        "mcp" => PenaltyConfig::Mcp {
            gamma: cfg.mcp_gamma.unwrap_or(MCP_GAMMA_DEFAULT),
        },
        "ridge" => PenaltyConfig::Ridge,
        other => {
            return Err(CliError::Config(format!(
                "unknown penalty '{other}' (expected lasso, enet, alasso, scad, mcp or ridge)"
            )))
        }
    };
    penalty.validate().map_err(CliError::from)?;
    Ok(penalty)
}

/// Canonical name under which a penalty round-trips through the manifest.
pub fn penalty_name(p: &PenaltyConfig) -> &'static str {
    match p {
        PenaltyConfig::Lasso => "lasso",
        PenaltyConfig::ElasticNet { .. } => "enet",
        PenaltyConfig::AdaptiveLasso { .. } => "alasso",
        PenaltyConfig::Scad { .. } => "scad",
        PenaltyConfig::Mcp { .. } => "mcp",
        PenaltyConfig::Ridge => "ridge",
    }
}

/// Record the shape parameters actually used back into the manifest config so
/// the recorded run does not depend on future default changes.
pub fn materialise_penalty_params(cfg: &mut RunConfig, penalties: &[PenaltyConfig]) {
    for p in penalties {
        match *p {
            PenaltyConfig::ElasticNet { alpha } => cfg.alpha = Some(alpha),
            PenaltyConfig::AdaptiveLasso { power } => cfg.adaptive_power = Some(power),
            PenaltyConfig::Scad { a } => cfg.scad_a = Some(a),
            PenaltyConfig::Mcp { gamma } => cfg.mcp_gamma = Some(gamma),
            PenaltyConfig::Lasso | PenaltyConfig::Ridge => {}
        }
    }
}

/// Parse the requested selection methods, deduplicated in request order.
pub fn parse_methods(names: &[String]) -> CliResult<Vec<Method>> {
    let mut methods: Vec<Method> = Vec::new();
    for name in names {
        let m: Method = name.parse().map_err(CliError::from)?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(CliError::Config("methods list is empty".to_string()));
    }
    Ok(methods)
}

/// Solver options shared by every subcommand that fits paths.
pub fn fit_options(cfg: &RunConfig) -> CliResult<FitOptions> {
    let mut opts = FitOptions::default();
    if let Some(tol) = cfg.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Config(format!(
                "tol must be a positive finite number, got {tol}"
            )));
        }
        opts.tol = tol;
    }
    if let Some(sweeps) = cfg.max_sweeps {
        if sweeps == 0 {
            return Err(CliError::Config("max_sweeps must be at least 1".to_string()));
        }
        opts.max_sweeps = sweeps;
    }
    Ok(opts)
}

/// Grid size and ratio with validation (`min_ratio` stays `None` to pick the
/// shape-dependent default).
pub fn grid_options(cfg: &RunConfig) -> CliResult<(usize, Option<f64>)> {
    let k = cfg.grid_k.unwrap_or(GRID_K_DEFAULT);
    if k < 2 {
        return Err(CliError::Config(format!(
            "grid_k must be at least 2, got {k}"
        )));
    }
    if let Some(ratio) = cfg.min_ratio {
        if !(ratio.is_finite() && ratio > 0.0 && ratio < 1.0) {
            return Err(CliError::Config(format!(
                "min_ratio must lie strictly between 0 and 1, got {ratio}"
            )));
        }
    }
    Ok((k, cfg.min_ratio))
}

/// Partitioning options (fixed ratio override plus the fallback value).
pub fn partition_options(cfg: &RunConfig) -> CliResult<PartitionOptions> {
    let opts = PartitionOptions {
        r: cfg.r,
        fallback_r: cfg.fallback_r.unwrap_or(FALLBACK_R_DEFAULT),
    };
    if let Some(r) = opts.r {
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::Config(format!(
                "r must be a positive finite number, got {r}"
            )));
        }
    }
    if !(opts.fallback_r.is_finite() && opts.fallback_r > 0.0) {
        return Err(CliError::Config(format!(
            "fallback_r must be a positive finite number, got {}",
            opts.fallback_r
        )));
    }
    Ok(opts)
}

pub fn refit_ridge(cfg: &RunConfig) -> CliResult<f64> {
    let lambda = cfg.refit_ridge_lambda.unwrap_or(REFIT_RIDGE_LAMBDA_DEFAULT);
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(CliError::Config(format!(
            "refit_ridge_lambda must be a positive finite number, got {lambda}"
        )));
    }
    Ok(lambda)
}

/// Design name plus size/noise overrides for the synthetic benchmarks.
pub fn design_spec(cfg: &RunConfig) -> CliResult<(DesignName, DesignOverrides)> {
    let name_str = cfg
        .design
        .as_deref()
        .ok_or_else(|| CliError::Config("missing required option: design".to_string()))?;
    let name: DesignName = name_str
        .parse()
        .map_err(|e: spsp::SpspError| CliError::Config(e.to_string()))?;
    let overrides = DesignOverrides {
        n: cfg.n,
        p: cfg.p,
        sigma: cfg.sigma,
    };
    Ok((name, overrides))
}

/// Tuning controls for the benchmark baselines, validated up front.
pub struct TuningControls {
    pub folds: usize,
    pub ebic_gamma: f64,
    pub stability_b: usize,
    pub stability_pi: f64,
}

pub fn tuning_controls(cfg: &RunConfig) -> CliResult<TuningControls> {
    let controls = TuningControls {
        folds: cfg.folds.unwrap_or(CV_FOLDS_DEFAULT),
        ebic_gamma: cfg.ebic_gamma.unwrap_or(EBIC_GAMMA_DEFAULT),
        stability_b: cfg.stability_b.unwrap_or(STABILITY_B_DEFAULT),
        stability_pi: cfg.stability_pi.unwrap_or(STABILITY_PI_DEFAULT),
    };
    if controls.folds < 2 {
        return Err(CliError::Config(format!(
            "folds must be at least 2, got {}",
            controls.folds
        )));
    }
    if !(controls.ebic_gamma.is_finite() && controls.ebic_gamma >= 0.0) {
        return Err(CliError::Config(format!(
            "ebic_gamma must be non-negative, got {}",
            controls.ebic_gamma
        )));
    }
    if controls.stability_b == 0 {
        return Err(CliError::Config("stability_b must be at least 1".to_string()));
    }
    if !(controls.stability_pi > 0.0 && controls.stability_pi <= 1.0) {
        return Err(CliError::Config(format!(
            "stability_pi must lie in (0, 1], got {}",
            controls.stability_pi
        )));
    }
    Ok(controls)
}

/// The candidate-ratio grid for `sweep-r`: `r_min, r_min+r_step, ..  <= r_max`.
pub fn ratio_grid(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let r_min = cfg.r_min.unwrap_or(R_MIN_DEFAULT);
    let r_max = cfg.r_max.unwrap_or(R_MAX_DEFAULT);
    let r_step = cfg.r_step.unwrap_or(R_STEP_DEFAULT);
    if !(r_min.is_finite() && r_min > 0.0) {
        return Err(CliError::Config(format!(
            "r_min must be a positive finite number, got {r_min}"
        )));
    }
    if !(r_max.is_finite() && r_max >= r_min) {
        return Err(CliError::Config(format!(
            "r_max must be finite and at least r_min ({r_min}), got {r_max}"
        )));
    }
    if !(r_step.is_finite() && r_step > 0.0) {
        return Err(CliError::Config(format!(
            "r_step must be a positive finite number, got {r_step}"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let value = r_min + r_step * i as f64;
        if value > r_max + 1e-9 {
            break;
        }
        grid.push(value);
        i += 1;
    }
    Ok(grid)
}
