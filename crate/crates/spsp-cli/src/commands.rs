//! Subcommand implementations.  Each function takes the effective
//! configuration plus an output directory, runs the computation, writes the
//! fixed set of output files, and records the fully resolved configuration
//! as `manifest.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use spsp::export;
use spsp::{
    build_design, default_min_ratio, fit_path_with, make_lambda_grid, run_experiment, sis_screen,
    spsp_partition, sweep_r, Dataset, DesignSpec, ExperimentOptions, FitOptions, Method,
    PenaltyConfig, refit,
};

use crate::config::{
    design_spec, effective_config, fit_options, grid_options, materialise_penalty_params,
    parse_methods, parse_penalty, partition_options, penalty_name, ratio_grid, refit_ridge,
    tuning_controls, write_manifest, RunConfig, TuningControls, REPLICATES_DEFAULT, SEED_DEFAULT,
    R_MAX_DEFAULT, R_MIN_DEFAULT, R_STEP_DEFAULT,
};
use crate::error::{CliError, CliResult};
use crate::input::{read_csv, InputData};

/// Merge, validate, dispatch.  Entry point shared by `main` and the tests.
pub fn execute(
    command: &str,
    flags: RunConfig,
    config_path: Option<&Path>,
    manifest_path: Option<&Path>,
    outdir: &Path,
) -> CliResult<()> {
    let cfg = effective_config(command, flags, config_path, manifest_path)?;
    std::fs::create_dir_all(outdir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", outdir.display())))?;
    match command {
        "paths" => cmd_paths(&cfg, outdir),
        "select" => cmd_select(&cfg, outdir),
        "simulate" => cmd_simulate(&cfg, outdir),
        "sweep-r" => cmd_sweep_r(&cfg, outdir),
        "screen" => cmd_screen(&cfg, outdir),
        other => Err(CliError::Config(format!("unknown command '{other}'"))),
    }
}

fn create_out(outdir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = outdir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>) -> CliResult<()> {
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn require_input(cfg: &RunConfig) -> CliResult<PathBuf> {
    cfg.input
        .clone()
        .ok_or_else(|| CliError::Config("missing required option: input".to_string()))
}

/// Everything `paths` and `select` share: the parsed data, the fitted path,
/// and the resolved settings that produced it.
struct FittedInput {
    input_path: PathBuf,
    input: InputData,
    data: Dataset,
    penalty: PenaltyConfig,
    grid_k: usize,
    min_ratio: f64,
    fit: FitOptions,
    path: spsp::CoefficientPath,
}

fn fit_from_input(cfg: &RunConfig) -> CliResult<FittedInput> {
    let input_path = require_input(cfg)?;
    let input = read_csv(&input_path)?;
    let data = Dataset::standardize(&input.x, &input.y)?;
    let penalty = parse_penalty(cfg.penalty.as_deref().unwrap_or("lasso"), cfg)?;
    let (grid_k, min_ratio_opt) = grid_options(cfg)?;
    let fit = fit_options(cfg)?;
    let min_ratio = min_ratio_opt.unwrap_or_else(|| default_min_ratio(data.n(), data.p()));
    let grid = make_lambda_grid(&data, &penalty, grid_k, Some(min_ratio))?;
    let path = fit_path_with(&data, &grid, &penalty, &fit)?;
    Ok(FittedInput {
        input_path,
        input,
        data,
        penalty,
        grid_k,
        min_ratio,
        fit,
        path,
    })
}

/// Resolved settings common to `paths` and `select`, ready for the manifest.
fn canonical_fit_config(command: &str, f: &FittedInput) -> RunConfig {
    let mut out = RunConfig {
        command: Some(command.to_string()),
        input: Some(f.input_path.clone()),
        penalty: Some(penalty_name(&f.penalty).to_string()),
        grid_k: Some(f.grid_k),
        min_ratio: Some(f.min_ratio),
        tol: Some(f.fit.tol),
        max_sweeps: Some(f.fit.max_sweeps),
        ..RunConfig::default()
    };
    materialise_penalty_params(&mut out, std::slice::from_ref(&f.penalty));
    out
}

fn cmd_paths(cfg: &RunConfig, outdir: &Path) -> CliResult<()> {
    let fitted = fit_from_input(cfg)?;

    let mut w = create_out(outdir, "paths.csv")?;
    export::write_path_csv(&mut w, &fitted.path, &fitted.data, &fitted.input.names)?;
    finish(w)?;
    let mut w = create_out(outdir, "paths_meta.json")?;
    export::write_path_meta(&mut w, &fitted.path, &fitted.data)?;
    finish(w)?;

    write_manifest(outdir, &canonical_fit_config("paths", &fitted))
}

fn cmd_select(cfg: &RunConfig, outdir: &Path) -> CliResult<()> {
    let fitted = fit_from_input(cfg)?;
    let part_opts = partition_options(cfg)?;
    let ridge_lambda = refit_ridge(cfg)?;

    let part = spsp_partition(&fitted.path.abs_rows(), &part_opts)?;
    let rf = refit(&fitted.data, &part.selected, ridge_lambda)?;

    let mut w = create_out(outdir, "paths.csv")?;
    export::write_path_csv(&mut w, &fitted.path, &fitted.data, &fitted.input.names)?;
    finish(w)?;
    let mut w = create_out(outdir, "boundary.csv")?;
    export::write_boundary_csv(&mut w, &part, fitted.path.lambdas())?;
    finish(w)?;
    let mut w = create_out(outdir, "selection.json")?;
    export::write_selection_json(&mut w, &part, &rf, &fitted.input.names)?;
    finish(w)?;

    let mut resolved = canonical_fit_config("select", &fitted);
    // `r` stays unset when the ratio is estimated from the data, so a replay
    // re-estimates it the same way instead of freezing one realisation.
    resolved.r = part_opts.r;
    resolved.fallback_r = Some(part_opts.fallback_r);
    resolved.refit_ridge_lambda = Some(ridge_lambda);
    write_manifest(outdir, &resolved)
}

/// Benchmark settings shared by `simulate` and `sweep-r`.
struct BenchSetup {
    spec: DesignSpec,
    replicates: usize,
    seed: u64,
    opts: ExperimentOptions,
    controls: TuningControls,
}

fn bench_setup(cfg: &RunConfig) -> CliResult<BenchSetup> {
    let (name, overrides) = design_spec(cfg)?;
    let spec = build_design(name, &overrides)?;
    let (grid_k, min_ratio) = grid_options(cfg)?;
    let fit = fit_options(cfg)?;
    let partition = partition_options(cfg)?;
    let ridge_lambda = refit_ridge(cfg)?;
    let controls = tuning_controls(cfg)?;
    let replicates = cfg.replicates.unwrap_or(REPLICATES_DEFAULT);
    if replicates == 0 {
        return Err(CliError::Config("replicates must be at least 1".to_string()));
    }
    let seed = cfg.seed.unwrap_or(SEED_DEFAULT);
    let opts = ExperimentOptions {
        grid_k,
        min_ratio,
        fit,
        partition,
        refit_ridge_lambda: ridge_lambda,
        folds: controls.folds,
        ebic_gamma: controls.ebic_gamma,
        stability_b: controls.stability_b,
        stability_pi: controls.stability_pi,
    };
    Ok(BenchSetup {
        spec,
        replicates,
        seed,
        opts,
        controls,
    })
}

fn canonical_bench_config(command: &str, cfg: &RunConfig, b: &BenchSetup) -> RunConfig {
    RunConfig {
        command: Some(command.to_string()),
        design: Some(b.spec.name.clone()),
        n: Some(b.spec.n),
        p: Some(b.spec.p),
        sigma: Some(b.spec.sigma),
        replicates: Some(b.replicates),
        seed: Some(b.seed),
        grid_k: Some(b.opts.grid_k),
        min_ratio: Some(
            cfg.min_ratio
                .unwrap_or_else(|| default_min_ratio(b.spec.n, b.spec.p)),
        ),
        tol: Some(b.opts.fit.tol),
        max_sweeps: Some(b.opts.fit.max_sweeps),
        r: b.opts.partition.r,
        fallback_r: Some(b.opts.partition.fallback_r),
        refit_ridge_lambda: Some(b.opts.refit_ridge_lambda),
        folds: Some(b.controls.folds),
        ebic_gamma: Some(b.controls.ebic_gamma),
        stability_b: Some(b.controls.stability_b),
        stability_pi: Some(b.controls.stability_pi),
        ..RunConfig::default()
    }
}

fn cmd_simulate(cfg: &RunConfig, outdir: &Path) -> CliResult<()> {
    let bench = bench_setup(cfg)?;
    let default_penalties = vec!["lasso".to_string()];
    let penalty_names = cfg.penalties.as_deref().unwrap_or(&default_penalties);
    if penalty_names.is_empty() {
        return Err(CliError::Config("penalties list is empty".to_string()));
    }
    let mut penalties: Vec<PenaltyConfig> = Vec::new();
    for name in penalty_names {
        let p = parse_penalty(name, cfg)?;
        if !penalties.contains(&p) {
            penalties.push(p);
        }
    }
    let default_methods = vec!["spsp".to_string()];
    let methods: Vec<Method> = parse_methods(cfg.methods.as_deref().unwrap_or(&default_methods))?;

    let summary = run_experiment(
        &bench.spec,
        &penalties,
        &methods,
        bench.replicates,
        bench.seed,
        &bench.opts,
    )?;

    let mut w = create_out(outdir, "summary.csv")?;
    export::write_summary_csv(&mut w, &summary)?;
    finish(w)?;
    let mut w = create_out(outdir, "replicates.csv")?;
    export::write_replicates_csv(&mut w, &summary)?;
    finish(w)?;
    let mut w = create_out(outdir, "summary.json")?;
    export::write_summary_json(&mut w, &summary)?;
    finish(w)?;

    let mut resolved = canonical_bench_config("simulate", cfg, &bench);
    resolved.penalties = Some(
        penalties
            .iter()
            .map(|p| penalty_name(p).to_string())
            .collect(),
    );
    materialise_penalty_params(&mut resolved, &penalties);
    resolved.methods = Some(methods.iter().map(|m| m.as_str().to_string()).collect());
    write_manifest(outdir, &resolved)
}

fn cmd_sweep_r(cfg: &RunConfig, outdir: &Path) -> CliResult<()> {
    let bench = bench_setup(cfg)?;
    let penalty = parse_penalty(cfg.penalty.as_deref().unwrap_or("lasso"), cfg)?;
    let grid = ratio_grid(cfg)?;

    let sweep = sweep_r(
        &bench.spec,
        &penalty,
        &grid,
        bench.replicates,
        bench.seed,
        &bench.opts,
    )?;

    let mut w = create_out(outdir, "sweep_r.csv")?;
    export::write_sweep_csv(&mut w, &sweep)?;
    finish(w)?;
    let mut w = create_out(outdir, "sweep_meta.json")?;
    export::write_sweep_meta(&mut w, &sweep)?;
    finish(w)?;

    let mut resolved = canonical_bench_config("sweep-r", cfg, &bench);
    resolved.penalty = Some(penalty_name(&penalty).to_string());
    materialise_penalty_params(&mut resolved, std::slice::from_ref(&penalty));
    resolved.r_min = Some(cfg.r_min.unwrap_or(R_MIN_DEFAULT));
    resolved.r_max = Some(cfg.r_max.unwrap_or(R_MAX_DEFAULT));
    resolved.r_step = Some(cfg.r_step.unwrap_or(R_STEP_DEFAULT));
    write_manifest(outdir, &resolved)
}

#[derive(Serialize)]
struct RankedVariable {
    rank: usize,
    /// 1-based position among the covariate columns of the input file.
    index: usize,
    name: String,
    abs_corr: f64,
    kept: bool,
}

#[derive(Serialize)]
struct ScreenMeta {
    n: usize,
    p: usize,
    d: usize,
    ranked: Vec<RankedVariable>,
}

fn cmd_screen(cfg: &RunConfig, outdir: &Path) -> CliResult<()> {
    let input_path = require_input(cfg)?;
    let input = read_csv(&input_path)?;
    let n = input.x.nrows();
    let p = input.x.ncols();
    // default retention: floor(n / ln n), at least one variable
    let d = match cfg.top_d {
        Some(0) => {
            return Err(CliError::Config("top_d must be at least 1".to_string()));
        }
        Some(d) => d,
        None => ((n as f64 / (n as f64).ln()).floor() as usize).max(1),
    };
    let screen = sis_screen(&input.x, &input.y, d)?;

    // retained columns in their original file order
    let mut keep: Vec<usize> = screen.top().to_vec();
    keep.sort_unstable();

    let mut w = create_out(outdir, "screened.csv")?;
    {
        let mut header = String::from("y");
        for &j in &keep {
            header.push(',');
            header.push_str(&export::csv_escape(&input.names[j]));
        }
        writeln!(w, "{header}").map_err(|e| CliError::Io(e.to_string()))?;
        for i in 0..n {
            let mut line = export::fmt_num(input.y[i]);
            for &j in &keep {
                line.push(',');
                line.push_str(&export::fmt_num(input.x[[i, j]]));
            }
            writeln!(w, "{line}").map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    finish(w)?;

    let kept_set: std::collections::HashSet<usize> = screen.top().iter().copied().collect();
    let meta = ScreenMeta {
        n,
        p,
        d: screen.d,
        ranked: screen
            .ranked
            .iter()
            .zip(screen.abs_corr.iter())
            .enumerate()
            .map(|(rank, (&j, &corr))| RankedVariable {
                rank: rank + 1,
                index: j + 1,
                name: input.names[j].clone(),
                abs_corr: corr,
                kept: kept_set.contains(&j),
            })
            .collect(),
    };
    let mut w = create_out(outdir, "screen_meta.json")?;
    serde_json::to_writer_pretty(&mut w, &meta)
        .map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w).map_err(|e| CliError::Io(e.to_string()))?;
    finish(w)?;

    let resolved = RunConfig {
        command: Some("screen".to_string()),
        input: Some(input_path),
        top_d: Some(screen.d),
        ..RunConfig::default()
    };
    write_manifest(outdir, &resolved)
}
