//! Replicated selection experiments over benchmark designs.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Result, SpspError};
use crate::grid::{make_lambda_grid, GRID_K_DEFAULT};
use crate::partition::{spsp_partition, PartitionOptions};
use crate::path::{fit_path_with, CoefficientPath, FitOptions};
use crate::penalty::PenaltyConfig;
use crate::refit::{refit, REFIT_RIDGE_LAMBDA_DEFAULT};
use crate::sim::design::{DesignSampler, DesignSpec, SyntheticDataset};
use crate::sim::metrics::{compute_metrics, irrepresentable_stat, SelectionMetrics};
use crate::tuning::{
    cross_validate, derive_seed, information_criterion, stability_selection, CriterionKind,
    CV_FOLDS_DEFAULT, EBIC_GAMMA_DEFAULT, STABILITY_B_DEFAULT, STABILITY_PI_DEFAULT,
};

/// Seed-stream tags separating the different randomized sub-procedures.
const TAG_CV: u64 = 0xC5;
const TAG_STABILITY: u64 = 0x57AB;
const TAG_BOOTSTRAP: u64 = 0xB007;

/// Number of bootstrap resamples behind the median standard errors.
const BOOTSTRAP_RESAMPLES: usize = 500;

/// Selection rules compared by [`run_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Partition the whole path and take the union of relevant sets.
    Spsp,
    /// K-fold cross-validation, then the path estimate at the chosen lambda.
    Cv,
    /// Generalized cross-validation.
    Gcv,
    Aic,
    Bic,
    Ebic,
    /// Stability selection over half-subsamples, then a least-squares refit.
    Stability,
    /// The true support with a least-squares refit; a reference point.
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Spsp => "spsp",
            Method::Cv => "cv",
            Method::Gcv => "gcv",
            Method::Aic => "aic",
            Method::Bic => "bic",
            Method::Ebic => "ebic",
            Method::Stability => "stability",
            Method::Oracle => "oracle",
        }
    }

    /// The sparsity-based baselines are undefined on dense ridge paths;
    /// those combinations are skipped rather than scored.
    pub fn supports_ridge(&self) -> bool {
        matches!(self, Method::Spsp | Method::Oracle)
    }
}

impl std::str::FromStr for Method {
    type Err = SpspError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spsp" => Ok(Method::Spsp),
            "cv" => Ok(Method::Cv),
            "gcv" => Ok(Method::Gcv),
            "aic" => Ok(Method::Aic),
            "bic" => Ok(Method::Bic),
            "ebic" => Ok(Method::Ebic),
            "stability" => Ok(Method::Stability),
            "oracle" => Ok(Method::Oracle),
            other => Err(SpspError::BadOverride(format!("unknown method '{other}'"))),
        }
    }
}

/// Knobs shared by every replicate of an experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub grid_k: usize,
    /// `None` selects the shape-dependent default.
    pub min_ratio: Option<f64>,
    pub fit: FitOptions,
    pub partition: PartitionOptions,
    pub refit_ridge_lambda: f64,
    pub folds: usize,
    pub ebic_gamma: f64,
    pub stability_b: usize,
    pub stability_pi: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            grid_k: GRID_K_DEFAULT,
            min_ratio: None,
            fit: FitOptions::default(),
            partition: PartitionOptions::default(),
            refit_ridge_lambda: REFIT_RIDGE_LAMBDA_DEFAULT,
            folds: CV_FOLDS_DEFAULT,
            ebic_gamma: EBIC_GAMMA_DEFAULT,
            stability_b: STABILITY_B_DEFAULT,
            stability_pi: STABILITY_PI_DEFAULT,
        }
    }
}

/// Outcome of one (replicate, penalty, method) combination.
#[derive(Debug, Clone)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub penalty: String,
    pub method: Method,
    pub outcome: std::result::Result<SelectionMetrics, String>,
    /// Ratio threshold used, for the path-partitioning method only.
    pub r_used: Option<f64>,
}

/// Aggregated scores for one (penalty, method) cell.
#[derive(Debug, Clone)]
pub struct SummaryCell {
    pub penalty: String,
    pub method: Method,
    pub completed: usize,
    pub failed: usize,
    pub mean_fp: f64,
    pub se_fp: f64,
    pub mean_fn: f64,
    pub se_fn: f64,
    pub median_me: f64,
    /// Bootstrap standard error of the median model error.
    pub se_me: f64,
    /// Mean ratio threshold, for the path-partitioning method only.
    pub mean_r: Option<f64>,
}

/// Full output of a replicated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub design: DesignSpec,
    pub replicates: usize,
    pub base_seed: u64,
    pub cells: Vec<SummaryCell>,
    pub records: Vec<ReplicateRecord>,
    /// Mean collinearity diagnostic across replicates (see
    /// [`irrepresentable_stat`]).
    pub mean_irrepresentable: f64,
}

impl ExperimentSummary {
    pub fn cell(&self, penalty: &str, method: Method) -> Option<&SummaryCell> {
        self.cells
            .iter()
            .find(|c| c.penalty == penalty && c.method == method)
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    if m == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mf = m as f64;
    let mean = values.iter().sum::<f64>() / mf;
    if m == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (mf - 1.0);
    (mean, (var / mf).sqrt())
}

fn median_of(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Median plus a seeded-bootstrap standard error of the median.
fn median_and_se(values: &[f64], seed: u64) -> (f64, f64) {
    let m = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = median_of(&sorted);
    if m < 2 {
        return (med, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medians = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = vec![0.0f64; m];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in resample.iter_mut() {
            *slot = values[rng.random_range(0..m)];
        }
        resample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(median_of(&resample));
    }
    // the SE of the median is the spread of the bootstrap medians
    let bm = medians.iter().sum::<f64>() / medians.len() as f64;
    let var = medians.iter().map(|v| (v - bm) * (v - bm)).sum::<f64>()
        / (medians.len() as f64 - 1.0);
    (med, var.sqrt())
}

/// Applies one selection rule to one fitted path and scores it.
#[allow(clippy::too_many_arguments)]
fn run_method(
    method: Method,
    data: &Dataset,
    ds: &SyntheticDataset,
    penalty: &PenaltyConfig,
    grid: &crate::grid::LambdaGrid,
    path: &CoefficientPath,
    dataset_seed: u64,
    opts: &ExperimentOptions,
) -> Result<(SelectionMetrics, Option<f64>)> {
    match method {
        Method::Spsp => {
            let part = spsp_partition(&path.abs_rows(), &opts.partition)?;
            let rf = refit(data, &part.selected, opts.refit_ridge_lambda)?;
            Ok((
                compute_metrics(&part.selected, &rf.coefs, ds),
                Some(part.r_used),
            ))
        }
        Method::Cv => {
            let cv = cross_validate(
                data,
                penalty,
                grid,
                opts.folds,
                derive_seed(dataset_seed, TAG_CV),
                &opts.fit,
            )?;
            let (b, _) = path.original_scale_row(cv.chosen, data);
            let selected = path.nonzero_indices(cv.chosen);
            Ok((compute_metrics(&selected, &b, ds), None))
        }
        Method::Gcv | Method::Aic | Method::Bic | Method::Ebic => {
            let kind = match method {
                Method::Gcv => CriterionKind::Gcv,
                Method::Aic => CriterionKind::Aic,
                Method::Bic => CriterionKind::Bic,
                _ => CriterionKind::Ebic {
                    gamma: opts.ebic_gamma,
                },
            };
            let res = information_criterion(data, path, kind)?;
            let (b, _) = path.original_scale_row(res.chosen, data);
            let selected = path.nonzero_indices(res.chosen);
            Ok((compute_metrics(&selected, &b, ds), None))
        }
        Method::Stability => {
            let prof = stability_selection(
                data,
                penalty,
                grid,
                opts.stability_b,
                opts.stability_pi,
                derive_seed(dataset_seed, TAG_STABILITY),
                &opts.fit,
            )?;
            let rf = refit(data, &prof.selected, opts.refit_ridge_lambda)?;
            Ok((compute_metrics(&prof.selected, &rf.coefs, ds), None))
        }
        Method::Oracle => {
            let support = ds.spec.support();
            let rf = refit(data, &support, opts.refit_ridge_lambda)?;
            Ok((compute_metrics(&support, &rf.coefs, ds), None))
        }
    }
}

/// Runs `replicates` independent draws of the design, fits one path per
/// penalty, applies every applicable method, and aggregates false positives,
/// false negatives, and model error per (penalty, method) cell.
///
/// Replicate `r` uses seed `base_seed + r`; a fresh predictor matrix is
/// drawn for every replicate. Failures are recorded per combination rather
/// than aborting
/// the experiment.
pub fn run_experiment(
    spec: &DesignSpec,
    penalties: &[PenaltyConfig],
    methods: &[Method],
    replicates: usize,
    base_seed: u64,
    opts: &ExperimentOptions,
) -> Result<ExperimentSummary> {
    if replicates == 0 {
        return Err(SpspError::BadOverride("need at least one replicate".into()));
    }
    if penalties.is_empty() || methods.is_empty() {
        return Err(SpspError::BadOverride(
            "need at least one penalty and one method".into(),
        ));
    }
    for pen in penalties {
        pen.validate()?;
    }
    let sampler = DesignSampler::new(spec)?;

    // the per-replicate work, in a deterministic cell order
    let combos: Vec<(usize, Method)> = penalties
        .iter()
        .enumerate()
        .flat_map(|(pi, pen)| {
            methods
                .iter()
                .filter(|m| !pen.is_ridge() || m.supports_ridge())
                .map(move |&m| (pi, m))
        })
        .collect();

    type RepOut = (Vec<ReplicateRecord>, Option<f64>);
    let per_replicate: Vec<RepOut> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let seed = base_seed.wrapping_add(r as u64);
            let ds = sampler.sample(seed);
            let irr = irrepresentable_stat(&ds.x, &ds.spec.support(), &ds.spec.support_signs())
                .ok();
            let mut records = Vec::with_capacity(combos.len());
            match Dataset::standardize(&ds.x, &ds.y) {
                Ok(data) => {
                    for (pi, pen) in penalties.iter().enumerate() {
                        let fitted = make_lambda_grid(&data, pen, opts.grid_k, opts.min_ratio)
                            .and_then(|grid| {
                                fit_path_with(&data, &grid, pen, &opts.fit)
                                    .map(|path| (grid, path))
                            });
                        for &(cpi, method) in combos.iter().filter(|(cpi, _)| *cpi == pi) {
                            debug_assert_eq!(cpi, pi);
                            let outcome = match &fitted {
                                Ok((grid, path)) => run_method(
                                    method, &data, &ds, pen, grid, path, seed, opts,
                                ),
                                Err(e) => Err(SpspError::BadGrid(e.to_string())),
                            };
                            let (outcome, r_used) = match outcome {
                                Ok((m, r)) => (Ok(m), r),
                                Err(e) => (Err(e.to_string()), None),
                            };
                            records.push(ReplicateRecord {
                                replicate: r,
                                penalty: pen.label(),
                                method,
                                outcome,
                                r_used,
                            });
                        }
                    }
                }
                Err(e) => {
                    let msg = e.to_string();
                    for &(pi, method) in &combos {
                        records.push(ReplicateRecord {
                            replicate: r,
                            penalty: penalties[pi].label(),
                            method,
                            outcome: Err(msg.clone()),
                            r_used: None,
                        });
                    }
                }
            }
            (records, irr)
        })
        .collect();

    let mut records = Vec::with_capacity(replicates * combos.len());
    let mut irr_values = Vec::new();
    for (recs, irr) in per_replicate {
        records.extend(recs);
        if let Some(v) = irr {
            irr_values.push(v);
        }
    }
    let mean_irrepresentable = if irr_values.is_empty() {
        f64::NAN
    } else {
        irr_values.iter().sum::<f64>() / irr_values.len() as f64
    };

    // aggregate cells in combo order
    let mut cells = Vec::with_capacity(combos.len());
    for (cell_idx, &(pi, method)) in combos.iter().enumerate() {
        let label = penalties[pi].label();
        let mut fp = Vec::new();
        let mut fneg = Vec::new();
        let mut me = Vec::new();
        let mut rs = Vec::new();
        let mut failed = 0usize;
        for rec in records
            .iter()
            .filter(|rec| rec.penalty == label && rec.method == method)
        {
            match &rec.outcome {
                Ok(m) => {
                    fp.push(m.false_positives as f64);
                    fneg.push(m.false_negatives as f64);
                    me.push(m.model_error);
                    if let Some(r) = rec.r_used {
                        rs.push(r);
                    }
                }
                Err(_) => failed += 1,
            }
        }
        let (mean_fp, se_fp) = mean_and_se(&fp);
        let (mean_fn, se_fn) = mean_and_se(&fneg);
        let (median_me, se_me) = median_and_se(
            &me,
            derive_seed(base_seed, TAG_BOOTSTRAP.wrapping_add(cell_idx as u64)),
        );
        let mean_r = if rs.is_empty() {
            None
        } else {
            Some(rs.iter().sum::<f64>() / rs.len() as f64)
        };
        cells.push(SummaryCell {
            penalty: label,
            method,
            completed: fp.len(),
            failed,
            mean_fp,
            se_fp,
            mean_fn,
            se_fn,
            median_me,
            se_me,
            mean_r,
        });
    }

    Ok(ExperimentSummary {
        design: spec.clone(),
        replicates,
        base_seed,
        cells,
        records,
        mean_irrepresentable,
    })
}
