//! Baseline tuning rules for choosing a single lambda on a fitted path:
//! sparsity-penalized information criteria, k-fold cross-validation, and
//! subsampling-based stability selection.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Result, SpspError};
use crate::grid::LambdaGrid;
use crate::path::{fit_path_with, CoefficientPath, FitOptions};
use crate::penalty::PenaltyConfig;

/// Deterministic stream-splitting for seeds (SplitMix64 finalizer).
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Default EBIC sparsity weight.
pub const EBIC_GAMMA_DEFAULT: f64 = 0.5;
/// Defaults for stability selection.
pub const STABILITY_B_DEFAULT: usize = 100;
pub const STABILITY_PI_DEFAULT: f64 = 0.6;
/// Default fold count for cross-validation.
pub const CV_FOLDS_DEFAULT: usize = 10;

/// Floor applied to residual sums of squares before taking logarithms.
const RSS_FLOOR: f64 = 1e-300;

/// Model-size-penalized score families. Degrees of freedom are counted as
/// the number of nonzero coefficients, so these apply to sparse paths only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriterionKind {
    Aic,
    Bic,
    /// BIC plus `2 gamma log C(p, df)`.
    Ebic { gamma: f64 },
    Gcv,
}

impl CriterionKind {
    pub fn label(&self) -> &'static str {
        match self {
            CriterionKind::Aic => "aic",
            CriterionKind::Bic => "bic",
            CriterionKind::Ebic { .. } => "ebic",
            CriterionKind::Gcv => "gcv",
        }
    }
}

/// Score of one path row.
#[derive(Debug, Clone)]
pub struct CriterionScore {
    pub lambda: f64,
    pub df: usize,
    pub rss: f64,
    pub score: f64,
}

/// Scores for every row plus the index of the minimizer (ties resolved
/// toward the larger lambda).
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub kind: CriterionKind,
    pub scores: Vec<CriterionScore>,
    pub chosen: usize,
}

/// `log C(p, k)` computed stably without factorials (`k <= p`).
fn ln_choose(p: usize, k: usize) -> f64 {
    let k = k.min(p.saturating_sub(k));
    let mut acc = 0.0;
    for i in 1..=k {
        acc += (((p - k + i) as f64) / (i as f64)).ln();
    }
    acc
}

/// Scores every row of a sparse path under `kind` and picks the minimizer.
///
/// Ridge paths are rejected: with every coefficient nonzero the sparsity
/// count `df` carries no information.
pub fn information_criterion(
    data: &Dataset,
    path: &CoefficientPath,
    kind: CriterionKind,
) -> Result<CriterionResult> {
    if path.penalty().is_ridge() {
        return Err(SpspError::Unsupported(
            "information criteria based on sparsity are not defined for ridge paths".into(),
        ));
    }
    if let CriterionKind::Ebic { gamma } = kind {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(SpspError::BadOverride(format!(
                "EBIC gamma must be non-negative, got {gamma}"
            )));
        }
    }
    let n = data.n();
    let p = data.p();
    let nf = n as f64;

    let mut scores = Vec::with_capacity(path.k());
    for k in 0..path.k() {
        let beta = path.coefs().row(k).to_owned();
        let resid = data.y() - &data.x().dot(&beta);
        let rss = resid.dot(&resid).max(RSS_FLOOR);
        let df = path.nonzero_count(k);
        let score = match kind {
            CriterionKind::Aic => nf * (rss / nf).ln() + 2.0 * df as f64,
            CriterionKind::Bic => nf * (rss / nf).ln() + nf.ln() * df as f64,
            CriterionKind::Ebic { gamma } => {
                nf * (rss / nf).ln() + nf.ln() * df as f64 + 2.0 * gamma * ln_choose(p, df)
            }
            CriterionKind::Gcv => {
                if df >= n {
                    f64::INFINITY
                } else {
                    let denom = 1.0 - df as f64 / nf;
                    rss / (nf * denom * denom)
                }
            }
        };
        scores.push(CriterionScore {
            lambda: path.lambdas()[k],
            df,
            rss,
            score,
        });
    }

    let mut chosen = 0usize;
    let mut best = f64::INFINITY;
    for (k, s) in scores.iter().enumerate() {
        if s.score <= best {
            best = s.score;
            chosen = k;
        }
    }

    Ok(CriterionResult {
        kind,
        scores,
        chosen,
    })
}

/// Cross-validation trace: pooled held-out mean squared error per lambda.
#[derive(Debug, Clone)]
pub struct CvResult {
    pub mse: Vec<f64>,
    pub chosen: usize,
    pub folds: usize,
}

/// Extracts rows of the (standardized) dataset for refitting on a subset.
fn subset(data: &Dataset, rows: &[usize]) -> (Array2<f64>, Array1<f64>) {
    let p = data.p();
    let mut x = Array2::zeros((rows.len(), p));
    let mut y = Array1::zeros(rows.len());
    for (i, &r) in rows.iter().enumerate() {
        x.row_mut(i).assign(&data.x().row(r));
        y[i] = data.y()[r];
    }
    (x, y)
}

/// K-fold cross-validation over a shared lambda grid.
///
/// Observations are shuffled once (seeded), folds are taken round-robin, and
/// each training set is re-standardized before fitting. Held-out squared
/// errors are pooled across folds; ties in the minimum are resolved toward
/// the larger lambda.
pub fn cross_validate(
    data: &Dataset,
    penalty: &PenaltyConfig,
    grid: &LambdaGrid,
    folds: usize,
    seed: u64,
    fit_opts: &FitOptions,
) -> Result<CvResult> {
    let n = data.n();
    if folds < 2 || folds > n {
        return Err(SpspError::BadFolds { folds, n });
    }
    let k = grid.len();

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let fold_sse: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|f| -> Result<Vec<f64>> {
            let test: Vec<usize> = order
                .iter()
                .enumerate()
                .filter(|(i, _)| i % folds == f)
                .map(|(_, &r)| r)
                .collect();
            let train: Vec<usize> = order
                .iter()
                .enumerate()
                .filter(|(i, _)| i % folds != f)
                .map(|(_, &r)| r)
                .collect();
            let (xt, yt) = subset(data, &train);
            let dtrain = Dataset::standardize(&xt, &yt)?;
            let path = fit_path_with(&dtrain, grid, penalty, fit_opts)?;
            let mut sse = vec![0.0; k];
            for ki in 0..k {
                let (b, b0) = path.original_scale_row(ki, &dtrain);
                for &t in &test {
                    let pred = b0 + data.x().row(t).dot(&b);
                    let e = data.y()[t] - pred;
                    sse[ki] += e * e;
                }
            }
            Ok(sse)
        })
        .collect::<Result<Vec<_>>>()?;

    // pooled over all held-out points; summed in fold order for determinism
    let mut mse = vec![0.0; k];
    for sse in &fold_sse {
        for ki in 0..k {
            mse[ki] += sse[ki];
        }
    }
    for v in &mut mse {
        *v /= n as f64;
    }

    let mut chosen = 0usize;
    let mut best = f64::INFINITY;
    for (ki, &v) in mse.iter().enumerate() {
        if v <= best {
            best = v;
            chosen = ki;
        }
    }

    Ok(CvResult { mse, chosen, folds })
}

/// Selection frequencies across random half-subsamples.
#[derive(Debug, Clone)]
pub struct StabilityProfile {
    /// `k x p` fraction of subsamples in which each coefficient was nonzero.
    pub freq: Array2<f64>,
    /// Variables whose maximal frequency over lambda reaches the threshold.
    pub selected: Vec<usize>,
    pub subsamples: usize,
    pub threshold: f64,
}

/// Stability selection: refit the path on `b` half-subsamples (size
/// `floor(n/2)`, drawn without replacement) and keep the variables whose
/// selection frequency reaches `pi` at some lambda.
pub fn stability_selection(
    data: &Dataset,
    penalty: &PenaltyConfig,
    grid: &LambdaGrid,
    b: usize,
    pi: f64,
    seed: u64,
    fit_opts: &FitOptions,
) -> Result<StabilityProfile> {
    let n = data.n();
    let p = data.p();
    let m = n / 2;
    if b == 0 {
        return Err(SpspError::BadOverride("need at least one subsample".into()));
    }
    if !(pi > 0.0 && pi <= 1.0) {
        return Err(SpspError::BadOverride(format!(
            "stability threshold must lie in (0, 1], got {pi}"
        )));
    }
    if m < 2 {
        return Err(SpspError::DimensionMismatch(format!(
            "need at least 4 observations for half-subsampling, got {n}"
        )));
    }
    let k = grid.len();

    // integer counts reduce associatively, so the parallel reduction is
    // deterministic regardless of scheduling
    let counts: Result<Array2<u32>> = (0..b)
        .into_par_iter()
        .map(|i| -> Result<Array2<u32>> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let mut pool: Vec<usize> = (0..n).collect();
            pool.shuffle(&mut rng);
            let mut rows: Vec<usize> = pool[..m].to_vec();
            rows.sort_unstable();
            let (xs, ys) = subset(data, &rows);
            let dsub = Dataset::standardize(&xs, &ys)?;
            let path = fit_path_with(&dsub, grid, penalty, fit_opts)?;
            let mut c = Array2::<u32>::zeros((k, p));
            for ki in 0..k {
                for j in 0..p {
                    if path.coefs()[[ki, j]] != 0.0 {
                        c[[ki, j]] = 1;
                    }
                }
            }
            Ok(c)
        })
        .reduce(
            || Ok(Array2::<u32>::zeros((k, p))),
            |a, b| match (a, b) {
                (Ok(a), Ok(b)) => Ok(a + b),
                (Err(e), _) | (_, Err(e)) => Err(e),
            },
        );
    let counts = counts?;

    let bf = b as f64;
    let freq = counts.mapv(|c| c as f64 / bf);

    // count threshold equivalent to freq >= pi, robust to round-off
    let need = ((pi * bf) - 1e-9).ceil().max(1.0) as u32;
    let mut selected = Vec::new();
    for j in 0..p {
        let hit = (0..k).any(|ki| counts[[ki, j]] >= need);
        if hit {
            selected.push(j);
        }
    }

    Ok(StabilityProfile {
        freq,
        selected,
        subsamples: b,
        threshold: pi,
    })
}
