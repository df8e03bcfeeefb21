//! Selection quality metrics, a collinearity diagnostic, and marginal
//! correlation screening.

use ndarray::{Array1, Array2};

use crate::error::{Result, SpspError};
use crate::linalg;
use crate::sim::design::SyntheticDataset;

/// Selection errors and estimation error of one fitted model against the
/// truth that generated the data.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionMetrics {
    /// Selected variables outside the true support.
    pub false_positives: usize,
    /// True-support variables that were missed.
    pub false_negatives: usize,
    /// `(b - b*)' W (b - b*) / sigma^2` with `W` the sample covariance of
    /// the predictors of this dataset.
    pub model_error: f64,
}

/// Scores a selected set and original-scale coefficient estimate against the
/// generating design.
pub fn compute_metrics(
    selected: &[usize],
    beta_hat: &Array1<f64>,
    ds: &SyntheticDataset,
) -> SelectionMetrics {
    let support = ds.spec.support();
    let mut sel = selected.to_vec();
    sel.sort_unstable();
    sel.dedup();
    let in_support = |j: &usize| support.binary_search(j).is_ok();
    let false_positives = sel.iter().filter(|j| !in_support(j)).count();
    let false_negatives = support
        .iter()
        .filter(|j| sel.binary_search(j).is_err())
        .count();

    // quadratic form through centered predictions: d' Cov d = ||Xc d||^2/(n-1)
    let n = ds.x.nrows();
    let p = ds.x.ncols();
    let nf = n as f64;
    let mut diff = Array1::zeros(p);
    for j in 0..p {
        diff[j] = beta_hat[j] - ds.spec.beta[j];
    }
    let means: Vec<f64> = (0..p).map(|j| ds.x.column(j).sum() / nf).collect();
    let mut v = ds.x.dot(&diff);
    let shift: f64 = (0..p).map(|j| means[j] * diff[j]).sum();
    v.mapv_inplace(|t| t - shift);
    let model_error = v.dot(&v) / ((nf - 1.0) * ds.spec.sigma * ds.spec.sigma);

    SelectionMetrics {
        false_positives,
        false_negatives,
        model_error,
    }
}

/// Strength of the strong collinearity condition for sign-consistent l1
/// selection: the infinity norm of the regression of the off-support
/// predictors on the support, applied to the support signs. Values below 1
/// mean the condition holds, with more slack the smaller the value.
///
/// Computed on column-standardized predictors; `signs` must align with
/// `support`.
pub fn irrepresentable_stat(x: &Array2<f64>, support: &[usize], signs: &[f64]) -> Result<f64> {
    let (n, p) = x.dim();
    if support.len() != signs.len() {
        return Err(SpspError::DimensionMismatch(
            "support and sign vectors differ in length".into(),
        ));
    }
    if support.iter().any(|&j| j >= p) {
        return Err(SpspError::DimensionMismatch(
            "support index out of range".into(),
        ));
    }
    if support.is_empty() {
        return Ok(0.0);
    }
    let nf = n as f64;

    // standardize columns locally (population variance)
    let mut xs = x.clone();
    for j in 0..p {
        let mut col = xs.column_mut(j);
        let mean = col.sum() / nf;
        col.mapv_inplace(|v| v - mean);
        let sd = (col.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
        if sd < 1e-12 {
            return Err(SpspError::ConstantColumn { index: j });
        }
        col.mapv_inplace(|v| v / sd);
    }

    let s = support.len();
    let mut xsupp = Array2::zeros((n, s));
    for (c, &j) in support.iter().enumerate() {
        xsupp.column_mut(c).assign(&xs.column(j));
    }
    let gram = xsupp.t().dot(&xsupp) / nf;
    let signs = Array1::from(signs.to_vec());
    let w = linalg::cholesky_solve(&gram, &signs)
        .ok_or_else(|| SpspError::Singular("support Gram matrix is singular".into()))?;

    // c_j = (1/n) x_j' (X_S w) for all j at once
    let u = xsupp.dot(&w);
    let c = xs.t().dot(&u) / nf;
    let mut stat: f64 = 0.0;
    for j in 0..p {
        if support.binary_search(&j).is_err() {
            stat = stat.max(c[j].abs());
        }
    }
    Ok(stat)
}

/// Ranking of predictors by absolute marginal correlation with the response.
#[derive(Debug, Clone)]
pub struct ScreenResult {
    /// All predictors in rank order (strongest first; ties by index).
    pub ranked: Vec<usize>,
    /// Absolute correlations aligned with `ranked`.
    pub abs_corr: Vec<f64>,
    /// Number of predictors retained.
    pub d: usize,
}

impl ScreenResult {
    /// The retained predictors, strongest first.
    pub fn top(&self) -> &[usize] {
        &self.ranked[..self.d]
    }
}

/// Ranks predictors by `|corr(x_j, y)|` and keeps the top `d` (clamped to
/// p). Constant columns rank last with correlation zero.
pub fn sis_screen(x: &Array2<f64>, y: &Array1<f64>, d: usize) -> Result<ScreenResult> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(SpspError::DimensionMismatch(format!(
            "x has {n} rows but y has {}",
            y.len()
        )));
    }
    if n < 2 || p == 0 {
        return Err(SpspError::DimensionMismatch(format!(
            "need at least 2 rows and 1 column, got {n}x{p}"
        )));
    }
    if d == 0 {
        return Err(SpspError::BadOverride("screening must keep at least one variable".into()));
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(SpspError::NonFinite("screening input".into()));
    }
    let d = d.min(p);
    let nf = n as f64;

    let ym = y.sum() / nf;
    let yc = y.mapv(|v| v - ym);
    let ynorm = yc.dot(&yc).sqrt();

    let mut corr = vec![0.0f64; p];
    if ynorm > 0.0 {
        for j in 0..p {
            let col = x.column(j);
            let m = col.sum() / nf;
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                let a = col[i] - m;
                num += a * yc[i];
                den += a * a;
            }
            if den > 0.0 {
                corr[j] = (num / (den.sqrt() * ynorm)).abs();
            }
        }
    }

    let mut ranked: Vec<usize> = (0..p).collect();
    ranked.sort_by(|&i, &j| corr[j].partial_cmp(&corr[i]).unwrap().then(i.cmp(&j)));
    let abs_corr = ranked.iter().map(|&j| corr[j]).collect();

    Ok(ScreenResult { ranked, abs_corr, d })
}
