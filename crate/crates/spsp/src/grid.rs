//! Log-equidistant lambda grids.

use crate::data::Dataset;
use crate::error::{Result, SpspError};
use crate::penalty::PenaltyConfig;

/// Default number of grid points.
pub const GRID_K_DEFAULT: usize = 100;
/// Factor by which the ridge grid extends beyond the l1 entry point, since
/// ridge coefficients only approach zero asymptotically.
const RIDGE_LAMBDA_FACTOR: f64 = 100.0;

/// An ascending, strictly positive, log-equidistant lambda grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    /// Builds a grid from explicit ascending positive values.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(SpspError::BadGrid(format!(
                "need at least 2 grid points, got {}",
                values.len()
            )));
        }
        for w in values.windows(2) {
            if !(w[0] < w[1]) {
                return Err(SpspError::BadGrid("grid values must be strictly increasing".into()));
            }
        }
        if values[0] <= 0.0 || values.iter().any(|v| !v.is_finite()) {
            return Err(SpspError::BadGrid("grid values must be positive and finite".into()));
        }
        Ok(LambdaGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }
}

/// Smallest lambda at which every coefficient of an l1-penalized fit is zero:
/// `max_j (2/n) |x_j' y|`, divided by the l1 share for the elastic net.
/// The ridge grid has no such entry point and uses 100x the lasso value.
pub fn lambda_max(data: &Dataset, penalty: &PenaltyConfig) -> Result<f64> {
    penalty.validate()?;
    let n = data.n() as f64;
    let mut best: f64 = 0.0;
    for j in 0..data.p() {
        let dot: f64 = data.x().column(j).dot(data.y());
        best = best.max((2.0 * dot / n).abs());
    }
    if best <= 0.0 {
        return Err(SpspError::BadGrid(
            "response is orthogonal to every predictor; lambda_max is zero".into(),
        ));
    }
    let base = best / penalty.l1_share();
    Ok(if penalty.is_ridge() {
        base * RIDGE_LAMBDA_FACTOR
    } else {
        base
    })
}

/// Default smallest-to-largest lambda ratio: wider when p exceeds n.
pub fn default_min_ratio(n: usize, p: usize) -> f64 {
    if n < p {
        0.01
    } else {
        1e-4
    }
}

/// Builds a log-equidistant grid of `k` values ending at `lambda_max`.
///
/// `min_ratio` defaults to 0.01 when `n < p` and 1e-4 otherwise.
pub fn make_lambda_grid(
    data: &Dataset,
    penalty: &PenaltyConfig,
    k: usize,
    min_ratio: Option<f64>,
) -> Result<LambdaGrid> {
    if k < 2 {
        return Err(SpspError::BadGrid(format!("need at least 2 grid points, got {k}")));
    }
    let ratio = min_ratio.unwrap_or_else(|| default_min_ratio(data.n(), data.p()));
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(SpspError::BadGrid(format!(
            "min_ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let top = lambda_max(data, penalty)?;
    let log_top = top.ln();
    let log_bot = (top * ratio).ln();
    let km1 = (k - 1) as f64;
    let mut values = Vec::with_capacity(k);
    for i in 0..k {
        let t = i as f64 / km1;
        values.push((log_bot + t * (log_top - log_bot)).exp());
    }
    // guard against round-off at the ends
    values[0] = top * ratio;
    values[k - 1] = top;
    LambdaGrid::from_values(values)
}
