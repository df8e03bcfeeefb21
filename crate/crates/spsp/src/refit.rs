//! Post-selection refitting.
//!
//! After a set of variables is selected, coefficients are re-estimated by
//! ordinary least squares on that set alone. When the reduced Gram matrix is
//! singular or the set is as large as the sample, a lightly regularized ridge
//! solve takes over. Results are reported on the original predictor scale.

use ndarray::{Array1, Array2};

use crate::data::Dataset;
use crate::error::{Result, SpspError};
use crate::linalg;

/// Default ridge penalty for the fallback refit.
pub const REFIT_RIDGE_LAMBDA_DEFAULT: f64 = 1e-3;

/// How the refit was computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefitMethod {
    Ols,
    Ridge { lambda: f64 },
}

impl RefitMethod {
    pub fn label(&self) -> String {
        match self {
            RefitMethod::Ols => "ols".into(),
            RefitMethod::Ridge { lambda } => format!("ridge({lambda})"),
        }
    }
}

/// Refitted model on the selected variables, original scale.
#[derive(Debug, Clone)]
pub struct RefitResult {
    /// Length-p coefficient vector; zero outside the selected set.
    pub coefs: Array1<f64>,
    pub intercept: f64,
    pub method: RefitMethod,
    /// The (sorted, deduplicated) set that was refit.
    pub selected: Vec<usize>,
}

/// Least-squares refit on `selected`, with a ridge fallback controlled by
/// `ridge_lambda`. An empty selection yields the intercept-only model.
pub fn refit(data: &Dataset, selected: &[usize], ridge_lambda: f64) -> Result<RefitResult> {
    if !(ridge_lambda > 0.0) || !ridge_lambda.is_finite() {
        return Err(SpspError::BadOverride(format!(
            "refit ridge penalty must be positive and finite, got {ridge_lambda}"
        )));
    }
    let p = data.p();
    let n = data.n();
    let mut sel: Vec<usize> = selected.to_vec();
    sel.sort_unstable();
    sel.dedup();
    if sel.iter().any(|&j| j >= p) {
        return Err(SpspError::DimensionMismatch(format!(
            "selected index out of range for {p} variables"
        )));
    }

    if sel.is_empty() {
        return Ok(RefitResult {
            coefs: Array1::zeros(p),
            intercept: data.y_mean(),
            method: RefitMethod::Ols,
            selected: sel,
        });
    }

    let s = sel.len();
    let nf = n as f64;
    let mut xs = Array2::zeros((n, s));
    for (c, &j) in sel.iter().enumerate() {
        xs.column_mut(c).assign(&data.x().column(j));
    }
    let gram = xs.t().dot(&xs) / nf;
    let rhs = xs.t().dot(data.y()) / nf;

    let (std_coefs, method) = if s < n {
        match linalg::cholesky_solve(&gram, &rhs) {
            Some(b) => (b, RefitMethod::Ols),
            None => (
                ridge_on_gram(&gram, &rhs, ridge_lambda)?,
                RefitMethod::Ridge { lambda: ridge_lambda },
            ),
        }
    } else {
        (
            ridge_on_gram(&gram, &rhs, ridge_lambda)?,
            RefitMethod::Ridge { lambda: ridge_lambda },
        )
    };

    // scatter into a full standardized vector, then map to the original scale
    let mut full = Array1::zeros(p);
    for (c, &j) in sel.iter().enumerate() {
        full[j] = std_coefs[c];
    }
    let (coefs, intercept) = data.original_scale(&full);

    Ok(RefitResult {
        coefs,
        intercept,
        method,
        selected: sel,
    })
}

fn ridge_on_gram(
    gram: &Array2<f64>,
    rhs: &Array1<f64>,
    lambda: f64,
) -> Result<Array1<f64>> {
    let mut a = gram.clone();
    for i in 0..a.nrows() {
        a[[i, i]] += lambda;
    }
    linalg::cholesky_solve(&a, rhs)
        .ok_or_else(|| SpspError::Singular("ridge refit system is not PD".into()))
}
