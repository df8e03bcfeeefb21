//! Dataset container with column standardization.
//!
//! All solvers in this crate operate on standardized predictors (zero mean,
//! unit population variance) and a centered response. [`Dataset`] stores the
//! standardized matrices together with the original column means and scales so
//! coefficients can be mapped back to the original scale.

use ndarray::{Array1, Array2};

use crate::error::{Result, SpspError};

/// Threshold below which a column's standard deviation is treated as zero.
const MIN_SCALE: f64 = 1e-12;

/// A design matrix and response prepared for penalized regression.
///
/// Predictors are centered and scaled to unit *population* variance (divisor
/// `n`, not `n - 1`); the response is centered but not scaled.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    x_means: Array1<f64>,
    x_scales: Array1<f64>,
    y_mean: f64,
}

impl Dataset {
    /// Standardizes `x` column-wise and centers `y`.
    ///
    /// Fails if dimensions disagree, any entry is non-finite, or a column is
    /// constant (its population standard deviation falls below `1e-12`).
    pub fn standardize(x: &Array2<f64>, y: &Array1<f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n < 2 || p == 0 {
            return Err(SpspError::DimensionMismatch(format!(
                "need at least 2 rows and 1 column, got {n}x{p}"
            )));
        }
        if y.len() != n {
            return Err(SpspError::DimensionMismatch(format!(
                "x has {n} rows but y has {} entries",
                y.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SpspError::NonFinite("predictor matrix".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SpspError::NonFinite("response vector".into()));
        }

        let nf = n as f64;
        let mut xs = x.clone();
        let mut means = Array1::zeros(p);
        let mut scales = Array1::zeros(p);
        for j in 0..p {
            let mut col = xs.column_mut(j);
            let mean = col.sum() / nf;
            col.mapv_inplace(|v| v - mean);
            let sd = (col.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
            if sd < MIN_SCALE {
                return Err(SpspError::ConstantColumn { index: j });
            }
            col.mapv_inplace(|v| v / sd);
            means[j] = mean;
            scales[j] = sd;
        }

        let y_mean = y.sum() / nf;
        let yc = y.mapv(|v| v - y_mean);

        Ok(Dataset {
            x: xs,
            y: yc,
            x_means: means,
            x_scales: scales,
            y_mean,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Standardized predictor matrix.
    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    /// Centered response.
    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn x_means(&self) -> &Array1<f64> {
        &self.x_means
    }

    pub fn x_scales(&self) -> &Array1<f64> {
        &self.x_scales
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    /// Maps coefficients from the standardized scale back to the original
    /// scale and returns `(coefficients, intercept)`.
    pub fn original_scale(&self, std_coefs: &Array1<f64>) -> (Array1<f64>, f64) {
        let mut coefs = Array1::zeros(self.p());
        let mut intercept = self.y_mean;
        for j in 0..self.p() {
            let b = std_coefs[j] / self.x_scales[j];
            coefs[j] = b;
            intercept -= b * self.x_means[j];
        }
        (coefs, intercept)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn standardizes_simple_column() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![1.0, 2.0, 6.0];
        let d = Dataset::standardize(&x, &y).unwrap();
        // sd of (1,2,3) with divisor n is sqrt(2/3)
        let e = (2.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(d.x()[[0, 0]], -1.0 / e, epsilon = 1e-12);
        assert_abs_diff_eq!(d.x()[[1, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.x()[[2, 0]], 1.0 / e, epsilon = 1e-12);
        assert_abs_diff_eq!(d.x()[[2, 0]], 1.224744871391589, epsilon = 1e-12);
        assert_abs_diff_eq!(d.y_mean(), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.y()[2], 3.0, epsilon = 1e-12);
        // column mean 0, population variance 1
        assert_abs_diff_eq!(d.x().column(0).sum(), 0.0, epsilon = 1e-12);
        let var: f64 = d.x().column(0).iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert_abs_diff_eq!(var, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_constant_column() {
        let x = array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        let y = array![1.0, 2.0, 3.0];
        match Dataset::standardize(&x, &y) {
            Err(SpspError::ConstantColumn { index }) => assert_eq!(index, 1),
            other => panic!("expected ConstantColumn, got {other:?}"),
        }
    }

    #[test]
    fn rejects_shape_mismatch_and_nonfinite() {
        let x = array![[1.0], [2.0], [3.0]];
        assert!(matches!(
            Dataset::standardize(&x, &array![1.0, 2.0]),
            Err(SpspError::DimensionMismatch(_))
        ));
        let bad = array![[1.0], [f64::NAN], [3.0]];
        assert!(matches!(
            Dataset::standardize(&bad, &array![1.0, 2.0, 3.0]),
            Err(SpspError::NonFinite(_))
        ));
    }

    #[test]
    fn original_scale_round_trip() {
        let x = array![[1.0, 10.0], [2.0, 14.0], [3.0, 30.0], [5.0, 21.0]];
        let y = array![2.0, 4.0, 7.0, 9.0];
        let d = Dataset::standardize(&x, &y).unwrap();
        let std_b = array![0.5, -0.25];
        let (b, b0) = d.original_scale(&std_b);
        // predictions on standardized data must equal original-scale predictions
        for i in 0..4 {
            let std_pred: f64 =
                d.y_mean() + (0..2).map(|j| d.x()[[i, j]] * std_b[j]).sum::<f64>();
            let orig_pred: f64 = b0 + (0..2).map(|j| x[[i, j]] * b[j]).sum::<f64>();
            assert_abs_diff_eq!(std_pred, orig_pred, epsilon = 1e-12);
        }
    }
}
