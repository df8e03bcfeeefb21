//! Small dense linear-algebra helpers bridging ndarray and nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector};
use ndarray::{Array1, Array2};

/// Converts a row-major ndarray matrix into an nalgebra matrix.
pub fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(a.nrows(), a.ncols(), a.iter().cloned())
}

/// Solves `A x = b` for symmetric positive-definite `A` via Cholesky.
/// Returns `None` when the factorization fails (matrix not PD).
pub fn cholesky_solve(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let chol = Cholesky::new(to_dmatrix(a))?;
    let rhs = DVector::from_iterator(b.len(), b.iter().cloned());
    let sol = chol.solve(&rhs);
    Some(Array1::from_iter(sol.iter().cloned()))
}

/// Lower Cholesky factor `L` with `L L' = A`, as an ndarray matrix.
pub fn cholesky_lower(a: &Array2<f64>) -> Option<Array2<f64>> {
    let chol = Cholesky::new(to_dmatrix(a))?;
    let l = chol.l();
    let n = a.nrows();
    Some(Array2::from_shape_fn((n, n), |(i, j)| l[(i, j)]))
}
