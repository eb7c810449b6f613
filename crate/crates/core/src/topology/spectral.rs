use crate::{Error, Matrix, Result};

use super::WeightMatrix;

/// Second largest singular value of a square matrix (dense SVD).
///
/// A 1×1 matrix has no second singular value; it is reported as 0 since
/// consensus over a single node is exact.
pub fn second_singular_value(w: &Matrix) -> Result<f64> {
    let n = w.nrows();
    if n == 0 || w.ncols() != n {
        return Err(Error::InvalidMatrix(format!(
            "expected a non-empty square matrix, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let mut values: Vec<f64> = w.clone().svd(false, false).singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values[1].max(0.0))
}

/// `w^k` by repeated multiplication (`k = 0` gives the identity).
pub fn matrix_power(w: &Matrix, k: usize) -> Matrix {
    let mut p = Matrix::identity(w.nrows(), w.ncols());
    for _ in 0..k {
        p = &p * w;
    }
    p
}

/// `max_i Σ_j |(W^K)_ij − 1/n|`, the row deviation of `W^K` from uniform
/// averaging. Bounded by `√n · σ₂^K` for doubly stochastic `W`.
pub fn mixing_deviation(w: &WeightMatrix, k: usize) -> f64 {
    let n = w.nodes();
    let p = matrix_power(w.entries(), k);
    let uniform = 1.0 / n as f64;
    (0..n)
        .map(|i| p.row(i).iter().map(|v| (v - uniform).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
