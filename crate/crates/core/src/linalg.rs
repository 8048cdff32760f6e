//! Small dense least-squares helpers shared by the model fitters.

use nalgebra::DMatrix;

/// Relative threshold on |R_ii| below which a regressor is treated as
/// linearly dependent on the others.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct LeastSquares {
    /// Regressors × responses.
    pub coef: DMatrix<f64>,
    /// Observations × responses.
    pub residuals: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct RankDeficient;

/// Householder-QR least squares for every column of `y` at once.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<LeastSquares, RankDeficient> {
    let (n, m) = x.shape();
    assert_eq!(n, y.nrows(), "row mismatch in least squares");
    if m == 0 {
        return Ok(LeastSquares { coef: DMatrix::zeros(0, y.ncols()), residuals: y.clone() });
    }
    if n < m {
        return Err(RankDeficient);
    }
    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(&r)?;
    let qty = qr.q().transpose() * y;
    let coef = r.solve_upper_triangular(&qty).ok_or(RankDeficient)?;
    let residuals = y - x * &coef;
    Ok(LeastSquares { coef, residuals })
}

pub(crate) fn full_column_rank(x: &DMatrix<f64>) -> bool {
    let (n, m) = x.shape();
    if m == 0 {
        return true;
    }
    n >= m && check_rank(&x.clone().qr().r()).is_ok()
}

fn check_rank(r: &DMatrix<f64>) -> Result<(), RankDeficient> {
    let diag = r.diagonal();
    let max = diag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 || !max.is_finite() || diag.iter().any(|v| v.abs() <= RANK_TOL * max) {
        return Err(RankDeficient);
    }
    Ok(())
}

/// Solves the normal equations `G b = h` for a small symmetric positive
/// definite Gram matrix stored row-major.
pub(crate) fn solve_gram(gram: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = rhs.len();
    let g = DMatrix::from_row_slice(m, m, gram);
    let chol = g.cholesky()?;
    let b = chol.solve(&nalgebra::DVector::from_column_slice(rhs));
    Some(b.iter().copied().collect())
}
