use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::{CMat, CfemError, Result};

/// Dense matrix from row slices. Rows must share a length.
pub fn mat_from_rows(rows: &[Vec<Complex64>]) -> CMat {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    Mat::from_fn(nrows, ncols, |i, j| rows[i][j])
}

pub fn matvec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len());
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// `s A`.
pub fn scaled(a: &CMat, s: Complex64) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius(a: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Solves `A X = B` with partial-pivoting LU. Fails on an exactly or
/// numerically singular `A`.
pub fn dense_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(CfemError::dim(format!(
            "dense_solve: A is {}x{}, B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let lu = a.partial_piv_lu();
    check_pivots(
        lu.U().diagonal().column_vector().iter().copied(),
        "dense_solve",
    )?;
    Ok(lu.solve(b))
}

/// Rejects a factorization whose smallest pivot is negligible relative to
/// the largest one.
pub(crate) fn check_pivots(pivots: impl Iterator<Item = Complex64>, what: &str) -> Result<()> {
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    for p in pivots {
        let a = p.norm();
        if !a.is_finite() {
            return Err(CfemError::singular(format!("{what}: non-finite pivot")));
        }
        max = max.max(a);
        min = min.min(a);
    }
    if max == 0.0 || min <= max * f64::EPSILON {
        return Err(CfemError::singular(format!(
            "{what}: pivot ratio {:e}",
            if max == 0.0 { 0.0 } else { min / max }
        )));
    }
    Ok(())
}
