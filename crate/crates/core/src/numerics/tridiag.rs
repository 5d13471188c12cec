use num_complex::Complex64;

use crate::{CMat, CfemError, Result};

/// Complex tridiagonal matrix stored by diagonals.
///
/// `lower[i]` is entry `(i+1, i)` and `upper[i]` is entry `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub diag: Vec<Complex64>,
    pub lower: Vec<Complex64>,
    pub upper: Vec<Complex64>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<Complex64>, lower: Vec<Complex64>, upper: Vec<Complex64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(CfemError::dim(format!(
                "tridiagonal: diag {n}, lower {}, upper {}",
                lower.len(),
                upper.len()
            )));
        }
        Ok(Self { diag, lower, upper })
    }

    /// Symmetric (not Hermitian) matrix with the given off-diagonal.
    pub fn symmetric(diag: Vec<Complex64>, off: Vec<Complex64>) -> Result<Self> {
        Self::new(diag, off.clone(), off)
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> CMat {
        let n = self.dim();
        CMat::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i == j + 1 {
                self.lower[j]
            } else if j == i + 1 {
                self.upper[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    fn scale(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.lower)
            .chain(&self.upper)
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// LU without pivoting. Fails at the first negligible pivot.
    pub fn factor(&self) -> Result<TridiagonalLu> {
        let n = self.dim();
        let tiny = self.scale() * f64::EPSILON;
        let mut pivots = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n.saturating_sub(1));
        pivots.push(self.diag[0]);
        for i in 1..n {
            let prev = pivots[i - 1];
            if !(prev.norm() > tiny) {
                return Err(CfemError::singular(format!(
                    "tridiagonal pivot {} is {prev}",
                    i - 1
                )));
            }
            let l = self.lower[i - 1] / prev;
            mult.push(l);
            pivots.push(self.diag[i] - l * self.upper[i - 1]);
        }
        let last = pivots[n - 1];
        if !(last.norm() > tiny) {
            return Err(CfemError::singular(format!(
                "tridiagonal pivot {} is {last}",
                n - 1
            )));
        }
        Ok(TridiagonalLu {
            matrix: self.clone(),
            mult,
            pivots,
        })
    }
}

/// Factorization of a [`TridiagonalMatrix`]; `solve` applies one step of
/// iterative refinement.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    matrix: TridiagonalMatrix,
    mult: Vec<Complex64>,
    pivots: Vec<Complex64>,
}

impl TridiagonalLu {
    pub fn pivots(&self) -> &[Complex64] {
        &self.pivots
    }

    fn raw_solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.pivots.len();
        let mut y = b.to_vec();
        for i in 1..n {
            let prev = y[i - 1];
            y[i] -= self.mult[i - 1] * prev;
        }
        y[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (y[i] - self.matrix.upper[i] * y[i + 1]) / self.pivots[i];
        }
        y
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.pivots.len() {
            return Err(CfemError::dim(format!(
                "tridiagonal solve: rhs {} for dim {}",
                b.len(),
                self.pivots.len()
            )));
        }
        let mut x = self.raw_solve(b);
        let ax = self.matrix.matvec(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = self.raw_solve(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(CfemError::singular("tridiagonal solve overflowed"));
        }
        Ok(x)
    }
}
