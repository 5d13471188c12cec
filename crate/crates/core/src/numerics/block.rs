use faer::linalg::solvers::{PartialPivLu, Solve};
use num_complex::Complex64;

use super::dense::{check_pivots, frobenius};
use crate::{CMat, CfemError, Result};

/// Block-tridiagonal matrix with square `m x m` blocks.
///
/// `lower[i]` is block `(i+1, i)`, `upper[i]` is block `(i, i+1)`.
#[derive(Debug, Clone)]
pub struct BlockTridiagonalMatrix {
    pub diag: Vec<CMat>,
    pub lower: Vec<CMat>,
    pub upper: Vec<CMat>,
}

impl BlockTridiagonalMatrix {
    pub fn new(diag: Vec<CMat>, lower: Vec<CMat>, upper: Vec<CMat>) -> Result<Self> {
        let nb = diag.len();
        if nb == 0 || lower.len() + 1 != nb || upper.len() + 1 != nb {
            return Err(CfemError::dim(format!(
                "block tridiagonal: {nb} diagonal, {} lower, {} upper blocks",
                lower.len(),
                upper.len()
            )));
        }
        let m = diag[0].nrows();
        let square = |b: &CMat| b.nrows() == m && b.ncols() == m;
        if !(diag.iter().all(square) && lower.iter().all(square) && upper.iter().all(square)) {
            return Err(CfemError::dim("blocks must all be square of equal size"));
        }
        Ok(Self { diag, lower, upper })
    }

    /// Builds `lower` as the transposes of `upper`; with symmetric diagonal
    /// blocks the whole matrix is then symmetric by construction.
    pub fn symmetric(diag: Vec<CMat>, upper: Vec<CMat>) -> Result<Self> {
        let lower = upper.iter().map(|u| u.transpose().to_owned()).collect();
        Self::new(diag, lower, upper)
    }

    pub fn nblocks(&self) -> usize {
        self.diag.len()
    }

    pub fn block_size(&self) -> usize {
        self.diag[0].nrows()
    }

    pub fn dim(&self) -> usize {
        self.nblocks() * self.block_size()
    }

    /// `A X` for a dense right-hand side with `dim()` rows.
    pub fn apply(&self, x: &CMat) -> CMat {
        let m = self.block_size();
        let nb = self.nblocks();
        let k = x.ncols();
        let mut out = CMat::zeros(nb * m, k);
        for i in 0..nb {
            let xi = x.subrows(i * m, m);
            let mut acc = &self.diag[i] * xi;
            if i > 0 {
                acc += &self.lower[i - 1] * x.subrows((i - 1) * m, m);
            }
            if i + 1 < nb {
                acc += &self.upper[i] * x.subrows((i + 1) * m, m);
            }
            out.subrows_mut(i * m, m).copy_from(&acc);
        }
        out
    }

    pub fn to_dense(&self) -> CMat {
        let m = self.block_size();
        let nb = self.nblocks();
        let mut a = CMat::zeros(nb * m, nb * m);
        for i in 0..nb {
            a.submatrix_mut(i * m, i * m, m, m).copy_from(&self.diag[i]);
            if i + 1 < nb {
                a.submatrix_mut(i * m, (i + 1) * m, m, m)
                    .copy_from(&self.upper[i]);
                a.submatrix_mut((i + 1) * m, i * m, m, m)
                    .copy_from(&self.lower[i]);
            }
        }
        a
    }

    pub fn frobenius(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.lower)
            .chain(&self.upper)
            .map(|b| frobenius(b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Block LU without pivoting across blocks; each pivot block is
    /// factored densely with partial pivoting.
    pub fn factor(&self) -> Result<BlockTridiagonalLu> {
        let nb = self.nblocks();
        let mut pivots: Vec<PartialPivLu<Complex64>> = Vec::with_capacity(nb);
        let mut w: Vec<CMat> = Vec::with_capacity(nb.saturating_sub(1));
        let mut s = self.diag[0].clone();
        for i in 0..nb {
            let lu = s.partial_piv_lu();
            check_pivots(
                lu.U().diagonal().column_vector().iter().copied(),
                &format!("pivot block {i}"),
            )?;
            if i + 1 < nb {
                let wi = lu.solve(&self.upper[i]);
                s = &self.diag[i + 1] - &self.lower[i] * &wi;
                w.push(wi);
            }
            pivots.push(lu);
        }
        Ok(BlockTridiagonalLu {
            matrix: self.clone(),
            pivots,
            w,
        })
    }
}

/// Factorization of a [`BlockTridiagonalMatrix`]. Immutable; `solve`
/// always performs one step of iterative refinement.
pub struct BlockTridiagonalLu {
    matrix: BlockTridiagonalMatrix,
    pivots: Vec<PartialPivLu<Complex64>>,
    w: Vec<CMat>,
}

impl BlockTridiagonalLu {
    pub fn matrix(&self) -> &BlockTridiagonalMatrix {
        &self.matrix
    }

    fn raw_solve(&self, b: &CMat) -> CMat {
        let m = self.matrix.block_size();
        let nb = self.matrix.nblocks();
        let mut y = b.clone();
        for i in 0..nb {
            let mut rhs = y.subrows(i * m, m).to_owned();
            if i > 0 {
                rhs -= &self.matrix.lower[i - 1] * y.subrows((i - 1) * m, m);
            }
            let yi = self.pivots[i].solve(&rhs);
            y.subrows_mut(i * m, m).copy_from(&yi);
        }
        for i in (0..nb.saturating_sub(1)).rev() {
            let corr = &self.w[i] * y.subrows((i + 1) * m, m);
            let mut yi = y.subrows_mut(i * m, m);
            yi -= &corr;
        }
        y
    }

    /// Solves `A X = B` for a dense right-hand side.
    pub fn solve(&self, b: &CMat) -> Result<CMat> {
        if b.nrows() != self.matrix.dim() {
            return Err(CfemError::dim(format!(
                "block solve: rhs has {} rows, matrix dim {}",
                b.nrows(),
                self.matrix.dim()
            )));
        }
        let mut x = self.raw_solve(b);
        let r = b - self.matrix.apply(&x);
        x += self.raw_solve(&r);
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                if !x[(i, j)].is_finite() {
                    return Err(CfemError::singular("block solve overflowed"));
                }
            }
        }
        Ok(x)
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let bm = CMat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.solve(&bm)?;
        Ok((0..x.nrows()).map(|i| x[(i, 0)]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dense_solve, TridiagonalMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(rng: &mut ChaCha8Rng, m: usize, shift: f64) -> CMat {
        CMat::from_fn(m, m, |i, j| {
            let d = if i == j { shift } else { 0.0 };
            Complex64::new(d + rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn sym(a: &CMat) -> CMat {
        CMat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)]) * 0.5)
    }

    #[test]
    fn identity_blocks_return_rhs() {
        let eye = CMat::identity(3, 3);
        let zero = CMat::zeros(3, 3);
        let a = BlockTridiagonalMatrix::symmetric(vec![eye.clone(); 4], vec![zero; 3]).unwrap();
        let b = CMat::from_fn(12, 2, |i, j| Complex64::new(i as f64, j as f64));
        let x = a.factor().unwrap().solve(&b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn scalar_blocks_agree_with_tridiagonal_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20;
        let d: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(3.0 + rng.gen::<f64>(), rng.gen()))
            .collect();
        let o: Vec<Complex64> = (0..n - 1)
            .map(|_| Complex64::new(rng.gen(), rng.gen()))
            .collect();
        let b: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen(), rng.gen()))
            .collect();
        let t = TridiagonalMatrix::symmetric(d.clone(), o.clone()).unwrap();
        let xt = t.factor().unwrap().solve(&b).unwrap();
        let a = BlockTridiagonalMatrix::symmetric(
            d.iter().map(|&v| CMat::from_fn(1, 1, |_, _| v)).collect(),
            o.iter().map(|&v| CMat::from_fn(1, 1, |_, _| v)).collect(),
        )
        .unwrap();
        let xb = a.factor().unwrap().solve_vec(&b).unwrap();
        for (p, q) in xt.iter().zip(&xb) {
            assert!((p - q).norm() <= 1e-13 * p.norm().max(1.0));
        }
    }

    #[test]
    fn random_symmetric_system_meets_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (m, nb) = (4, 10);
        let diag: Vec<CMat> = (0..nb)
            .map(|_| sym(&random_block(&mut rng, m, 4.0)))
            .collect();
        let upper: Vec<CMat> = (0..nb - 1)
            .map(|_| random_block(&mut rng, m, 0.0))
            .collect();
        let a = BlockTridiagonalMatrix::symmetric(diag, upper).unwrap();
        let dense = a.to_dense();
        assert_eq!(dense, dense.transpose().to_owned());
        let b = CMat::from_fn(m * nb, 1, |_, _| Complex64::new(rng.gen(), rng.gen()));
        let x = a.factor().unwrap().solve(&b).unwrap();
        let r = &b - a.apply(&x);
        assert!(frobenius(&r) <= 1e-10 * a.frobenius() * frobenius(&x));
        let xd = dense_solve(&dense, &b).unwrap();
        assert!(frobenius(&(&x - &xd)) <= 1e-12 * frobenius(&xd));
    }

    #[test]
    fn singular_pivot_block_names_its_index() {
        let eye = CMat::identity(2, 2);
        let a = BlockTridiagonalMatrix::symmetric(
            vec![eye.clone(), eye.clone(), eye.clone()],
            vec![CMat::zeros(2, 2), eye.clone()],
        )
        .unwrap();
        match a.factor() {
            Err(CfemError::Singular(msg)) => assert!(msg.contains("pivot block 2"), "{msg}"),
            other => panic!("expected singular error, got {:?}", other.err()),
        }
    }
}
