use super::dense::dense_solve;
use super::BlockTridiagonalMatrix;
use crate::{CMat, CfemError, Result};

/// Condenses `A` onto the scalar dofs listed in `boundary` (in the given
/// order) by eliminating every other dof.
pub fn schur_complement_boundary(a: &BlockTridiagonalMatrix, boundary: &[usize]) -> Result<CMat> {
    let dense = a.to_dense();
    let n = dense.nrows();
    let mut is_boundary = vec![false; n];
    for &b in boundary {
        if b >= n || is_boundary[b] {
            return Err(CfemError::dim(format!(
                "boundary index {b} out of range or repeated (dim {n})"
            )));
        }
        is_boundary[b] = true;
    }
    let interior: Vec<usize> = (0..n).filter(|&i| !is_boundary[i]).collect();
    let pick = |rows: &[usize], cols: &[usize]| {
        CMat::from_fn(rows.len(), cols.len(), |i, j| dense[(rows[i], cols[j])])
    };
    let abb = pick(boundary, boundary);
    if interior.is_empty() {
        return Ok(abb);
    }
    let aii = pick(&interior, &interior);
    let aib = pick(&interior, boundary);
    let abi = pick(boundary, &interior);
    let x =
        dense_solve(&aii, &aib).map_err(|e| CfemError::singular(format!("interior block: {e}")))?;
    Ok(abb - abi * x)
}

/// Two-port block map `[[k00, k0l], [kl0, kll]]` relating end values to end
/// fluxes of a chain of elements.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDtn {
    pub k00: CMat,
    pub k0l: CMat,
    pub kl0: CMat,
    pub kll: CMat,
}

impl BlockDtn {
    pub fn new(k00: CMat, k0l: CMat, kl0: CMat, kll: CMat) -> Result<Self> {
        let m = k00.nrows();
        if [&k00, &k0l, &kl0, &kll]
            .iter()
            .any(|b| b.nrows() != m || b.ncols() != m)
        {
            return Err(CfemError::dim("BlockDtn blocks must be square and equal"));
        }
        Ok(Self { k00, k0l, kl0, kll })
    }

    pub fn block_size(&self) -> usize {
        self.k00.nrows()
    }

    /// Chains `self` (left) with `next` (right) and eliminates the shared
    /// middle column.
    pub fn series(&self, next: &BlockDtn) -> Result<BlockDtn> {
        if next.block_size() != self.block_size() {
            return Err(CfemError::dim("BlockDtn series: block sizes differ"));
        }
        let s = &self.kll + &next.k00;
        let m = self.block_size();
        let mut rhs = CMat::zeros(m, 2 * m);
        rhs.subcols_mut(0, m).copy_from(&self.kl0);
        rhs.subcols_mut(m, m).copy_from(&next.k0l);
        let x = dense_solve(&s, &rhs)
            .map_err(|e| CfemError::singular(format!("chain junction: {e}")))?;
        let xc = x.subcols(0, m);
        let xb = x.subcols(m, m);
        Ok(BlockDtn {
            k00: &self.k00 - &self.k0l * xc,
            k0l: -(&self.k0l * xb),
            kl0: -(&next.kl0 * xc),
            kll: &next.kll - &next.kl0 * xb,
        })
    }

    /// `count` identical copies in series, by repeated doubling.
    pub fn power(&self, count: usize) -> Result<BlockDtn> {
        if count == 0 {
            return Err(CfemError::domain("BlockDtn power needs at least one copy"));
        }
        let mut acc: Option<BlockDtn> = None;
        let mut base = self.clone();
        let mut k = count;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.series(&base)?,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.series(&base)?;
        }
        Ok(acc.expect("count > 0"))
    }

    /// The full `2m x 2m` matrix.
    pub fn to_dense(&self) -> CMat {
        let m = self.block_size();
        let mut a = CMat::zeros(2 * m, 2 * m);
        a.submatrix_mut(0, 0, m, m).copy_from(&self.k00);
        a.submatrix_mut(0, m, m, m).copy_from(&self.k0l);
        a.submatrix_mut(m, 0, m, m).copy_from(&self.kl0);
        a.submatrix_mut(m, m, m, m).copy_from(&self.kll);
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::frobenius;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one(v: Complex64) -> CMat {
        CMat::from_fn(1, 1, |_, _| v)
    }

    fn chain(d: &[Complex64], o: &[Complex64]) -> BlockTridiagonalMatrix {
        BlockTridiagonalMatrix::symmetric(
            d.iter().map(|&v| one(v)).collect(),
            o.iter().map(|&v| one(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn no_interior_returns_input() {
        let a = chain(
            &[Complex64::new(2.0, 0.0), Complex64::new(3.0, 1.0)],
            &[Complex64::new(-1.0, 0.5)],
        );
        let s = schur_complement_boundary(&a, &[0, 1]).unwrap();
        assert_eq!(s, a.to_dense());
    }

    #[test]
    fn symmetric_input_gives_symmetric_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 9;
        let d: Vec<_> = (0..n)
            .map(|_| Complex64::new(3.0 + rng.gen::<f64>(), rng.gen()))
            .collect();
        let o: Vec<_> = (0..n - 1)
            .map(|_| Complex64::new(rng.gen(), rng.gen()))
            .collect();
        let s = schur_complement_boundary(&chain(&d, &o), &[0, n - 1]).unwrap();
        assert!((s[(0, 1)] - s[(1, 0)]).norm() <= 1e-15 * s[(0, 1)].norm());
    }

    #[test]
    fn condensed_map_reproduces_unit_boundary_solves() {
        // Solve with u0 = 1, uL = 0 and read off the end fluxes.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 7;
        let d: Vec<_> = (0..n)
            .map(|_| Complex64::new(3.0 + rng.gen::<f64>(), rng.gen()))
            .collect();
        let o: Vec<_> = (0..n - 1)
            .map(|_| Complex64::new(rng.gen(), rng.gen()))
            .collect();
        let a = chain(&d, &o);
        let s = schur_complement_boundary(&a, &[0, n - 1]).unwrap();
        let dense = a.to_dense();
        let interior: Vec<usize> = (1..n - 1).collect();
        let aii = CMat::from_fn(n - 2, n - 2, |i, j| dense[(interior[i], interior[j])]);
        let rhs = CMat::from_fn(n - 2, 1, |i, _| -dense[(interior[i], 0)]);
        let ui = dense_solve(&aii, &rhs).unwrap();
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[0] = Complex64::new(1.0, 0.0);
        for (k, &i) in interior.iter().enumerate() {
            u[i] = ui[(k, 0)];
        }
        let f0: Complex64 = (0..n).map(|j| dense[(0, j)] * u[j]).sum();
        let fl: Complex64 = (0..n).map(|j| dense[(n - 1, j)] * u[j]).sum();
        assert!((f0 - s[(0, 0)]).norm() < 1e-13);
        assert!((fl - s[(1, 0)]).norm() < 1e-13);
    }

    #[test]
    fn series_and_power_agree_with_dense_condensation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = 3;
        let rnd = |rng: &mut ChaCha8Rng, shift: f64| {
            CMat::from_fn(m, m, |i, j| {
                Complex64::new(
                    if i == j { shift } else { 0.0 } + rng.gen::<f64>() * 0.3,
                    rng.gen::<f64>() * 0.3,
                )
            })
        };
        let a = rnd(&mut rng, 2.0);
        let a = CMat::from_fn(m, m, |i, j| (a[(i, j)] + a[(j, i)]) * 0.5);
        let b = rnd(&mut rng, -1.0);
        let e = BlockDtn::new(a.clone(), b.clone(), b.transpose().to_owned(), a.clone()).unwrap();
        let count = 5;
        let p = e.power(count).unwrap();
        let mut s = e.clone();
        for _ in 1..count {
            s = s.series(&e).unwrap();
        }
        assert!(frobenius(&(p.to_dense() - s.to_dense())) < 1e-12 * frobenius(&s.to_dense()));

        // Assemble the same chain globally and condense densely.
        let nb = count + 1;
        let mut diag = vec![CMat::zeros(m, m); nb];
        for i in 0..count {
            diag[i] += &a;
            diag[i + 1] += &a;
        }
        let full = BlockTridiagonalMatrix::symmetric(diag, vec![b.clone(); count]).unwrap();
        let boundary: Vec<usize> = (0..m).chain(count * m..nb * m).collect();
        let dense = schur_complement_boundary(&full, &boundary).unwrap();
        assert!(frobenius(&(dense - p.to_dense())) < 1e-12 * frobenius(&s.to_dense()));
    }

    #[test]
    fn power_of_zero_copies_is_an_error() {
        let e = BlockDtn::new(
            CMat::identity(1, 1),
            CMat::identity(1, 1),
            CMat::identity(1, 1),
            CMat::identity(1, 1),
        )
        .unwrap();
        assert!(e.power(0).is_err());
    }
}
