use faer::linalg::solvers::GeneralizedEigen;
use num_complex::Complex64;

use super::dense::{check_pivots, frobenius};
use crate::{CMat, CfemError, Result};

/// Eigenpairs of `A v = lambda B v`; column `j` of `vectors` belongs to
/// `values[j]`.
#[derive(Debug, Clone)]
pub struct GeneralizedEig {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
}

/// Finite eigenpairs of `(mu^2 M2 + mu M1 + M0) phi = 0`.
#[derive(Debug, Clone)]
pub struct QuadraticEig {
    pub values: Vec<Complex64>,
    pub vectors: CMat,
}

fn column_residual(a: &CMat, b: &CMat, lambda: Complex64, v: &CMat, j: usize) -> (f64, f64) {
    let n = a.nrows();
    let mut r2 = 0.0;
    let mut v2 = 0.0;
    for i in 0..n {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n {
            s += (a[(i, k)] - lambda * b[(i, k)]) * v[(k, j)];
        }
        r2 += s.norm_sqr();
        v2 += v[(i, j)].norm_sqr();
    }
    (r2.sqrt(), v2.sqrt())
}

fn qz(a: &CMat, b: &CMat) -> Result<(Vec<Complex64>, Vec<Complex64>, CMat)> {
    if a.nrows() == 1 {
        // The QZ driver mis-sizes its workspace for 1x1 pencils.
        return Ok((vec![a[(0, 0)]], vec![b[(0, 0)]], CMat::identity(1, 1)));
    }
    let ev = GeneralizedEigen::new(a.as_ref(), b.as_ref()).map_err(|e| CfemError::Numerical {
        what: format!("QZ iteration: {e:?}"),
        residual: f64::NAN,
    })?;
    let alpha: Vec<Complex64> = ev.S_a().column_vector().iter().copied().collect();
    let beta: Vec<Complex64> = ev.S_b().column_vector().iter().copied().collect();
    Ok((alpha, beta, ev.U().to_owned()))
}

/// Dense generalized eigensolve with a per-pair residual check
/// `||A v - lambda B v|| <= 1e-9 (||A|| + |lambda| ||B||) ||v||`.
pub fn generalized_eig_dense(a: &CMat, b: &CMat) -> Result<GeneralizedEig> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(CfemError::dim("generalized_eig_dense: shapes differ"));
    }
    if n == 0 {
        return Ok(GeneralizedEig {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        });
    }
    check_pivots(
        b.partial_piv_lu()
            .U()
            .diagonal()
            .column_vector()
            .iter()
            .copied(),
        "generalized_eig_dense: B",
    )?;
    let (alpha, beta, vectors) = qz(a, b)?;
    let (na, nb) = (frobenius(a), frobenius(b));
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let lambda = alpha[j] / beta[j];
        let (r, v) = column_residual(a, b, lambda, &vectors, j);
        let bound = 1e-9 * (na + lambda.norm() * nb) * v;
        if !(r <= bound) {
            return Err(CfemError::Numerical {
                what: format!("generalized eigenpair {j} (lambda = {lambda})"),
                residual: r / ((na + lambda.norm() * nb) * v),
            });
        }
        values.push(lambda);
    }
    Ok(GeneralizedEig { values, vectors })
}

/// Quadratic eigenproblem via the first companion linearization
/// `[[0, I], [-M0, -M1]] z = mu [[I, 0], [0, M2]] z`, `z = (phi, mu phi)`.
///
/// Infinite eigenvalues (from a singular `M2`) are dropped. Every returned
/// pair satisfies `||Q(mu) phi|| <= 1e-9 (|mu|^2 ||M2|| + |mu| ||M1|| + ||M0||) ||phi||`.
pub fn quadratic_eig_dense(m2: &CMat, m1: &CMat, m0: &CMat) -> Result<QuadraticEig> {
    let n = m0.nrows();
    if [m2, m1, m0]
        .iter()
        .any(|m| m.nrows() != n || m.ncols() != n)
    {
        return Err(CfemError::dim("quadratic_eig_dense: shapes differ"));
    }
    let mut l = CMat::zeros(2 * n, 2 * n);
    let mut r = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        l[(i, n + i)] = Complex64::new(1.0, 0.0);
        r[(i, i)] = Complex64::new(1.0, 0.0);
    }
    l.submatrix_mut(n, 0, n, n).copy_from(-m0);
    l.submatrix_mut(n, n, n, n).copy_from(-m1);
    r.submatrix_mut(n, n, n, n).copy_from(m2);

    let (alpha, beta, z) = qz(&l, &r)?;
    let scale = alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| a.norm().max(b.norm()))
        .fold(0.0, f64::max);
    let (n2, n1, n0) = (frobenius(m2), frobenius(m1), frobenius(m0));

    let mut values = Vec::new();
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..2 * n {
        if beta[j].norm() <= 1e-12 * scale {
            continue;
        }
        let mu = alpha[j] / beta[j];
        // Take whichever half of z carries phi most accurately.
        let top: Vec<Complex64> = (0..n).map(|i| z[(i, j)]).collect();
        let bottom: Vec<Complex64> = (0..n).map(|i| z[(n + i, j)] / mu).collect();
        let phi = if mu.norm() > 1.0 { bottom } else { top };
        let norm = phi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(CfemError::Numerical {
                what: format!("quadratic eigenvector {j} vanished"),
                residual: f64::NAN,
            });
        }
        let phi: Vec<Complex64> = phi.iter().map(|v| v / norm).collect();
        let mut res = 0.0;
        for i in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += (mu * mu * m2[(i, k)] + mu * m1[(i, k)] + m0[(i, k)]) * phi[k];
            }
            res += s.norm_sqr();
        }
        let res = res.sqrt();
        let bound = mu.norm_sqr() * n2 + mu.norm() * n1 + n0;
        if !(res <= 1e-9 * bound) {
            return Err(CfemError::Numerical {
                what: format!("quadratic eigenpair {j} (mu = {mu})"),
                residual: res / bound,
            });
        }
        values.push(mu);
        cols.push(phi);
    }
    let vectors = CMat::from_fn(n, cols.len(), |i, j| cols[j][i]);
    Ok(QuadraticEig { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn equal_pencil_has_unit_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = CMat::from_fn(5, 5, |i, j| {
            Complex64::new(rng.gen::<f64>() + if i == j { 3.0 } else { 0.0 }, rng.gen())
        });
        let e = generalized_eig_dense(&a, &a).unwrap();
        for v in e.values {
            assert!((v - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn diagonal_pencil() {
        let a = CMat::from_fn(2, 2, |i, j| if i == j { c([1.0, 4.0][i]) } else { c(0.0) });
        let e = generalized_eig_dense(&a, &CMat::identity(2, 2)).unwrap();
        let v = sorted_re(e.values);
        assert!((v[0] - c(1.0)).norm() < 1e-14 && (v[1] - c(4.0)).norm() < 1e-14);
    }

    #[test]
    fn random_symmetric_pair_meets_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 12;
        let r = CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let a = CMat::from_fn(n, n, |i, j| r[(i, j)] + r[(j, i)]);
        let b = CMat::from_fn(n, n, |i, j| {
            if i == j {
                c(2.0)
            } else {
                (r[(i, j)] * r[(j, i)]) * 0.1
            }
        });
        let e = generalized_eig_dense(&a, &b).unwrap();
        assert_eq!(e.values.len(), n);
    }

    #[test]
    fn singular_b_is_rejected() {
        let a = CMat::identity(2, 2);
        let b = CMat::zeros(2, 2);
        assert!(matches!(
            generalized_eig_dense(&a, &b),
            Err(CfemError::Singular(_))
        ));
    }

    #[test]
    fn scalar_quadratic_roots() {
        // mu^2 - 3 mu + 2 = 0 -> {1, 2}
        let one = |v: f64| CMat::from_fn(1, 1, |_, _| c(v));
        let q = quadratic_eig_dense(&one(1.0), &one(-3.0), &one(2.0)).unwrap();
        let v = sorted_re(q.values);
        assert!((v[0] - c(1.0)).norm() < 1e-13 && (v[1] - c(2.0)).norm() < 1e-13);
    }

    #[test]
    fn symmetric_quadratic_has_plus_minus_pairs() {
        // mu^2 A + D with A, D diagonal: mu = +- sqrt(-d/a)
        let a = CMat::from_fn(3, 3, |i, j| if i == j { c(1.0 + i as f64) } else { c(0.0) });
        let d = CMat::from_fn(
            3,
            3,
            |i, j| if i == j { c(-(4.0 + i as f64)) } else { c(0.0) },
        );
        let q = quadratic_eig_dense(&a, &CMat::zeros(3, 3), &d).unwrap();
        assert_eq!(q.values.len(), 6);
        for mu in &q.values {
            assert!(q.values.iter().any(|nu| (nu + mu).norm() < 1e-12));
        }
    }
}
