use faer::Mat;
use num_complex::Complex64;

use crate::{CfemError, Result};

const RADIX: f64 = 2.0;
const NEWTON_STEPS: usize = 60;

/// Evaluates `sum_j coeffs[j] x^j` and its derivative.
pub fn horner(coeffs: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn horner_scale(coeffs: &[f64], x: Complex64) -> f64 {
    let r = x.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.abs())
}

/// Eigenvalues of the balanced companion matrix of `sum_j coeffs[j] x^j`
/// (coefficients in ascending degree). No polishing.
pub fn companion_eigenvalues(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let coeffs = trim(coeffs)?;
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    if n == 1 {
        return Ok(vec![Complex64::new(-coeffs[0] / lead, 0.0)]);
    }
    // Frobenius form: first row holds -c_{n-1}/c_n ... -c_0/c_n.
    let mut c = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == 0 {
            -coeffs[n - 1 - j] / lead
        } else if j + 1 == i {
            1.0
        } else {
            0.0
        }
    });
    balance(&mut c);
    c.eigenvalues().map_err(|e| CfemError::Numerical {
        what: format!("companion eigenvalues: {e:?}"),
        residual: f64::NAN,
    })
}

/// All roots of `sum_j coeffs[j] x^j`, Newton-polished on the original
/// (unnormalized) coefficients.
///
/// Every returned root satisfies `|p(r)| <= 1e3 eps sum_j |c_j| |r|^j`.
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let coeffs = trim(coeffs)?;
    let seeds = companion_eigenvalues(coeffs)?;
    let mut roots = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let r = newton_polish(coeffs, seed);
        let (p, _) = horner(coeffs, r);
        let bound = 1e3 * f64::EPSILON * horner_scale(coeffs, r);
        if !(p.norm() <= bound) {
            return Err(CfemError::Numerical {
                what: format!("poly_roots: root {r} not converged"),
                residual: p.norm(),
            });
        }
        roots.push(r);
    }
    Ok(roots)
}

fn trim(coeffs: &[f64]) -> Result<&[f64]> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(CfemError::domain("polynomial has non-finite coefficients"));
    }
    let deg = coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .ok_or_else(|| CfemError::domain("zero polynomial"))?;
    if deg == 0 {
        return Err(CfemError::domain("polynomial degree must be at least 1"));
    }
    Ok(&coeffs[..=deg])
}

fn newton_polish(coeffs: &[f64], mut x: Complex64) -> Complex64 {
    let mut best = x;
    let mut best_res = horner(coeffs, x).0.norm();
    for _ in 0..NEWTON_STEPS {
        let (p, dp) = horner(coeffs, x);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        let res = horner(coeffs, x).0.norm();
        if res < best_res {
            best = x;
            best_res = res;
        }
        if step.norm() <= 4.0 * f64::EPSILON * x.norm() {
            break;
        }
    }
    best
}

/// Parlett-Reinsch balancing with power-of-two scalings.
fn balance(a: &mut Mat<f64>) {
    let n = a.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn linear_root() {
        let r = poly_roots(&[2.0, -1.0]).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn quadratic_matches_formula() {
        let r = sorted(poly_roots(&[12.0, -6.0, 1.0]).unwrap());
        let s3 = 3f64.sqrt();
        assert!((r[0] - Complex64::new(3.0, -s3)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(3.0, s3)).norm() < 1e-14);
    }

    #[test]
    fn unit_imaginary_pair() {
        let r = sorted(poly_roots(&[1.0, 0.0, 1.0]).unwrap());
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn trailing_zero_leading_coefficients_are_trimmed() {
        let r = poly_roots(&[-6.0, 11.0, -6.0, 1.0, 0.0]).unwrap();
        let r = sorted(r);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(poly_roots(&[]).is_err());
        assert!(poly_roots(&[3.0]).is_err());
        assert!(poly_roots(&[0.0, 0.0]).is_err());
        assert!(poly_roots(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn wilkinson_like_polynomial_polishes() {
        // (x-1)(x-2)...(x-8)
        let mut c = vec![1.0];
        for k in 1..=8 {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= k as f64 * ci;
            }
            c = next;
        }
        let r = sorted(poly_roots(&c).unwrap());
        for (k, root) in r.iter().enumerate() {
            assert!((root - Complex64::new(k as f64 + 1.0, 0.0)).norm() < 1e-9);
        }
    }
}
