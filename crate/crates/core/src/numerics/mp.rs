//! Multiprecision polishing of polynomial roots.
//!
//! The Pade denominators have integer coefficients that exceed 1e22 already
//! at degree 16 and their roots grow ill-conditioned roughly like `2^(1.85 n)`,
//! so double precision alone cannot deliver correctly rounded roots. The
//! roots are refined here with Aberth iterations on the exact coefficients in
//! binary floating point of caller-chosen precision.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_complex::Complex64;

use crate::{CfemError, Result};

type F = FBig<HalfEven, 2>;

const MAX_SWEEPS: usize = 400;

#[derive(Clone)]
struct MpC {
    re: F,
    im: F,
}

impl MpC {
    fn from_c64(z: Complex64, prec: usize) -> Self {
        MpC {
            re: from_f64(z.re, prec),
            im: from_f64(z.im, prec),
        }
    }

    fn zero(prec: usize) -> Self {
        MpC {
            re: from_f64(0.0, prec),
            im: from_f64(0.0, prec),
        }
    }

    fn one(prec: usize) -> Self {
        MpC {
            re: from_f64(1.0, prec),
            im: from_f64(0.0, prec),
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }

    fn add(&self, o: &MpC) -> MpC {
        MpC {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    fn sub(&self, o: &MpC) -> MpC {
        MpC {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    fn mul(&self, o: &MpC) -> MpC {
        MpC {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn add_real(&self, r: &F) -> MpC {
        MpC {
            re: &self.re + r,
            im: self.im.clone(),
        }
    }

    fn div(&self, o: &MpC) -> MpC {
        let d = &o.re * &o.re + &o.im * &o.im;
        MpC {
            re: (&self.re * &o.re + &self.im * &o.im) / &d,
            im: (&self.im * &o.re - &self.re * &o.im) / &d,
        }
    }

    fn is_zero(&self) -> bool {
        self.re.repr().is_zero() && self.im.repr().is_zero()
    }

    /// Magnitude as f64; only used for step-size tests.
    fn approx_abs(&self) -> f64 {
        self.to_c64().norm()
    }
}

fn from_f64(x: f64, prec: usize) -> F {
    F::try_from(x)
        .expect("finite seed")
        .with_precision(prec)
        .value()
}

fn horner(coeffs: &[F], x: &MpC, prec: usize) -> (MpC, MpC) {
    let mut p = MpC::zero(prec);
    let mut dp = MpC::zero(prec);
    for c in coeffs.iter().rev() {
        dp = dp.mul(x).add(&p);
        p = p.mul(x).add_real(c);
    }
    (p, dp)
}

/// Refines `seeds` toward the roots of `sum_j coeffs[j] x^j` using Aberth
/// iterations carried out with `precision_bits` of mantissa, and rounds the
/// result back to double precision.
///
/// The seeds only need to be distinct and roughly placed; the iteration is
/// globally convergent in practice. Returns the roots in seed order.
pub fn refine_integer_poly_roots(
    coeffs: &[IBig],
    seeds: &[Complex64],
    precision_bits: usize,
) -> Result<Vec<Complex64>> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 || seeds.len() != degree {
        return Err(CfemError::dim(format!(
            "root refinement needs {degree} seeds, got {}",
            seeds.len()
        )));
    }
    let prec = precision_bits.max(64);
    let cs: Vec<F> = coeffs
        .iter()
        .map(|c| F::from(c.clone()).with_precision(prec).value())
        .collect();

    let mut z: Vec<MpC> = separate(seeds)
        .into_iter()
        .map(|s| MpC::from_c64(s, prec))
        .collect();
    // Convergence is quadratic, so once steps drop below 2^(-prec/2) the
    // next sweep lands at the rounding floor.
    let tol = 2f64.powi(-(prec as i32 / 2));
    let one = MpC::one(prec);
    let mut settled = 0usize;

    for _ in 0..MAX_SWEEPS {
        let mut worst = 0.0f64;
        for k in 0..degree {
            let (p, dp) = horner(&cs, &z[k], prec);
            if p.is_zero() {
                continue;
            }
            let ratio = p.div(&dp);
            let mut repulsion = MpC::zero(prec);
            for j in 0..degree {
                if j != k {
                    repulsion = repulsion.add(&one.div(&z[k].sub(&z[j])));
                }
            }
            let step = ratio.div(&one.sub(&ratio.mul(&repulsion)));
            z[k] = z[k].sub(&step);
            let rel = step.approx_abs() / z[k].approx_abs().max(f64::MIN_POSITIVE);
            if rel.is_nan() {
                return Err(CfemError::Numerical {
                    what: "Aberth iteration produced NaN".into(),
                    residual: f64::NAN,
                });
            }
            worst = worst.max(rel);
        }
        if worst < tol {
            settled += 1;
            if settled >= 2 {
                return Ok(z.iter().map(MpC::to_c64).collect());
            }
        }
    }
    Err(CfemError::Numerical {
        what: format!("Aberth iteration did not converge for degree {degree}"),
        residual: f64::NAN,
    })
}

/// Nudges coincident seeds apart; Aberth needs distinct starting points.
fn separate(seeds: &[Complex64]) -> Vec<Complex64> {
    let scale = seeds.iter().map(|s| s.norm()).fold(0.0, f64::max).max(1.0);
    let mut out: Vec<Complex64> = Vec::with_capacity(seeds.len());
    for (i, &s) in seeds.iter().enumerate() {
        let mut s = if s.is_finite() {
            s
        } else {
            Complex64::new(scale, 0.0)
        };
        while out.iter().any(|o| (o - s).norm() < 1e-10 * scale) {
            let angle = 0.7 + i as f64;
            s += Complex64::from_polar(1e-6 * scale, angle);
        }
        out.push(s);
    }
    out
}
