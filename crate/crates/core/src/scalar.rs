//! The scalar two-point problem `-u'' + lambda u = 0` on midpoint-integrated
//! linear elements of complex length.

use num_complex::Complex64;

use crate::numerics::{generalized_eig_dense, TridiagonalMatrix};
use crate::pade_grid::PadeGrid;
use crate::{CMat, CfemError, Result};

/// `lambda` together with its square root on the branch `Re k >= 0`
/// (`k = +i sqrt|lambda|` on the negative real axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    pub lambda: Complex64,
    pub k: Complex64,
}

impl SpectralParameter {
    pub fn new(lambda: Complex64) -> Self {
        let k = if lambda.im == 0.0 && lambda.re < 0.0 {
            Complex64::new(0.0, (-lambda.re).sqrt())
        } else {
            lambda.sqrt()
        };
        Self { lambda, k }
    }

    /// Helmholtz: `lambda = -omega^2`.
    pub fn from_omega(omega: f64) -> Self {
        Self::new(Complex64::new(-omega * omega, 0.0))
    }

    /// `lambda = k^2` with `k` taken as given.
    pub fn from_k(k: Complex64) -> Self {
        Self { lambda: k * k, k }
    }
}

/// Stiffness of one midpoint element: `[[k_diag, k_off], [k_off, k_diag]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementDtN {
    pub k_diag: Complex64,
    pub k_off: Complex64,
    pub length: Complex64,
    pub lambda: Complex64,
}

/// Symmetric, persymmetric 2x2 map from end values to end fluxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtNMap2 {
    pub k_diag: Complex64,
    pub k_off: Complex64,
}

impl DtNMap2 {
    /// `k_diag^2 - k_off^2`, which equals `lambda` for exact and CFEM maps.
    /// Evaluated in factored form to avoid cancellation.
    pub fn determinant(&self) -> Complex64 {
        (self.k_diag - self.k_off) * (self.k_diag + self.k_off)
    }
}

impl From<ElementDtN> for DtNMap2 {
    fn from(e: ElementDtN) -> Self {
        DtNMap2 {
            k_diag: e.k_diag,
            k_off: e.k_off,
        }
    }
}

pub fn element_dtn(length: Complex64, lambda: Complex64) -> Result<ElementDtN> {
    if length.norm() == 0.0 || !length.is_finite() {
        return Err(CfemError::domain(
            "element length must be nonzero and finite",
        ));
    }
    let inv = 1.0 / length;
    let mass = lambda * length / 4.0;
    Ok(ElementDtN {
        k_diag: inv + mass,
        k_off: -inv + mass,
        length,
        lambda,
    })
}

/// Crank-Nicolson factor `(1 + kL/2) / (1 - kL/2)`.
pub fn element_propagator(length: Complex64, k: Complex64) -> Result<Complex64> {
    let half = k * length / 2.0;
    let den = 1.0 - half;
    if den.norm() <= 4.0 * f64::EPSILON * (1.0 + half.norm()) {
        return Err(CfemError::singular(format!(
            "propagator pole at kL = {}",
            half * 2.0
        )));
    }
    Ok((1.0 + half) / den)
}

pub fn mesh_propagator(grid: &PadeGrid, k: Complex64) -> Result<Complex64> {
    let mut p = Complex64::new(1.0, 0.0);
    for (j, &l) in grid.lengths.iter().enumerate() {
        p *= element_propagator(l, k)
            .map_err(|e| CfemError::singular(format!("element {j}: {e}")))?;
    }
    Ok(p)
}

pub fn exact_propagator(k: Complex64, length: f64) -> Complex64 {
    (k * length).exp()
}

/// `k coth(kL)` and `-k / sinh(kL)`.
pub fn exact_dtn(lambda: Complex64, length: f64) -> Result<DtNMap2> {
    if !(length > 0.0) {
        return Err(CfemError::domain("interval length must be positive"));
    }
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(DtNMap2 {
            k_diag: Complex64::new(1.0 / length, 0.0),
            k_off: Complex64::new(-1.0 / length, 0.0),
        });
    }
    let k = SpectralParameter::new(lambda).k;
    let kl = k * length;
    if kl.re.abs() >= 300.0 {
        return Ok(DtNMap2 {
            k_diag: k / tanh_right(kl),
            k_off: Complex64::new(0.0, 0.0),
        });
    }
    let (s, c) = (kl.sinh(), kl.cosh());
    if s.norm() <= 8.0 * f64::EPSILON * c.norm() {
        return Err(CfemError::singular(format!(
            "Dirichlet resonance at lambda = {lambda}"
        )));
    }
    Ok(DtNMap2 {
        k_diag: k * c / s,
        k_off: -k / s,
    })
}

/// `tanh z` for `Re z >= 0` without overflow.
fn tanh_right(z: Complex64) -> Complex64 {
    let e = (-2.0 * z).exp();
    (1.0 - e) / (1.0 + e)
}

/// Exact left-end value for unit left flux and zero right value:
/// `tanh(kL) / k` (`tan(omega L) / omega` in the Helmholtz case).
pub fn exact_u0(lambda: Complex64, length: f64) -> Complex64 {
    if lambda == Complex64::new(0.0, 0.0) {
        return Complex64::new(length, 0.0);
    }
    let k = SpectralParameter::new(lambda).k;
    let kl = k * length;
    if kl.re.abs() < 300.0 {
        kl.tanh() / k
    } else {
        tanh_right(kl) / k
    }
}

/// Symmetric tridiagonal assembly of the element maps over a grid.
#[derive(Debug, Clone)]
pub struct AssembledSystem1D {
    pub dim: usize,
    pub diag: Vec<Complex64>,
    pub offdiag: Vec<Complex64>,
    pub grid: PadeGrid,
}

impl AssembledSystem1D {
    pub fn to_dense(&self) -> CMat {
        TridiagonalMatrix::symmetric(self.diag.clone(), self.offdiag.clone())
            .expect("consistent sizes")
            .to_dense()
    }
}

pub fn assemble_1d(grid: &PadeGrid, lambda: Complex64) -> Result<AssembledSystem1D> {
    let n = grid.lengths.len();
    let mut diag = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut offdiag = Vec::with_capacity(n);
    for (j, &l) in grid.lengths.iter().enumerate() {
        let e = element_dtn(l, lambda)?;
        diag[j] += e.k_diag;
        diag[j + 1] += e.k_diag;
        offdiag.push(e.k_off);
    }
    Ok(AssembledSystem1D {
        dim: n + 1,
        diag,
        offdiag,
        grid: grid.clone(),
    })
}

/// Condenses the whole grid onto its two end nodes by eliminating the
/// interior nodes one at a time from the left.
pub fn condense_dtn(grid: &PadeGrid, lambda: Complex64) -> Result<DtNMap2> {
    let mut elems = grid.lengths.iter().map(|&l| element_dtn(l, lambda));
    let first = elems
        .next()
        .ok_or_else(|| CfemError::domain("empty grid"))??;
    // Running map [[a, b], [b, c]] between node 0 and the current right node.
    let (mut a, mut b, mut c) = (first.k_diag, first.k_off, first.k_diag);
    for (j, e) in elems.enumerate() {
        let e = e?;
        let s = c + e.k_diag;
        if s.norm() <= f64::EPSILON * (c.norm() + e.k_diag.norm()) {
            return Err(CfemError::singular(format!(
                "interior node {} is resonant",
                j + 1
            )));
        }
        a -= b * b / s;
        b = -b * e.k_off / s;
        c = e.k_diag - e.k_off * e.k_off / s;
    }
    let _ = c;
    Ok(DtNMap2 {
        k_diag: a,
        k_off: b,
    })
}

#[derive(Debug, Clone)]
pub struct TwoPointSolution {
    pub u0: Complex64,
    /// Interior nodal values; diagnostic only.
    pub interior: Vec<Complex64>,
    pub u_l: Complex64,
}

/// Flux `left_neumann` at x = 0, value `right_dirichlet` at x = L.
pub fn solve_two_point(
    grid: &PadeGrid,
    lambda: Complex64,
    left_neumann: Complex64,
    right_dirichlet: Complex64,
) -> Result<TwoPointSolution> {
    let sys = assemble_1d(grid, lambda)?;
    let n = grid.lengths.len();
    // Unknowns are nodes 0..n-1; node n is eliminated.
    let diag = sys.diag[..n].to_vec();
    let off = sys.offdiag[..n - 1].to_vec();
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    rhs[0] += left_neumann;
    rhs[n - 1] -= sys.offdiag[n - 1] * right_dirichlet;
    let t = TridiagonalMatrix::symmetric(diag, off)?;
    let u = t.factor()?.solve(&rhs)?;
    Ok(TwoPointSolution {
        u0: u[0],
        interior: u[1..].to_vec(),
        u_l: right_dirichlet,
    })
}

/// `|a - b| / (|a| + |b|)`, defined as 0 when both vanish.
pub fn relative_error(u_exact: Complex64, u_approx: Complex64) -> f64 {
    let den = u_exact.norm() + u_approx.norm();
    if den == 0.0 {
        0.0
    } else {
        (u_exact - u_approx).norm() / den
    }
}

/// `|K_hs - (k_diag - k_off^2 / (k_diag + K_hs))|` with `K_hs = sqrt(lambda)`:
/// one element in front of a matching half-space leaves its impedance unchanged.
pub fn halfspace_fixed_point_check(element: &ElementDtN) -> f64 {
    let khs = SpectralParameter::new(element.lambda).k;
    let augmented = element.k_diag - element.k_off * element.k_off / (element.k_diag + khs);
    (khs - augmented).norm()
}

/// Eigenvalues of the assembled stiffness `sum (1/L_j)[[1,-1],[-1,1]]`
/// against the midpoint mass `sum (L_j/4)[[1,1],[1,1]]`, with both end
/// nodes fixed. A single element has no free node and an empty spectrum.
pub fn generalized_spectrum(grid: &PadeGrid) -> Result<Vec<Complex64>> {
    let n = grid.lengths.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let m = n - 1;
    let mut k = CMat::zeros(m, m);
    let mut mass = CMat::zeros(m, m);
    // Element j joins nodes j and j+1; free node i sits at global index i+1.
    for (j, &l) in grid.lengths.iter().enumerate() {
        let (st, ms) = (1.0 / l, l / 4.0);
        let nodes = [j as isize - 1, j as isize];
        for (a, &p) in nodes.iter().enumerate() {
            for (b, &q) in nodes.iter().enumerate() {
                if p < 0 || q < 0 || p as usize >= m || q as usize >= m {
                    continue;
                }
                let sign = if a == b { 1.0 } else { -1.0 };
                k[(p as usize, q as usize)] += st * sign;
                mass[(p as usize, q as usize)] += ms;
            }
        }
    }
    Ok(generalized_eig_dense(&k, &mass)?.values)
}

/// Checks that `|P| > 1` for `Re k > 0` and `|P| < 1` for `Re k < 0`.
pub fn propagator_magnitude_lemma_check(grid: &PadeGrid, k: Complex64) -> Result<bool> {
    if k.re == 0.0 {
        return Err(CfemError::domain("the magnitude lemma excludes Re k = 0"));
    }
    let p = mesh_propagator(grid, k)?.norm();
    Ok(if k.re > 0.0 { p > 1.0 } else { p < 1.0 })
}

/// One Crank-Nicolson step of `u' = k vbar`, `vbar' = k u` over length `l`.
pub fn first_order_step(
    l: Complex64,
    k: Complex64,
    u: Complex64,
    vbar: Complex64,
) -> (Complex64, Complex64) {
    let a = k * l / 2.0;
    // [[1, -a], [-a, 1]] (u1, v1) = [[1, a], [a, 1]] (u0, v0)
    let (r0, r1) = (u + a * vbar, a * u + vbar);
    let det = 1.0 - a * a;
    ((r0 + a * r1) / det, (a * r0 + r1) / det)
}
