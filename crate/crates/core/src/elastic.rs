//! In-plane time-harmonic elastodynamics on layered strips.
//!
//! Displacements `u = (u_x, u_z)`; Voigt stress `(s_xx, s_zz, s_xz) = D e`
//! with `e = (du_x/dx, du_z/dz, du_x/dz + du_z/dx)`. Discretizing z with
//! linear elements gives
//!
//! ```text
//! A U'' + (B1 + B2) U' + D U = 0
//! A  =  int N^T Dxx N        B1 =  int N^T Dxz N'
//! B2 = -int N'^T Dxz^T N     D  = -int N'^T Dzz N' + w^2 int N^T rho N
//! ```
//!
//! and the nodal force on an `x = const` face is `A U' + B1 U`.

use num_complex::Complex64;

use crate::layered::{neumann_load_left, solve_condensed_chain, LayerProfile, SubdomainSpec};
use crate::numerics::{frobenius, quadratic_eig_dense, scaled, BlockDtn, BlockTridiagonalMatrix};
use crate::{CMat, CfemError, Result};

type M3 = [[Complex64; 3]; 3];
type M2 = [[Complex64; 2]; 2];

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticMaterial {
    pub lame_lambda: Complex64,
    pub mu: Complex64,
    pub rho: f64,
}

impl ElasticMaterial {
    /// Voigt matrix of an isotropic solid.
    pub fn voigt(&self) -> M3 {
        let (l, m) = (self.lame_lambda, self.mu);
        [
            [l + m * 2.0, l, zero()],
            [l, l + m * 2.0, zero()],
            [zero(), zero(), m],
        ]
    }
}

/// `mu = G`, `lambda = 2 G nu / (1 - 2 nu)`.
pub fn material_from_engineering(g: Complex64, nu: f64, rho: f64) -> Result<ElasticMaterial> {
    if !(nu > -1.0 && nu < 0.5) {
        return Err(CfemError::domain(format!(
            "Poisson ratio must lie in (-1, 0.5), got {nu}"
        )));
    }
    Ok(ElasticMaterial {
        lame_lambda: g * (2.0 * nu / (1.0 - 2.0 * nu)),
        mu: g,
        rho,
    })
}

/// `Dxx`, `Dxz`, `Dzz` of a Voigt matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InPlaneCoefficients {
    pub dxx: M2,
    pub dxz: M2,
    pub dzz: M2,
}

impl InPlaneCoefficients {
    pub fn from_voigt(d: &M3) -> Self {
        // e = Ex du/dx + Ez du/dz with Ex picking (x, -, z) and Ez (-, z, x).
        let ex = [(0usize, 0usize), (2, 1)];
        let ez = [(2usize, 0usize), (1, 1)];
        let mut dxx = [[zero(); 2]; 2];
        let mut dxz = [[zero(); 2]; 2];
        let mut dzz = [[zero(); 2]; 2];
        for &(ri, ci) in &ex {
            for &(rj, cj) in &ex {
                dxx[ci][cj] += d[ri][rj];
            }
            for &(rj, cj) in &ez {
                dxz[ci][cj] += d[ri][rj];
            }
        }
        for &(ri, ci) in &ez {
            for &(rj, cj) in &ez {
                dzz[ci][cj] += d[ri][rj];
            }
        }
        Self { dxx, dxz, dzz }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticPiece {
    pub z0: f64,
    pub z1: f64,
    pub voigt: M3,
    pub rho: f64,
}

/// Vertical profile for the in-plane problem; the mesh rules are those of
/// [`LayerProfile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticProfile {
    pub height: f64,
    pub pieces: Vec<ElasticPiece>,
    pub nz: usize,
}

impl ElasticProfile {
    pub fn new(height: f64, pieces: Vec<ElasticPiece>, nz: usize) -> Result<Self> {
        // Reuse the scalar tiling checks.
        let scalar = pieces
            .iter()
            .map(|p| crate::layered::LayerPiece {
                z0: p.z0,
                z1: p.z1,
                modulus: Complex64::new(1.0, 0.0),
                density: p.rho,
            })
            .collect();
        LayerProfile::new(height, scalar, nz)?;
        Ok(Self { height, pieces, nz })
    }

    pub fn uniform(height: f64, material: ElasticMaterial, nz: usize) -> Result<Self> {
        Self::new(
            height,
            vec![ElasticPiece {
                z0: 0.0,
                z1: height,
                voigt: material.voigt(),
                rho: material.rho,
            }],
            nz,
        )
    }

    pub fn element_size(&self) -> f64 {
        self.height / self.nz as f64
    }

    fn element_piece(&self, e: usize) -> &ElasticPiece {
        let zm = (e as f64 + 0.5) * self.element_size();
        self.pieces
            .iter()
            .find(|p| zm < p.z1)
            .unwrap_or_else(|| self.pieces.last().expect("nonempty"))
    }

    /// The scalar profile carrying the same mesh (for loads).
    pub fn scalar_mesh(&self) -> LayerProfile {
        LayerProfile::uniform(self.height, Complex64::new(1.0, 0.0), 1.0, self.nz)
            .expect("validated on construction")
    }
}

/// `A, B1, B2, D` of size `N = 2 nz` (node-major, `u_x` before `u_z`).
/// `kzz` and `mass` are the two parts of `D = -kzz + omega^2 mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticVerticalOperators {
    pub a: CMat,
    pub b1: CMat,
    pub b2: CMat,
    pub d: CMat,
    pub kzz: CMat,
    pub mass: CMat,
    pub omega: f64,
}

impl ElasticVerticalOperators {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Operators for the moduli multiplied by `s` (density unchanged).
    pub fn with_modulus_scale(&self, s: Complex64) -> Self {
        let kzz = scaled(&self.kzz, s);
        let w2 = Complex64::new(self.omega * self.omega, 0.0);
        Self {
            a: scaled(&self.a, s),
            b1: scaled(&self.b1, s),
            b2: scaled(&self.b2, s),
            d: scaled(&self.mass, w2) - &kzz,
            kzz,
            mass: self.mass.clone(),
            omega: self.omega,
        }
    }

    /// The sub-blocks acting on one displacement component (0 = x, 1 = z).
    pub fn component(&self, c: usize) -> Self {
        let n = self.dim() / 2;
        let pick = |m: &CMat| CMat::from_fn(n, n, |i, j| m[(2 * i + c, 2 * j + c)]);
        Self {
            a: pick(&self.a),
            b1: pick(&self.b1),
            b2: pick(&self.b2),
            d: pick(&self.d),
            kzz: pick(&self.kzz),
            mass: pick(&self.mass),
            omega: self.omega,
        }
    }
}

/// Adds `s[a][b] * m` into node blocks `(e + a, e + b)`, skipping node 0.
fn scatter_blocks(out: &mut CMat, e: usize, s: [[f64; 2]; 2], m: &M2) {
    for (a, row) in s.iter().enumerate() {
        for (b, &w) in row.iter().enumerate() {
            let (p, q) = (e + a, e + b);
            if p == 0 || q == 0 || w == 0.0 {
                continue;
            }
            for c in 0..2 {
                for d in 0..2 {
                    out[(2 * (p - 1) + c, 2 * (q - 1) + d)] += m[c][d] * w;
                }
            }
        }
    }
}

pub fn semidiscretize_z_elastic(profile: &ElasticProfile, omega: f64) -> ElasticVerticalOperators {
    let n = 2 * profile.nz;
    let h = profile.element_size();
    let mut a = CMat::zeros(n, n);
    let mut b1 = CMat::zeros(n, n);
    let mut b2 = CMat::zeros(n, n);
    let mut kzz = CMat::zeros(n, n);
    let mut mass = CMat::zeros(n, n);
    // int N_a N_b, int N_a N_b', int N_a' N_b, int N_a' N_b'
    let nn = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
    let nnp = [[-0.5, 0.5], [-0.5, 0.5]];
    let npn = [[-0.5, -0.5], [0.5, 0.5]];
    let npnp = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
    for e in 0..profile.nz {
        let piece = profile.element_piece(e);
        let co = InPlaneCoefficients::from_voigt(&piece.voigt);
        let dxz_t = [[co.dxz[0][0], co.dxz[1][0]], [co.dxz[0][1], co.dxz[1][1]]];
        let neg_dxz_t = dxz_t.map(|r| r.map(|v| -v));
        let rho = Complex64::new(piece.rho, 0.0);
        let id = [[rho, zero()], [zero(), rho]];
        scatter_blocks(&mut a, e, nn, &co.dxx);
        scatter_blocks(&mut b1, e, nnp, &co.dxz);
        scatter_blocks(&mut b2, e, npn, &neg_dxz_t);
        scatter_blocks(&mut kzz, e, npnp, &co.dzz);
        scatter_blocks(&mut mass, e, nn, &id);
    }
    let w2 = Complex64::new(omega * omega, 0.0);
    let d = scaled(&mass, w2) - &kzz;
    ElasticVerticalOperators {
        a,
        b1,
        b2,
        d,
        kzz,
        mass,
        omega,
    }
}

/// Plane wave `phi exp(i kx x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveMode {
    pub kx: Complex64,
    pub phi: Vec<Complex64>,
}

/// `||(-kx^2 A + i kx (B1 + B2) + D) phi||`.
pub fn dispersion_residual(ops: &ElasticVerticalOperators, mode: &PlaneWaveMode) -> f64 {
    let (i, kx) = (Complex64::new(0.0, 1.0), mode.kx);
    let n = ops.dim();
    let mut s2 = 0.0;
    for r in 0..n {
        let mut s = zero();
        for c in 0..n {
            let q = -kx * kx * ops.a[(r, c)]
                + i * kx * (ops.b1[(r, c)] + ops.b2[(r, c)])
                + ops.d[(r, c)];
            s += q * mode.phi[c];
        }
        s2 += s.norm_sqr();
    }
    s2.sqrt()
}

/// All finite plane-wave modes, via `mu = i kx` in
/// `(mu^2 A + mu (B1 + B2) + D) phi = 0`.
pub fn dispersion_modes(ops: &ElasticVerticalOperators) -> Result<Vec<PlaneWaveMode>> {
    let q = quadratic_eig_dense(&ops.a, &(&ops.b1 + &ops.b2), &ops.d)?;
    let n = ops.dim();
    let neg_i = Complex64::new(0.0, -1.0);
    Ok(q.values
        .iter()
        .enumerate()
        .map(|(j, &mu)| PlaneWaveMode {
            kx: mu * neg_i,
            phi: (0..n).map(|i| q.vectors[(i, j)]).collect(),
        })
        .collect())
}

/// Two-node midpoint element in x, as a `2N x 2N` matrix:
/// `(1/L)[[A,-A],[-A,A]] + (1/2)[[-B1,-B1],[B1,B1]] - (1/2)[[-B2,B2],[-B2,B2]] - (L/4)[[D,D],[D,D]]`.
pub fn element_stiffness_elastic(l: Complex64, ops: &ElasticVerticalOperators) -> Result<CMat> {
    let (k00, k01, k10, k11) = element_blocks(l, ops, 0.25, 0.25)?;
    Ok(BlockDtn::new(k00, k01, k10, k11)?.to_dense())
}

/// Element blocks with mass weights `(diag, off)`: midpoint uses (1/4, 1/4)
/// and exact integration (1/3, 1/6).
fn element_blocks(
    l: Complex64,
    ops: &ElasticVerticalOperators,
    md: f64,
    mo: f64,
) -> Result<(CMat, CMat, CMat, CMat)> {
    if l.norm() == 0.0 || !l.is_finite() {
        return Err(CfemError::domain(
            "element length must be nonzero and finite",
        ));
    }
    let half = Complex64::new(0.5, 0.0);
    let stiff = scaled(&ops.a, 1.0 / l);
    let bd = scaled(&(&ops.b1 - &ops.b2), half);
    let bs = scaled(&(&ops.b1 + &ops.b2), half);
    let dd = scaled(&ops.d, l * md);
    let dof = scaled(&ops.d, l * mo);
    let k00 = &stiff - &bd - &dd;
    let k01 = -&stiff - &bs - &dof;
    let k10 = -&stiff + &bs - &dof;
    let k11 = &stiff + &bd - &dd;
    Ok((k00, k01, k10, k11))
}

/// `-(i kx A + B1)`: stiffness of the half-space `x > 0` for `mode`.
pub fn halfspace_stiffness(mode: &PlaneWaveMode, ops: &ElasticVerticalOperators) -> CMat {
    let ik = Complex64::new(0.0, 1.0) * mode.kx;
    -(scaled(&ops.a, ik) + &ops.b1)
}

fn mat_vec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `(1 + i kx L/2) / (1 - i kx L/2)`.
pub fn element_propagation_factor(l: Complex64, kx: Complex64) -> Result<Complex64> {
    let a = Complex64::new(0.0, 0.5) * kx * l;
    if (1.0 - a).norm() <= 4.0 * f64::EPSILON * (1.0 + a.norm()) {
        return Err(CfemError::singular("propagation factor pole"));
    }
    Ok((1.0 + a) / (1.0 - a))
}

/// Nodal forces `(f0, fL)` of one element displaced as `(phi, P phi)`.
fn end_forces(
    l: Complex64,
    ops: &ElasticVerticalOperators,
    mode: &PlaneWaveMode,
) -> Result<(Vec<Complex64>, Vec<Complex64>, Complex64)> {
    let p = element_propagation_factor(l, mode.kx)?;
    let (k00, k01, k10, k11) = element_blocks(l, ops, 0.25, 0.25)?;
    let ul: Vec<Complex64> = mode.phi.iter().map(|v| v * p).collect();
    let add = |x: Vec<Complex64>, y: Vec<Complex64>| {
        x.iter().zip(&y).map(|(a, b)| a + b).collect::<Vec<_>>()
    };
    let f0 = add(mat_vec(&k00, &mode.phi), mat_vec(&k01, &ul));
    let fl = add(mat_vec(&k10, &mode.phi), mat_vec(&k11, &ul));
    Ok((f0, fl, p))
}

/// One element of length `l` placed in front of the half-space: with
/// `(u0, uL) = (phi, P phi)` the left force must equal `K_HS phi` and the
/// right node must be in equilibrium with the half-space. Returns the
/// norm of both residuals stacked.
pub fn fixed_point_residual(
    l: Complex64,
    ops: &ElasticVerticalOperators,
    mode: &PlaneWaveMode,
) -> Result<f64> {
    let (f0, fl, p) = end_forces(l, ops, mode)?;
    let khs = halfspace_stiffness(mode, ops);
    let left = mat_vec(&khs, &mode.phi);
    let right = mat_vec(&khs, &mode.phi.iter().map(|v| v * p).collect::<Vec<_>>());
    let r: Vec<Complex64> = f0
        .iter()
        .zip(&left)
        .map(|(a, b)| a - b)
        .chain(fl.iter().zip(&right).map(|(a, b)| a + b))
        .collect();
    Ok(norm(&r))
}

/// Relative mismatch between the traction at the far end of the element
/// and `P` times the traction at the near end.
pub fn traction_propagation_error(
    l: Complex64,
    ops: &ElasticVerticalOperators,
    mode: &PlaneWaveMode,
) -> Result<f64> {
    let (f0, fl, p) = end_forces(l, ops, mode)?;
    // traction t(0) = -f0, t(L) = fL
    let r: Vec<Complex64> = fl.iter().zip(&f0).map(|(a, b)| a + p * b).collect();
    Ok(norm(&r) / (p.norm() * norm(&f0)))
}

/// Consistent load for a left-edge traction `(tx(y), tz(y))`, `y = z / H`.
pub fn traction_load_left(
    profile: &ElasticProfile,
    tx: impl Fn(f64) -> f64,
    tz: impl Fn(f64) -> f64,
) -> Vec<Complex64> {
    let mesh = profile.scalar_mesh();
    let fx = neumann_load_left(&mesh, tx);
    let fz = neumann_load_left(&mesh, tz);
    fx.iter().zip(&fz).flat_map(|(&x, &z)| [x, z]).collect()
}

/// Block-tridiagonal CFEM system across all subdomains; returns
/// displacements at the subdomain end columns (x = 0 first).
pub fn solve_elastic_multidomain(
    ops: &ElasticVerticalOperators,
    subdomains: &[SubdomainSpec],
    load: &[Complex64],
) -> Result<Vec<Vec<Complex64>>> {
    if subdomains.is_empty() {
        return Err(CfemError::domain("no subdomains"));
    }
    let m = ops.dim();
    if load.len() != m {
        return Err(CfemError::dim("load size differs from vertical dof count"));
    }
    let total: usize = subdomains.iter().map(|s| s.grid.lengths.len()).sum();
    let mut diag = vec![CMat::zeros(m, m); total + 1];
    let mut lower = Vec::with_capacity(total);
    let mut upper = Vec::with_capacity(total);
    let mut interfaces = vec![0];
    let mut col = 0;
    for sd in subdomains {
        let local = ops.with_modulus_scale(sd.modulus_scale);
        for &l in &sd.grid.lengths {
            let (k00, k01, k10, k11) = element_blocks(l, &local, 0.25, 0.25)?;
            diag[col] += &k00;
            diag[col + 1] += &k11;
            upper.push(k01);
            lower.push(k10);
            col += 1;
        }
        interfaces.push(col);
    }
    let a = BlockTridiagonalMatrix::new(diag, lower, upper)?;
    let mut rhs = vec![zero(); a.dim()];
    rhs[..m].copy_from_slice(load);
    let x = a
        .factor()
        .map_err(|e| CfemError::singular(format!("resonant system: {e}")))?
        .solve_vec(&rhs)?;
    Ok(interfaces
        .iter()
        .map(|&c| x[c * m..(c + 1) * m].to_vec())
        .collect())
}

/// Exactly integrated real element of length `hx`.
pub fn fem_element_stiffness_elastic(hx: f64, ops: &ElasticVerticalOperators) -> Result<BlockDtn> {
    let (k00, k01, k10, k11) = element_blocks(Complex64::new(hx, 0.0), ops, 1.0 / 3.0, 1.0 / 6.0)?;
    BlockDtn::new(k00, k01, k10, k11)
}

/// Regular FEM reference with `nx` elements per subdomain, condensed by
/// repeated doubling. Returns displacements at the segment ends.
pub fn regular_fem_elastic(
    ops: &ElasticVerticalOperators,
    segments: &[crate::layered::Segment],
    nx: usize,
    load: &[Complex64],
) -> Result<Vec<Vec<Complex64>>> {
    if nx == 0 || segments.is_empty() {
        return Err(CfemError::domain("need nx >= 1 and at least one segment"));
    }
    let maps = segments
        .iter()
        .map(|s| {
            let local = ops.with_modulus_scale(s.modulus_scale);
            fem_element_stiffness_elastic(s.x_length / nx as f64, &local)?.power(nx)
        })
        .collect::<Result<Vec<_>>>()?;
    solve_condensed_chain(&maps, load)
}

/// `||D||_F`, the scale used by the residual tolerances.
pub fn operator_scale(ops: &ElasticVerticalOperators) -> f64 {
    frobenius(&ops.d)
}
