//! Stratified 2D layers: linear elements in z, complex-length midpoint
//! elements in x.
//!
//! The layer occupies `0 < z < H`, is fixed at `z = 0` and traction free at
//! `z = H`. Unknowns are ordered with the vertical index running fastest so
//! that each x-node column forms one block of a block-tridiagonal system.

use num_complex::Complex64;

use crate::numerics::{generalized_eig_dense, scaled, BlockDtn, BlockTridiagonalMatrix};
use crate::pade_grid::PadeGrid;
use crate::{CMat, CfemError, Result};

/// Gauss-Legendre rule on [-1, 1].
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

#[derive(Debug, Clone, PartialEq)]
pub struct LayerPiece {
    pub z0: f64,
    pub z1: f64,
    pub modulus: Complex64,
    pub density: f64,
}

/// Vertical material profile and mesh (`nz` equal elements).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerProfile {
    pub height: f64,
    pub pieces: Vec<LayerPiece>,
    pub nz: usize,
}

impl LayerProfile {
    pub fn new(height: f64, pieces: Vec<LayerPiece>, nz: usize) -> Result<Self> {
        if !(height > 0.0) || nz == 0 || pieces.is_empty() {
            return Err(CfemError::domain(
                "profile needs H > 0, nz >= 1 and at least one piece",
            ));
        }
        let h = height / nz as f64;
        let tol = 1e-9 * height;
        let mut z = 0.0;
        for p in &pieces {
            if (p.z0 - z).abs() > tol || !(p.z1 > p.z0) {
                return Err(CfemError::domain(format!(
                    "pieces must tile (0, H) in order; gap or overlap at z = {z}"
                )));
            }
            let k = (p.z1 / h).round();
            if (k * h - p.z1).abs() > tol {
                return Err(CfemError::domain(format!(
                    "piece boundary z = {} is not on the element grid",
                    p.z1
                )));
            }
            if p.density < 0.0 {
                return Err(CfemError::domain("density must be nonnegative"));
            }
            z = p.z1;
        }
        if (z - height).abs() > tol {
            return Err(CfemError::domain("pieces do not reach z = H"));
        }
        Ok(Self { height, pieces, nz })
    }

    pub fn uniform(height: f64, modulus: Complex64, density: f64, nz: usize) -> Result<Self> {
        Self::new(
            height,
            vec![LayerPiece {
                z0: 0.0,
                z1: height,
                modulus,
                density,
            }],
            nz,
        )
    }

    pub fn element_size(&self) -> f64 {
        self.height / self.nz as f64
    }

    /// Material of vertical element `e`.
    pub fn element_material(&self, e: usize) -> (Complex64, f64) {
        let zm = (e as f64 + 0.5) * self.element_size();
        let p = self
            .pieces
            .iter()
            .find(|p| zm < p.z1)
            .unwrap_or_else(|| self.pieces.last().expect("nonempty"));
        (p.modulus, p.density)
    }

    /// Number of vertical unknowns (the z = 0 node is fixed).
    pub fn dofs(&self) -> usize {
        self.nz
    }
}

/// `rz = int N'^T G N'`, `gz = int N^T G N`, `mz = int N^T rho N` with the
/// z = 0 row and column removed. `mz` is real but stored complex.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalOperators {
    pub rz: CMat,
    pub gz: CMat,
    pub mz: CMat,
}

impl VerticalOperators {
    pub fn dim(&self) -> usize {
        self.rz.nrows()
    }
}

/// Adds the 2x2 element matrix `ke` for element `e` (nodes e, e+1) into
/// `a`, dropping the fixed node 0.
pub(crate) fn scatter_z(a: &mut CMat, e: usize, ke: [[Complex64; 2]; 2]) {
    for (i, row) in ke.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let (p, q) = (e + i, e + j);
            if p > 0 && q > 0 {
                a[(p - 1, q - 1)] += v;
            }
        }
    }
}

pub fn semidiscretize_z(profile: &LayerProfile) -> VerticalOperators {
    let n = profile.dofs();
    let h = profile.element_size();
    let mut rz = CMat::zeros(n, n);
    let mut gz = CMat::zeros(n, n);
    let mut mz = CMat::zeros(n, n);
    for e in 0..profile.nz {
        let (g, rho) = profile.element_material(e);
        let k = g / h;
        let (m2, m1) = (h / 3.0, h / 6.0);
        scatter_z(&mut rz, e, [[k, -k], [-k, k]]);
        scatter_z(&mut gz, e, [[g * m2, g * m1], [g * m1, g * m2]]);
        let r = Complex64::new(rho, 0.0);
        scatter_z(&mut mz, e, [[r * m2, r * m1], [r * m1, r * m2]]);
    }
    VerticalOperators { rz, gz, mz }
}

/// Generalized eigenvalues of `(rz - omega^2 mz)` against `gz`: the decay
/// parameters of the decoupled vertical modes.
pub fn modal_lambdas(ops: &VerticalOperators, omega: f64) -> Result<Vec<Complex64>> {
    let a = &ops.rz - scaled(&ops.mz, r2(omega));
    Ok(generalized_eig_dense(&a, &ops.gz)?.values)
}

fn r2(omega: f64) -> Complex64 {
    Complex64::new(omega * omega, 0.0)
}

/// One x-interval: its complex grid and the factor applied to the profile's
/// modulus inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainSpec {
    pub x_length: f64,
    pub modulus_scale: Complex64,
    pub grid: PadeGrid,
}

impl SubdomainSpec {
    pub fn new(grid: PadeGrid, modulus_scale: Complex64) -> Self {
        Self {
            x_length: grid.total_length,
            modulus_scale,
            grid,
        }
    }

    pub fn segment(&self) -> Segment {
        Segment {
            x_length: self.x_length,
            modulus_scale: self.modulus_scale,
        }
    }
}

/// Geometry and material of an x-interval without a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x_length: f64,
    pub modulus_scale: Complex64,
}

/// Block-tridiagonal system over all node columns.
pub struct Assembled2D {
    pub matrix: BlockTridiagonalMatrix,
    /// Complex x-coordinate of each node column.
    pub node_x: Vec<Complex64>,
    /// Columns at subdomain ends (x = 0, interfaces, far end).
    pub interface_nodes: Vec<usize>,
}

/// Element blocks `(diag, off)` of a midpoint element of length `l`:
/// `diag = s gz / l + (l/4)(s rz - w^2 mz)`, `off = -s gz / l + (l/4)(...)`.
fn cfem_element_blocks(
    ops: &VerticalOperators,
    scale: Complex64,
    omega: f64,
    l: Complex64,
) -> (CMat, CMat) {
    let stiff = scaled(&ops.gz, scale / l);
    let mass = scaled(
        &(scaled(&ops.rz, scale) - scaled(&ops.mz, r2(omega))),
        l / 4.0,
    );
    (&stiff + &mass, &mass - &stiff)
}

/// Consistent (two-point Gauss exact) blocks of a real element of length `hx`.
fn fem_element_blocks(
    ops: &VerticalOperators,
    scale: Complex64,
    omega: f64,
    hx: f64,
) -> (CMat, CMat) {
    let stiff = scaled(&ops.gz, scale / hx);
    let rp = scaled(&ops.rz, scale) - scaled(&ops.mz, r2(omega));
    (
        &stiff + scaled(&rp, (hx / 3.0).into()),
        scaled(&rp, (hx / 6.0).into()) - &stiff,
    )
}

pub fn assemble_2d(
    profile: &LayerProfile,
    subdomains: &[SubdomainSpec],
    omega: f64,
) -> Result<Assembled2D> {
    assemble_2d_with(&semidiscretize_z(profile), subdomains, omega)
}

/// [`assemble_2d`] with precomputed vertical operators.
pub fn assemble_2d_with(
    ops: &VerticalOperators,
    subdomains: &[SubdomainSpec],
    omega: f64,
) -> Result<Assembled2D> {
    if subdomains.is_empty() {
        return Err(CfemError::domain("no subdomains"));
    }
    let m = ops.dim();
    let total: usize = subdomains.iter().map(|s| s.grid.lengths.len()).sum();
    let mut diag = vec![CMat::zeros(m, m); total + 1];
    let mut upper = Vec::with_capacity(total);
    let mut node_x = vec![Complex64::new(0.0, 0.0)];
    let mut interface_nodes = vec![0];
    let mut col = 0;
    for sd in subdomains {
        if (sd.x_length - sd.grid.total_length).abs() > 1e-12 * sd.x_length {
            return Err(CfemError::dim("subdomain length differs from its grid"));
        }
        for &l in &sd.grid.lengths {
            let (d, o) = cfem_element_blocks(ops, sd.modulus_scale, omega, l);
            diag[col] += &d;
            diag[col + 1] += &d;
            upper.push(o);
            let x = node_x[col] + l;
            node_x.push(x);
            col += 1;
        }
        interface_nodes.push(col);
    }
    Ok(Assembled2D {
        matrix: BlockTridiagonalMatrix::symmetric(diag, upper)?,
        node_x,
        interface_nodes,
    })
}

/// The standard left-edge flux profile: a smooth bump equal to 1 at y = 1/2
/// and vanishing with all derivatives at y = 0 and y = 1.
pub fn bump_load(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        (16.0 + 4.0 / (y * (y - 1.0))).exp()
    }
}

/// Consistent nodal load `int N^T f dz` for a flux profile `f(z / H)`.
pub fn neumann_load_left(profile: &LayerProfile, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let h = profile.element_size();
    let mut out = vec![Complex64::new(0.0, 0.0); profile.dofs()];
    for e in 0..profile.nz {
        let z0 = e as f64 * h;
        let (mut lo, mut hi) = (0.0, 0.0);
        for (xi, w) in GAUSS5 {
            let t = (xi + 1.0) / 2.0;
            let fv = f((z0 + t * h) / profile.height) * w * h / 2.0;
            lo += fv * (1.0 - t);
            hi += fv * t;
        }
        if e > 0 {
            out[e - 1] += lo;
        }
        out[e] += hi;
    }
    out
}

/// Nodal solution, one vector per x-node column.
#[derive(Debug, Clone)]
pub struct Field2D {
    pub columns: Vec<Vec<Complex64>>,
}

/// Solves with `load` applied to the first (x = 0) column.
pub fn solve_2d(system: &Assembled2D, load: &[Complex64]) -> Result<Field2D> {
    let m = system.matrix.block_size();
    if load.len() != m {
        return Err(CfemError::dim(format!(
            "load has {} entries, columns have {m}",
            load.len()
        )));
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); system.matrix.dim()];
    rhs[..m].copy_from_slice(load);
    let x = system
        .matrix
        .factor()
        .map_err(|e| CfemError::singular(format!("resonant system: {e}")))?
        .solve_vec(&rhs)?;
    Ok(Field2D {
        columns: x.chunks(m).map(<[Complex64]>::to_vec).collect(),
    })
}

impl Field2D {
    /// Columns at the given node indices, stacked.
    pub fn stacked(&self, nodes: &[usize]) -> Vec<Complex64> {
        nodes
            .iter()
            .flat_map(|&i| self.columns[i].iter().copied())
            .collect()
    }
}

/// `||u - u_ref|| / ||u_ref||`.
pub fn interface_error(u: &[Complex64], u_ref: &[Complex64]) -> Result<f64> {
    if u.len() != u_ref.len() {
        return Err(CfemError::dim("interface vectors differ in length"));
    }
    let den = u_ref.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(CfemError::domain("reference vector is zero"));
    }
    let num = u
        .iter()
        .zip(u_ref)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}

/// Regular FEM with `nx` equal real elements per segment. Each segment is
/// condensed onto its two end columns by repeated doubling, so large `nx`
/// is cheap. Returns the solution at the segment ends (x = 0 first).
pub fn regular_fem_baseline(
    profile: &LayerProfile,
    segments: &[Segment],
    omega: f64,
    nx: usize,
    load: &[Complex64],
) -> Result<Vec<Vec<Complex64>>> {
    regular_fem_baseline_with(&semidiscretize_z(profile), segments, omega, nx, load)
}

pub fn regular_fem_baseline_with(
    ops: &VerticalOperators,
    segments: &[Segment],
    omega: f64,
    nx: usize,
    load: &[Complex64],
) -> Result<Vec<Vec<Complex64>>> {
    if nx == 0 || segments.is_empty() {
        return Err(CfemError::domain("need nx >= 1 and at least one segment"));
    }
    let maps = segments
        .iter()
        .map(|s| {
            let (d, o) = fem_element_blocks(ops, s.modulus_scale, omega, s.x_length / nx as f64);
            BlockDtn::new(d.clone(), o.clone(), o.transpose().to_owned(), d)?.power(nx)
        })
        .collect::<Result<Vec<_>>>()?;
    solve_condensed_chain(&maps, load)
}

/// Assembles condensed segment maps on the shared end columns and solves
/// with `load` on the first column.
pub(crate) fn solve_condensed_chain(
    maps: &[BlockDtn],
    load: &[Complex64],
) -> Result<Vec<Vec<Complex64>>> {
    let m = maps[0].block_size();
    if load.len() != m {
        return Err(CfemError::dim("load size differs from block size"));
    }
    let mut diag = vec![CMat::zeros(m, m); maps.len() + 1];
    let mut lower = Vec::with_capacity(maps.len());
    let mut upper = Vec::with_capacity(maps.len());
    for (i, k) in maps.iter().enumerate() {
        diag[i] += &k.k00;
        diag[i + 1] += &k.kll;
        upper.push(k.k0l.clone());
        lower.push(k.kl0.clone());
    }
    let a = BlockTridiagonalMatrix::new(diag, lower, upper)?;
    let mut rhs = vec![Complex64::new(0.0, 0.0); a.dim()];
    rhs[..m].copy_from_slice(load);
    let x = a.factor()?.solve_vec(&rhs)?;
    Ok(x.chunks(m).map(<[Complex64]>::to_vec).collect())
}
