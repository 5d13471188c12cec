//! Complex-length finite elements (CFEM) for stratified subdomains.
//!
//! Midpoint-integrated linear elements whose lengths are the reciprocal
//! pole locations of the diagonal Pade approximant of the exponential give
//! exponentially convergent Dirichlet-to-Neumann maps at the edges of a
//! subdomain. The crate is split by layer:
//!
//! - [`numerics`]: polynomial roots, tridiagonal and block-tridiagonal LU,
//!   Schur complements, dense generalized and quadratic eigensolvers.
//! - [`pade_grid`]: element lengths, orderings and the tabulated reference grids.
//! - [`scalar`]: the 1D scalar problem `-u'' + lambda u = 0`.
//! - [`layered`]: vertical semi-discretization and tensor-product 2D solves.
//! - [`elastic`]: in-plane elastodynamics on the same grids.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elastic;
mod error;
pub mod layered;
pub mod numerics;
pub mod pade_grid;
pub mod scalar;

pub use error::{CfemError, Result};
pub use num_complex::Complex64;

/// Shorthand for the dense complex matrices used throughout.
pub type CMat = faer::Mat<Complex64>;
