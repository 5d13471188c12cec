//! Supporting linear-algebra and root-finding kernels.
//!
//! Everything here is stateless; factorization objects are immutable once
//! built and can be shared between threads.

mod block;
mod dense;
mod eig;
mod mp;
mod poly;
mod schur;
mod tridiag;

pub use block::{BlockTridiagonalLu, BlockTridiagonalMatrix};
pub use dense::{dense_solve, frobenius, mat_from_rows, matvec, scaled, vec_norm};
pub use eig::{generalized_eig_dense, quadratic_eig_dense, GeneralizedEig, QuadraticEig};
pub use mp::refine_integer_poly_roots;
pub use poly::{companion_eigenvalues, horner, poly_roots};
pub use schur::{schur_complement_boundary, BlockDtn};
pub use tridiag::{TridiagonalLu, TridiagonalMatrix};
