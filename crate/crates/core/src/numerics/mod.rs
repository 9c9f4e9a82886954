//! Deterministic dense linear algebra, curve fitting and random streams.

pub mod eigen;
pub mod fit;
pub mod matrix;
pub mod rng;

pub use eigen::{
    cholesky_solve, jacobi_eigen, pinv_apply, sym_eigendecompose, sym_eigenvalues, tridiagonal_eigen,
    EigenSystem, DEFAULT_PINV_TOL,
};
pub use fit::{linear_fit, loglog_fit, LinearFit};
pub use matrix::{axpy, dot, Matrix, SymMatrix};
pub use rng::{derive_substream, RngStream};
