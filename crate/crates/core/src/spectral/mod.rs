//! Combinatorial Laplacian of the element dual graph and its ordered
//! smallest-eigenvalue basis.
//!
//! A material field over `n_e` elements is parameterized as `F = B w`, where
//! the columns of `B` are the Laplacian eigenvectors ordered from low to high
//! frequency. Columns can be appended later without disturbing the ones
//! already in use.

mod basis;
mod cache;
mod eigen;
mod laplacian;

pub use basis::{reduce_gradient, synthesize_field, BasisBuilder, SpectralBasis};
pub use cache::{domain_hash, load_basis, save_basis};
pub use eigen::{extend_basis, smallest_eigenpairs, EigenOptions, Eigensolver};
pub use laplacian::{assemble_laplacian, LaplacianMatrix};

use thiserror::Error;

use crate::sparse::SolveError;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("requested {requested} eigenpairs but only {available} are available")]
    InvalidCount { requested: usize, available: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("eigensolver did not converge: {converged}/{wanted} pairs, worst residual {residual:e}")]
    NotConverged {
        converged: usize,
        wanted: usize,
        residual: f64,
    },
    #[error("shift-invert factorization failed: {0}")]
    Factorization(#[from] SolveError),
    #[error("basis cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
