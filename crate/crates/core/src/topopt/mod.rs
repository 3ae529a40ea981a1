//! Multi-material compliance minimization on linear tetrahedra.

mod design;
mod element;
mod fem;
mod mesh;

pub use design::{ToPoConfig, TopOptDesign, TopOptState};
pub use element::{element_stiffness, isotropic_elasticity, shape_gradients, strain_matrix, ElementMatrix, StrainMatrix};
pub use fem::{compliance, FemModel, Support};
pub use mesh::{box_tet_mesh, boundary_faces, clamp_nodes, surface_load};

use crate::filters::FilterError;
use crate::mesh::MeshError;
use crate::sparse::SolveError;

#[derive(Debug, thiserror::Error)]
pub enum TopOptError {
    #[error("expected {expected} entries, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate tetrahedron")]
    DegenerateElement,
    #[error("invalid topology-optimization setup: {0}")]
    Config(String),
    #[error("linear solve failed: {0}")]
    Solve(#[from] SolveError),
    #[error("linear solve residual {0:e} exceeds tolerance")]
    Residual(f64),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Slab `[0, l] x [0, w] x [0, h]` clamped at `x = 0` with a downward
/// tip traction of total force `load` on the face `x = l`.
pub fn cantilever_model(n: [usize; 3], size: [f64; 3], load: f64, nu: f64) -> Result<FemModel, TopOptError> {
    let mesh = box_tet_mesh(n, size)?;
    let supports = clamp_nodes(&mesh, |p| p[0] == 0.0);
    let l = size[0];
    let loads = surface_load(&mesh, |p| p[0] == l, [0.0, 0.0, -load])?;
    FemModel::new(mesh, nu, supports, loads)
}
