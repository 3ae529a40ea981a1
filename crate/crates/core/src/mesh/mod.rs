//! Discrete design domains and their face-sharing element adjacency (the dual graph).

mod adjacency;
mod quad;
mod tet;

pub use adjacency::ElementAdjacency;
pub use quad::QuadGrid;
pub use tet::TetMesh;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("face {0:?} is shared by more than two elements")]
    NonManifold([usize; 3]),
    #[error("element {index} is degenerate (signed volume {volume:e})")]
    Degenerate { index: usize, volume: f64 },
    #[error("mesh is not face-connected ({0} components)")]
    Disconnected(usize),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A meshed region whose elements carry one material value each.
pub trait Domain {
    /// Number of elements (cells or tetrahedra).
    fn n_elements(&self) -> usize;

    /// Elements sharing a face (an edge in 2D).
    fn face_adjacency(&self) -> Result<ElementAdjacency, MeshError>;

    /// Arithmetic mean of each element's corner vertices, padded to 3D.
    fn element_centroids(&self) -> Vec<[f64; 3]>;

    /// Area (2D) or volume (3D) of every element.
    fn element_measures(&self) -> Vec<f64>;
}
