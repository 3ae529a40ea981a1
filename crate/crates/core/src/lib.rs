//! Reduced-order material design with Laplacian eigenbases.
//!
//! Material fields over a mesh are written as `F = B w`, where `B` holds the
//! low-frequency eigenvectors of the element dual-graph Laplacian. The
//! sliding-window optimizer explores `w` a few coefficients at a time, moving
//! toward higher frequencies as long as the objective keeps improving.
//!
//! Two physics back-ends are included: axisymmetric solid-propellant burnback
//! with thrust-profile matching ([`rocket`]) and multi-material compliance
//! topology optimization on linear tetrahedra ([`topopt`]).

pub mod filters;
pub mod io;
pub mod mesh;
pub mod optimize;
pub mod rocket;
pub mod sparse;
pub mod spectral;
pub mod topopt;

pub use mesh::{Domain, ElementAdjacency, QuadGrid, TetMesh};

pub use spectral::{BasisBuilder, LaplacianMatrix, SpectralBasis};
pub use optimize::{DesignProblem, FieldProblem, ReducedProblem, SlideTrace, SlidingConfig};
