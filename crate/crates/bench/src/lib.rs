//! Benchmark fixtures shared by the criterion targets.

use slidebasis::filters::LogisticBounds;
use slidebasis::optimize::ReducedProblem;
use slidebasis::rocket::{chamber_grid, default_burn_duration, make_target_profile, RocketDesign, RocketParams, TargetKind};
use slidebasis::spectral::{assemble_laplacian, EigenOptions};
use slidebasis::topopt::{cantilever_model, FemModel};
use slidebasis::{BasisBuilder, Domain, LaplacianMatrix, QuadGrid};

pub fn rocket_grid(n_r: usize, n_z: usize) -> QuadGrid {
    chamber_grid(&RocketParams::default(), n_r, n_z).expect("chamber grid")
}

pub fn grid_laplacian(n_r: usize, n_z: usize) -> LaplacianMatrix {
    assemble_laplacian(&rocket_grid(n_r, n_z).face_adjacency().expect("adjacency"))
}

/// Two-step matching problem on an `n_r x n_z` grid with a fixed target scale.
pub fn rocket_problem(n_r: usize, n_z: usize) -> ReducedProblem<RocketDesign> {
    let params = RocketParams::default();
    let grid = rocket_grid(n_r, n_z);
    let bounds = LogisticBounds::with_default_slope(0.002, 0.012).expect("bounds");
    let duration = default_burn_duration(&params, &bounds);
    let target = make_target_profile(TargetKind::TwoStep, duration, 2.0e3, 2.0, 40).expect("target");
    let design = RocketDesign::new(grid, params, bounds, target).expect("design");
    let builder = BasisBuilder::new(grid_laplacian(n_r, n_z), EigenOptions::default()).expect("builder");
    ReducedProblem::spectral(design, builder).expect("problem")
}

/// The shipped cantilever slab at `cells` resolution.
pub fn cantilever(cells: [usize; 3]) -> FemModel {
    cantilever_model(cells, [3.0, 0.5, 1.0], 1.0e3, 0.3).expect("cantilever")
}
