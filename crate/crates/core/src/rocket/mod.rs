//! Axisymmetric solid-propellant burnback and thrust-profile matching.
//!
//! The grain occupies the `(r, z)` rectangle of a [`QuadGrid`]. Arrival
//! times are measured backwards from the casing, so the burning surface at
//! time `t` is the level set `phi = t_burn - t`.

mod design;
mod eikonal;
mod front;
mod target;
mod thrust;

pub use design::{default_burn_duration, uniform_reference_thrust, RocketDesign};
pub use eikonal::{eikonal_residual, solve_eikonal, solve_eikonal_with_sources, ArrivalTimeField};
pub use front::{extract_front, revolved_flux_integral, BurnFrontCurve, FrontSegment};
pub use target::{make_target_profile, read_profile_csv, write_profile_csv, TargetKind};
pub use thrust::{
    annulus_burn_time, burn_mask, inner_surface_radii, simulate_thrust_profile, thrust_at, thrust_samples, uniform_times,
    BurnSimulation, RocketParams, ThrustProfile,
};

use crate::mesh::QuadGrid;

#[derive(Debug, thiserror::Error)]
pub enum RocketError {
    #[error("expected {expected} cells, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("burn rate in cell {cell} must be positive and finite, got {value}")]
    InvalidField { cell: usize, value: f64 },
    #[error("invalid source node {0}")]
    InvalidSource(usize),
    #[error("invalid rocket parameters: {0}")]
    Params(String),
    #[error("invalid thrust profile: {0}")]
    Profile(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

/// Grid over the full cross-section `[0, r_out] x [0, length]`.
pub fn chamber_grid(params: &RocketParams, n_r: usize, n_z: usize) -> Result<QuadGrid, RocketError> {
    params.validate()?;
    QuadGrid::for_chamber(n_r, n_z, 0.0, params.r_out, params.length).map_err(|e| RocketError::Params(e.to_string()))
}
