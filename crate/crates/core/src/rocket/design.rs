use super::thrust::simulate_with_phi;
use super::{burn_mask, solve_eikonal, uniform_times, BurnSimulation, RocketError, RocketParams, ThrustProfile};
use crate::filters::LogisticBounds;
use crate::mesh::QuadGrid;
use crate::optimize::{Evaluation, FieldProblem, ProblemError};

/// Thrust matching over a bounded burn-rate field.
///
/// The raw field passes through `bounds` to give `rate` in length/time.
/// Objective `sum_j (th(t_j) - target_j)^2`; one constraint per axial node
/// row, `(r_in + margin - r_b) / dr <= 0`, keeps the ignition surface
/// inside the bore.
#[derive(Debug, Clone)]
pub struct RocketDesign {
    grid: QuadGrid,
    params: RocketParams,
    bounds: LogisticBounds,
    target: ThrustProfile,
    margin: f64,
}

impl RocketDesign {
    pub fn new(grid: QuadGrid, params: RocketParams, bounds: LogisticBounds, target: ThrustProfile) -> Result<Self, RocketError> {
        params.validate()?;
        if !(bounds.lower > 0.0) {
            return Err(RocketError::Params(format!("burn-rate lower bound must be positive, got {}", bounds.lower)));
        }
        if target.times[0] < 0.0 || !(target.duration() > 0.0) {
            return Err(RocketError::Profile("target times must lie in [0, t_burn] with t_burn > 0".into()));
        }
        let margin = grid.dr();
        Ok(Self {
            grid,
            params,
            bounds,
            target,
            margin,
        })
    }

    /// Sets the clearance between the ignition surface and `r_in`.
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn grid(&self) -> &QuadGrid {
        &self.grid
    }

    pub fn params(&self) -> &RocketParams {
        &self.params
    }

    pub fn bounds(&self) -> &LogisticBounds {
        &self.bounds
    }

    pub fn target(&self) -> &ThrustProfile {
        &self.target
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn t_burn(&self) -> f64 {
        self.target.duration()
    }

    pub fn burn_rates(&self, field: &[f64]) -> Vec<f64> {
        self.bounds.apply(field)
    }

    /// Forward burn of a raw field, sampled at the target times.
    pub fn simulate(&self, field: &[f64]) -> Result<BurnSimulation, RocketError> {
        let rate = self.burn_rates(field);
        let phi = solve_eikonal(&self.grid, &rate)?;
        simulate_with_phi(&self.grid, phi, &rate, &self.params, &self.target.times, self.t_burn())
    }

    pub fn constraints(&self, inner_radii: &[f64]) -> Vec<f64> {
        let dr = self.grid.dr();
        inner_radii.iter().map(|r| (self.params.r_in + self.margin - r) / dr).collect()
    }

    /// Cells that stay unburned over `[0, t_burn]`.
    pub fn unburned_mask(&self, sim: &BurnSimulation) -> Vec<bool> {
        burn_mask(&self.grid, &sim.phi, sim.t_burn)
    }

    fn evaluation(&self, sim: &BurnSimulation) -> Evaluation {
        Evaluation {
            objective: sim.profile.squared_error(&self.target),
            constraints: self.constraints(&sim.inner_radii),
        }
    }
}

impl FieldProblem for RocketDesign {
    fn n_elements(&self) -> usize {
        self.grid.n_r() * self.grid.n_z()
    }

    fn num_constraints(&self) -> usize {
        self.grid.n_z() + 1
    }

    fn evaluate_field(&self, field: &[f64]) -> Result<Evaluation, ProblemError> {
        if field.len() != self.n_elements() {
            return Err(ProblemError::Dimension {
                expected: self.n_elements(),
                got: field.len(),
            });
        }
        let sim = self.simulate(field).map_err(|e| ProblemError::Evaluation(e.to_string()))?;
        Ok(self.evaluation(&sim))
    }

    /// Average profile error in percent.
    fn field_progress(&self, field: &[f64]) -> Option<f64> {
        let sim = self.simulate(field).ok()?;
        Some(sim.profile.error_percent(&self.target))
    }
}

/// Burn time at which a uniform field at the bounds midpoint leaves a fifth
/// of the web unburned.
pub fn default_burn_duration(params: &RocketParams, bounds: &LogisticBounds) -> f64 {
    0.8 * (params.r_out - params.r_in) / (0.5 * (bounds.lower + bounds.upper))
}

/// Mean thrust of a uniform field at the bounds midpoint over `[0, t_burn]`.
pub fn uniform_reference_thrust(
    grid: &QuadGrid,
    params: &RocketParams,
    bounds: &LogisticBounds,
    t_burn: f64,
    n_samples: usize,
) -> Result<f64, RocketError> {
    let rate = vec![0.5 * (bounds.lower + bounds.upper); grid.n_r() * grid.n_z()];
    let phi = solve_eikonal(grid, &rate)?;
    let sim = simulate_with_phi(grid, phi, &rate, params, &uniform_times(t_burn, n_samples), t_burn)?;
    Ok(sim.profile.mean())
}
