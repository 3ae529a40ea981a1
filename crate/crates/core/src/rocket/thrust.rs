use serde::{Deserialize, Serialize};

use super::{extract_front, revolved_flux_integral, solve_eikonal, ArrivalTimeField, RocketError};
use crate::mesh::QuadGrid;

/// Lumped ballistics constants and chamber geometry (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RocketParams {
    /// Thrust coefficient.
    pub c_f: f64,
    /// Throat area.
    pub a_t: f64,
    /// Exhaust speed of sound.
    pub c_s: f64,
    pub rho_p: f64,
    pub p_ref: f64,
    /// Pressure exponent of the burn-rate law.
    pub n: f64,
    /// Specific-impulse term of the thrust closure. `None` uses the value
    /// that balances inflow and outflow, `c_f * c_s`.
    pub isp: Option<f64>,
    pub r_in: f64,
    pub r_out: f64,
    pub length: f64,
}

impl Default for RocketParams {
    fn default() -> Self {
        Self {
            c_f: 1.5,
            a_t: 5e-4,
            c_s: 1000.0,
            rho_p: 1750.0,
            p_ref: 6.9e6,
            n: 0.35,
            isp: None,
            r_in: 0.03,
            r_out: 0.1,
            length: 0.5,
        }
    }
}

impl RocketParams {
    pub fn validate(&self) -> Result<(), RocketError> {
        let positive = [
            ("c_f", self.c_f),
            ("a_t", self.a_t),
            ("c_s", self.c_s),
            ("rho_p", self.rho_p),
            ("p_ref", self.p_ref),
            ("r_out", self.r_out),
            ("length", self.length),
            ("isp", self.isp.unwrap_or(1.0)),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RocketError::Params(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.n > 0.0 && self.n < 1.0) {
            return Err(RocketError::Params(format!("exponent n must lie in (0, 1), got {}", self.n)));
        }
        if !(self.r_in >= 0.0 && self.r_in < self.r_out) {
            return Err(RocketError::Params(format!("need 0 <= r_in < r_out, got {} and {}", self.r_in, self.r_out)));
        }
        Ok(())
    }

    /// Specific impulse for which inflow and nozzle outflow balance.
    pub fn consistent_isp(&self) -> f64 {
        self.c_f * self.c_s
    }

    pub fn isp(&self) -> f64 {
        self.isp.unwrap_or_else(|| self.consistent_isp())
    }

    /// Chamber pressure sustaining thrust `th`.
    pub fn chamber_pressure(&self, th: f64) -> f64 {
        th / (self.c_f * self.a_t)
    }

    /// Nozzle mass flow at chamber pressure `p_c`.
    pub fn mass_flow_out(&self, p_c: f64) -> f64 {
        self.a_t * p_c / self.c_s
    }

    /// Mass generation at chamber pressure `p_c`, given the reference flux
    /// integral `S = sum rho_p rate_ref dA`.
    pub fn mass_flow_in(&self, p_c: f64, flux: f64) -> f64 {
        (p_c / self.p_ref).powf(self.n) * flux
    }
}

/// Thrust from the reference-rate flux integral:
/// `(p_ref^-n isp^(1-n) a_t^-n c_s^n S)^(1/(1-n))`.
pub fn thrust_at(flux: f64, params: &RocketParams) -> Result<f64, RocketError> {
    let n = params.n;
    if (1.0 - n).abs() < 1e-12 {
        return Err(RocketError::Params("exponent n = 1 makes the thrust closure singular".into()));
    }
    if flux <= 0.0 {
        return Ok(0.0);
    }
    let k = params.p_ref.powf(-n) * params.isp().powf(1.0 - n) * params.a_t.powf(-n) * params.c_s.powf(n);
    Ok((k * flux).powf(1.0 / (1.0 - n)))
}

/// Uniformly sampled thrust curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThrustProfile {
    pub times: Vec<f64>,
    pub thrust: Vec<f64>,
}

impl ThrustProfile {
    pub fn new(times: Vec<f64>, thrust: Vec<f64>) -> Result<Self, RocketError> {
        if times.len() != thrust.len() || times.len() < 2 {
            return Err(RocketError::Profile("need at least two (time, thrust) samples".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(RocketError::Profile("times must be strictly increasing".into()));
        }
        if thrust.iter().any(|t| !(*t >= 0.0)) {
            return Err(RocketError::Profile("thrust must be non-negative".into()));
        }
        Ok(Self { times, thrust })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn mean(&self) -> f64 {
        self.thrust.iter().sum::<f64>() / self.thrust.len() as f64
    }

    /// `100 * mean|a - b| / mean|b|`, with `b = reference`.
    pub fn error_percent(&self, reference: &ThrustProfile) -> f64 {
        let num: f64 = self.thrust.iter().zip(&reference.thrust).map(|(a, b)| (a - b).abs()).sum();
        let den: f64 = reference.thrust.iter().map(|b| b.abs()).sum();
        100.0 * num / den
    }

    pub fn squared_error(&self, reference: &ThrustProfile) -> f64 {
        self.thrust.iter().zip(&reference.thrust).map(|(a, b)| (a - b).powi(2)).sum()
    }
}

pub fn uniform_times(t_burn: f64, n_samples: usize) -> Vec<f64> {
    (0..n_samples).map(|j| t_burn * j as f64 / (n_samples - 1) as f64).collect()
}

/// Result of one forward burn.
#[derive(Debug, Clone)]
pub struct BurnSimulation {
    pub phi: ArrivalTimeField,
    pub t_burn: f64,
    pub profile: ThrustProfile,
    /// Ignition radius per axial node row.
    pub inner_radii: Vec<f64>,
    /// Rows in which no node reaches `t_burn`.
    pub degenerate_rows: Vec<usize>,
}

/// Largest arrival time over the propellant annulus `r >= r_in`, with the
/// value at `r_in` interpolated along each row.
pub fn annulus_burn_time(grid: &QuadGrid, phi: &ArrivalTimeField, r_in: f64) -> f64 {
    let (r0, _) = grid.origin();
    let s = ((r_in - r0) / grid.dr()).clamp(0.0, grid.n_r() as f64);
    let i0 = (s.floor() as usize).min(grid.n_r() - 1);
    let t = s - i0 as f64;
    let mut best = f64::NEG_INFINITY;
    for j in 0..=grid.n_z() {
        let at_r_in = phi.at(i0, j) * (1.0 - t) + phi.at(i0 + 1, j) * t;
        best = best.max(at_r_in);
        for i in i0 + 1..=grid.n_r() {
            best = best.max(phi.at(i, j));
        }
    }
    best
}

/// For each axial node row, the largest radius with `phi >= t_burn`,
/// interpolated between nodes. Rows that never reach `t_burn` are
/// extrapolated linearly from the first two nodes and listed separately.
pub fn inner_surface_radii(grid: &QuadGrid, phi: &ArrivalTimeField, t_burn: f64) -> (Vec<f64>, Vec<usize>) {
    let (r0, _) = grid.origin();
    let mut radii = Vec::with_capacity(grid.n_z() + 1);
    let mut degenerate = Vec::new();
    for j in 0..=grid.n_z() {
        let found = (0..=grid.n_r()).rev().find(|&i| phi.at(i, j) >= t_burn);
        let r = match found {
            None => {
                // Burned through before t_burn: extrapolate below r0.
                degenerate.push(j);
                let (a, b) = (phi.at(0, j), phi.at(1, j));
                if a > b {
                    r0 + (a - t_burn) / (a - b) * grid.dr()
                } else {
                    r0
                }
            }
            Some(i) if i == grid.n_r() => grid.r_max(),
            Some(i) => {
                let (a, b) = (phi.at(i, j), phi.at(i + 1, j));
                r0 + (i as f64 + (a - t_burn) / (a - b)) * grid.dr()
            }
        };
        radii.push(r);
    }
    (radii, degenerate)
}

/// Thrust at each sampling time for a precomputed arrival-time field; the
/// front at time `t` is the level set `phi = t_burn - t`.
pub fn thrust_samples(
    grid: &QuadGrid,
    phi: &ArrivalTimeField,
    burn_rate: &[f64],
    params: &RocketParams,
    t_burn: f64,
    times: &[f64],
) -> Result<Vec<f64>, RocketError> {
    times
        .iter()
        .map(|&t| {
            let front = extract_front(grid, phi, t_burn - t);
            thrust_at(revolved_flux_integral(&front, burn_rate, params.rho_p), params)
        })
        .collect()
}

/// Forward burn of a reference burn-rate field. `t_burn` defaults to the
/// largest arrival time over the propellant annulus.
pub fn simulate_thrust_profile(
    grid: &QuadGrid,
    burn_rate: &[f64],
    params: &RocketParams,
    n_samples: usize,
    t_burn: Option<f64>,
) -> Result<BurnSimulation, RocketError> {
    if n_samples < 2 {
        return Err(RocketError::Profile("need at least two samples".into()));
    }
    params.validate()?;
    let phi = solve_eikonal(grid, burn_rate)?;
    let t_burn = t_burn.unwrap_or_else(|| annulus_burn_time(grid, &phi, params.r_in));
    if !(t_burn > 0.0) {
        return Err(RocketError::Profile(format!("burn time must be positive, got {t_burn}")));
    }
    simulate_with_phi(grid, phi, burn_rate, params, &uniform_times(t_burn, n_samples), t_burn)
}

pub(crate) fn simulate_with_phi(
    grid: &QuadGrid,
    phi: ArrivalTimeField,
    burn_rate: &[f64],
    params: &RocketParams,
    times: &[f64],
    t_burn: f64,
) -> Result<BurnSimulation, RocketError> {
    let thrust = thrust_samples(grid, &phi, burn_rate, params, t_burn, times)?;
    let (inner_radii, degenerate_rows) = inner_surface_radii(grid, &phi, t_burn);
    Ok(BurnSimulation {
        t_burn,
        profile: ThrustProfile {
            times: times.to_vec(),
            thrust,
        },
        phi,
        inner_radii,
        degenerate_rows,
    })
}

/// Cells that cannot influence the burn within `[0, t_burn]`: every corner
/// arrives later than any node adjacent to the burned region.
pub fn burn_mask(grid: &QuadGrid, phi: &ArrivalTimeField, t_burn: f64) -> Vec<bool> {
    let (nr, nz) = (grid.n_r() + 1, grid.n_z() + 1);
    let mut tau = f64::NEG_INFINITY;
    for j in 0..nz {
        for i in 0..nr {
            if phi.at(i, j) > t_burn {
                continue;
            }
            tau = tau.max(phi.at(i, j));
            let neighbors = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
            for (a, b) in neighbors {
                if a < nr && b < nz {
                    tau = tau.max(phi.at(a, b));
                }
            }
        }
    }
    (0..grid.n_r() * grid.n_z())
        .map(|c| {
            let (i, j) = grid.cell_coords(c);
            [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
                .iter()
                .all(|&(a, b)| phi.at(a, b) > tau)
        })
        .collect()
}
