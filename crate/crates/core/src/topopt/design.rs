use serde::{Deserialize, Serialize};

use super::fem::{compliance, FemModel};
use super::TopOptError;
use crate::filters::{DensityFilterKernel, LogisticBounds, MaterialSet};
use crate::mesh::Domain;
use crate::optimize::{Evaluation, FieldProblem, Gradient, ProblemError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToPoConfig {
    /// Allowed mass fraction `m / m_0`.
    pub m_frac: f64,
    pub materials: MaterialSet,
    /// Density-filter radius; `None` uses 1.5 x the mean edge length and
    /// `Some(0.0)` disables filtering.
    pub filter_radius: Option<f64>,
    /// Stiffness floor added to every element, relative to the stiffest
    /// material.
    pub min_stiffness_ratio: f64,
    pub nu: f64,
    pub solver_tol: f64,
}

impl Default for ToPoConfig {
    fn default() -> Self {
        Self {
            m_frac: 0.5,
            materials: MaterialSet::beam(),
            filter_radius: None,
            min_stiffness_ratio: 1e-9,
            nu: 0.3,
            solver_tol: 1e-8,
        }
    }
}

impl ToPoConfig {
    pub fn validate(&self) -> Result<(), TopOptError> {
        if !(self.m_frac > 0.0 && self.m_frac <= 1.0) {
            return Err(TopOptError::Config(format!("m_frac must lie in (0, 1], got {}", self.m_frac)));
        }
        if let Some(r) = self.filter_radius {
            if !(r >= 0.0) {
                return Err(TopOptError::Config(format!("filter radius must be non-negative, got {r}")));
            }
        }
        if !(self.min_stiffness_ratio >= 0.0) {
            return Err(TopOptError::Config("min_stiffness_ratio must be non-negative".into()));
        }
        if !(self.solver_tol > 0.0) {
            return Err(TopOptError::Config("solver_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Intermediate fields of one evaluation.
#[derive(Debug, Clone)]
pub struct TopOptState {
    /// Logistic-bounded densities.
    pub rho: Vec<f64>,
    /// Filtered densities.
    pub filtered: Vec<f64>,
    pub moduli: Vec<f64>,
    pub displacements: Vec<f64>,
    pub compliance: f64,
    pub mass_fraction: f64,
}

/// Compliance minimization under a mass-fraction limit. Pipeline:
/// raw field, logistic bound to the material density range, density
/// filter, ordered SIMP, nested linear solve.
#[derive(Debug, Clone)]
pub struct TopOptDesign {
    model: FemModel,
    cfg: ToPoConfig,
    bounds: LogisticBounds,
    kernel: Option<DensityFilterKernel>,
    volumes: Vec<f64>,
    m0: f64,
}

impl TopOptDesign {
    pub fn new(model: FemModel, cfg: ToPoConfig) -> Result<Self, TopOptError> {
        cfg.validate()?;
        let mats = &cfg.materials;
        let bounds = LogisticBounds::with_default_slope(mats.min_density(), mats.max_density())?;
        let radius = cfg.filter_radius.unwrap_or_else(|| 1.5 * model.mesh().mean_edge_length());
        let kernel = if radius > 0.0 {
            Some(DensityFilterKernel::new(&model.mesh().element_centroids(), radius)?)
        } else {
            None
        };
        let volumes = model.mesh().element_measures();
        let m0 = mats.max_density() * volumes.iter().sum::<f64>();
        let model = model.with_solver_tol(cfg.solver_tol);
        Ok(Self {
            model,
            cfg,
            bounds,
            kernel,
            volumes,
            m0,
        })
    }

    pub fn model(&self) -> &FemModel {
        &self.model
    }

    pub fn config(&self) -> &ToPoConfig {
        &self.cfg
    }

    pub fn bounds(&self) -> &LogisticBounds {
        &self.bounds
    }

    pub fn filter_radius(&self) -> f64 {
        self.kernel.as_ref().map_or(0.0, DensityFilterKernel::radius)
    }

    /// `sum rho_e vol_e / m_0`.
    pub fn mass_fraction(&self, densities: &[f64]) -> f64 {
        densities.iter().zip(&self.volumes).map(|(r, v)| r * v).sum::<f64>() / self.m0
    }

    fn filter(&self, rho: &[f64]) -> Result<Vec<f64>, TopOptError> {
        match &self.kernel {
            Some(k) => Ok(k.apply(rho)?),
            None => Ok(rho.to_vec()),
        }
    }

    fn floor(&self) -> f64 {
        self.cfg.min_stiffness_ratio * self.cfg.materials.max_modulus()
    }

    pub fn forward(&self, field: &[f64]) -> Result<TopOptState, TopOptError> {
        if field.len() != self.model.n_elements() {
            return Err(TopOptError::Dimension {
                expected: self.model.n_elements(),
                got: field.len(),
            });
        }
        let rho = self.bounds.apply(field);
        let filtered = self.filter(&rho)?;
        let floor = self.floor();
        let moduli: Vec<f64> = filtered.iter().map(|&r| self.cfg.materials.ordered_simp(r).0 + floor).collect();
        let displacements = self.model.solve_displacements(&moduli)?;
        let c = compliance(&displacements, self.model.loads());
        Ok(TopOptState {
            mass_fraction: self.mass_fraction(&filtered),
            rho,
            filtered,
            moduli,
            displacements,
            compliance: c,
        })
    }

    /// Field-space gradients of compliance and of `m / m_0`.
    pub fn field_gradients(&self, field: &[f64], state: &TopOptState) -> Result<(Vec<f64>, Vec<f64>), TopOptError> {
        let energies = self.model.element_energies(&state.displacements);
        let dc_filtered: Vec<f64> = state
            .filtered
            .iter()
            .zip(&energies)
            .map(|(&r, &w)| -self.cfg.materials.ordered_simp(r).1 * w)
            .collect();
        let dm_filtered: Vec<f64> = self.volumes.iter().map(|v| v / self.m0).collect();
        let (dc_rho, dm_rho) = match &self.kernel {
            Some(k) => (k.chain(&dc_filtered)?, k.chain(&dm_filtered)?),
            None => (dc_filtered, dm_filtered),
        };
        let dl = self.bounds.derivatives(field);
        Ok((
            dc_rho.iter().zip(&dl).map(|(a, b)| a * b).collect(),
            dm_rho.iter().zip(&dl).map(|(a, b)| a * b).collect(),
        ))
    }

    fn evaluation(&self, state: &TopOptState) -> Evaluation {
        Evaluation {
            objective: state.compliance,
            constraints: vec![state.mass_fraction - self.cfg.m_frac],
        }
    }
}

fn problem_error(e: TopOptError) -> ProblemError {
    ProblemError::Evaluation(e.to_string())
}

impl FieldProblem for TopOptDesign {
    fn n_elements(&self) -> usize {
        self.model.n_elements()
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn evaluate_field(&self, field: &[f64]) -> Result<Evaluation, ProblemError> {
        let state = self.forward(field).map_err(problem_error)?;
        Ok(self.evaluation(&state))
    }

    fn has_field_gradient(&self) -> bool {
        true
    }

    fn evaluate_field_with_gradient(&self, field: &[f64]) -> Result<(Evaluation, Gradient), ProblemError> {
        let state = self.forward(field).map_err(problem_error)?;
        let (dc, dm) = self.field_gradients(field, &state).map_err(problem_error)?;
        Ok((
            self.evaluation(&state),
            Gradient {
                objective: dc,
                constraints: vec![dm],
            },
        ))
    }
}
