use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid sliding configuration: {0}")]
    Invalid(String),
}

/// Minimum objective decrease for a slide to be accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Epsilon {
    /// Fraction of the objective at the zero weight vector.
    Relative(f64),
    Absolute(f64),
}

impl Epsilon {
    pub fn resolve(&self, f_initial: f64) -> f64 {
        match *self {
            Epsilon::Relative(r) => r * f_initial.abs().max(f64::MIN_POSITIVE),
            Epsilon::Absolute(a) => a,
        }
    }
}

/// How the inner solver obtains second-order information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianMode {
    /// Finite-difference Hessian of the Lagrangian at every iterate. Costs
    /// `m(m+1)/2 + m + 1` evaluations for `m` active weights.
    FiniteDifference,
    /// Quasi-Newton updates from gradient differences.
    Bfgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlidingConfig {
    pub n_opt: usize,
    pub n_s: usize,
    pub s_max: usize,
    pub epsilon: Epsilon,
    pub rng_seed: u64,
    pub inner_max_iter: usize,
    /// Relative forward-difference step for gradients.
    pub fd_step: f64,
    /// Relative step for finite-difference Hessians.
    pub hessian_step: f64,
    pub init_scale: f64,
    pub zero_first_slide: bool,
    /// Stop once `DesignProblem::progress` is at or below this value.
    pub converged_tol: Option<f64>,
    /// Cap on the number of window optimizations.
    pub max_optimizations: Option<usize>,
    pub hessian: HessianMode,
    /// Ignore analytic gradients even when the problem provides them.
    pub black_box: bool,
    /// Step-size tolerance of the inner solver, relative to `1 + |w|_inf`.
    pub inner_tol: f64,
    pub feasibility_tol: f64,
}

impl Default for SlidingConfig {
    fn default() -> Self {
        Self::with_window(20)
    }
}

impl SlidingConfig {
    /// Defaults for a given window size; the slide amount is `ceil(0.75 n_opt)`.
    pub fn with_window(n_opt: usize) -> Self {
        Self {
            n_opt,
            n_s: default_slide(n_opt),
            s_max: 2,
            epsilon: Epsilon::Relative(1e-3),
            rng_seed: 0,
            inner_max_iter: 50,
            fd_step: 1e-6,
            hessian_step: 1e-4,
            init_scale: 0.01,
            zero_first_slide: false,
            converged_tol: None,
            max_optimizations: None,
            hessian: HessianMode::FiniteDifference,
            black_box: false,
            inner_tol: 1e-9,
            feasibility_tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.n_opt == 0 || self.n_s == 0 || self.n_s >= self.n_opt {
            return bad("need 0 < n_s < n_opt");
        }
        if self.s_max == 0 {
            return bad("s_max must be at least 1");
        }
        let eps = match self.epsilon {
            Epsilon::Relative(v) | Epsilon::Absolute(v) => v,
        };
        if !(eps > 0.0 && eps.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return bad("fd_step must be positive");
        }
        if !(self.hessian_step > 0.0 && self.hessian_step.is_finite()) {
            return bad("hessian_step must be positive");
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return bad("init_scale must be non-negative");
        }
        if self.inner_max_iter == 0 {
            return bad("inner_max_iter must be at least 1");
        }
        if !(self.inner_tol > 0.0) || !(self.feasibility_tol >= 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_optimizations == Some(0) {
            return bad("max_optimizations must be at least 1");
        }
        Ok(())
    }
}

pub(crate) fn default_slide(n_opt: usize) -> usize {
    (3 * n_opt).div_ceil(4)
}
