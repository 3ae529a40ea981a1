//! Constrained optimization over basis weights.
//!
//! A [`DesignProblem`] maps a weight vector to an objective and inequality
//! constraints (`g_i <= 0` is feasible). [`slide_optimize`] runs the
//! sliding-window outer loop; each window is solved by [`inner_solve`], a
//! small dense SQP method that works from either analytic gradients or
//! finite differences.

mod config;
mod fd;
mod qp;
mod reduced;
mod sliding;
mod sqp;

use std::sync::atomic::{AtomicUsize, Ordering};

pub use config::{ConfigError, Epsilon, HessianMode, SlidingConfig};
pub use fd::{finite_difference_hessian, numerical_gradient, FdModel};
pub use qp::{solve_box_qp, BoxQpResult};
pub use reduced::{FieldProblem, Parameterization, ReducedProblem};
pub use sliding::{
    fixed_basis_optimize, initialize_weights, slide_optimize, slide_optimize_observed, total_basis, SlideError, SlideRecord, SlideTrace,
    StopReason,
};
pub use sqp::{inner_solve, InnerResult, Window};

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("expected {expected} weights, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("non-finite value at perturbed point (coordinate {0})")]
    NonFinite(usize),
    #[error("analytic gradient not available")]
    NoGradient,
    #[error("basis: {0}")]
    Basis(String),
}

/// Objective and constraint values at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub constraints: Vec<f64>,
}

impl Evaluation {
    pub fn is_finite(&self) -> bool {
        self.objective.is_finite() && self.constraints.iter().all(|g| g.is_finite())
    }

    /// Largest positive constraint value (0 when feasible).
    pub fn max_violation(&self) -> f64 {
        self.constraints.iter().fold(0.0f64, |m, &g| m.max(g))
    }
}

/// Derivatives of the objective and of each constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
}

impl Gradient {
    /// Restricts every derivative vector to `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Gradient {
        Gradient {
            objective: self.objective[range.clone()].to_vec(),
            constraints: self.constraints.iter().map(|g| g[range.clone()].to_vec()).collect(),
        }
    }
}

/// Black-box design problem over a weight vector whose length may grow.
///
/// Evaluations must be pure: the same weights always give the same values.
/// They may run concurrently.
pub trait DesignProblem: Sync {
    fn num_constraints(&self) -> usize;

    fn evaluate(&self, w: &[f64]) -> Result<Evaluation, ProblemError>;

    fn has_gradient(&self) -> bool {
        false
    }

    fn evaluate_with_gradient(&self, _w: &[f64]) -> Result<(Evaluation, Gradient), ProblemError> {
        Err(ProblemError::NoGradient)
    }

    /// Makes weight vectors of length `k` valid (e.g. by extending a basis).
    fn reserve(&mut self, _k: usize) -> Result<(), ProblemError> {
        Ok(())
    }

    /// Largest usable weight count, if bounded.
    fn max_weights(&self) -> Option<usize> {
        None
    }

    /// Application-level convergence metric; compared against
    /// `SlidingConfig::converged_tol`.
    fn progress(&self, _w: &[f64]) -> Option<f64> {
        None
    }
}

/// Thread-safe tally of problem evaluations.
#[derive(Debug, Default)]
pub struct EvalCounter {
    values: AtomicUsize,
    gradients: AtomicUsize,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn evaluations(&self) -> usize {
        self.values.load(Ordering::Relaxed)
    }

    pub fn gradient_evaluations(&self) -> usize {
        self.gradients.load(Ordering::Relaxed)
    }

    pub(crate) fn evaluate<P: DesignProblem + ?Sized>(&self, p: &P, w: &[f64]) -> Result<Evaluation, ProblemError> {
        self.values.fetch_add(1, Ordering::Relaxed);
        p.evaluate(w)
    }

    pub(crate) fn evaluate_with_gradient<P: DesignProblem + ?Sized>(
        &self,
        p: &P,
        w: &[f64],
    ) -> Result<(Evaluation, Gradient), ProblemError> {
        self.values.fetch_add(1, Ordering::Relaxed);
        self.gradients.fetch_add(1, Ordering::Relaxed);
        p.evaluate_with_gradient(w)
    }
}
