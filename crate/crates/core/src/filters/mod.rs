//! Differentiable maps from a raw synthesized field to a manufacturable one:
//! logistic bounding, ordered multi-material SIMP interpolation and radius
//! based density filtering.

mod density;
mod simp;

pub use density::{density_filter_apply, density_filter_chain, DensityFilterKernel};
pub use simp::{ordered_simp, Material, MaterialSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("invalid logistic bounds: {0}")]
    Bounds(String),
    #[error("invalid material set: {0}")]
    Materials(String),
    #[error("invalid density filter: {0}")]
    Kernel(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// `l(x) = lower + (upper - lower) / (1 + exp(-kappa x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticBounds {
    pub lower: f64,
    pub upper: f64,
    pub kappa: f64,
}

impl LogisticBounds {
    pub fn new(lower: f64, upper: f64, kappa: f64) -> Result<Self, FilterError> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(FilterError::Bounds(format!("need lower < upper, got [{lower}, {upper}]")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(FilterError::Bounds(format!("steepness must be positive, got {kappa}")));
        }
        Ok(Self { lower, upper, kappa })
    }

    /// Bounds with the default gentle slope `kappa = 6 / (upper - lower)`.
    pub fn with_default_slope(lower: f64, upper: f64) -> Result<Self, FilterError> {
        Self::new(lower, upper, 6.0 / (upper - lower))
    }

    fn sigmoid(&self, x: f64) -> f64 {
        let t = self.kappa * x;
        if t >= 0.0 {
            1.0 / (1.0 + (-t).exp())
        } else {
            let e = t.exp();
            e / (1.0 + e)
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.lower + (self.upper - self.lower) * self.sigmoid(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let s = self.sigmoid(x);
        self.kappa * (self.upper - self.lower) * s * (1.0 - s)
    }

    pub fn apply(&self, field: &[f64]) -> Vec<f64> {
        field.iter().map(|&x| self.value(x)).collect()
    }

    pub fn derivatives(&self, field: &[f64]) -> Vec<f64> {
        field.iter().map(|&x| self.derivative(x)).collect()
    }
}

pub fn logistic_bound(x: f64, bounds: &LogisticBounds) -> f64 {
    bounds.value(x)
}

pub fn logistic_bound_grad(x: f64, bounds: &LogisticBounds) -> f64 {
    bounds.derivative(x)
}
