use super::{DesignProblem, Evaluation, Gradient, ProblemError};
use crate::spectral::{BasisBuilder, SpectralBasis};

/// A design problem stated on a per-element field.
pub trait FieldProblem: Sync {
    fn n_elements(&self) -> usize;

    fn num_constraints(&self) -> usize;

    fn evaluate_field(&self, field: &[f64]) -> Result<Evaluation, ProblemError>;

    fn has_field_gradient(&self) -> bool {
        false
    }

    /// Values plus derivatives with respect to each field entry.
    fn evaluate_field_with_gradient(&self, _field: &[f64]) -> Result<(Evaluation, Gradient), ProblemError> {
        Err(ProblemError::NoGradient)
    }

    fn field_progress(&self, _field: &[f64]) -> Option<f64> {
        None
    }
}

/// How weights become a field.
#[derive(Debug, Clone)]
pub enum Parameterization {
    /// `F = B w` with a lazily extended Laplacian eigenbasis.
    Spectral(BasisBuilder),
    /// One weight per element (`B = I`); shorter weight vectors are padded
    /// with zeros.
    Identity(usize),
}

/// Wraps a [`FieldProblem`] as a [`DesignProblem`] over basis weights.
#[derive(Debug, Clone)]
pub struct ReducedProblem<P> {
    field: P,
    param: Parameterization,
}

impl<P: FieldProblem> ReducedProblem<P> {
    pub fn spectral(field: P, builder: BasisBuilder) -> Result<Self, ProblemError> {
        if builder.n() != field.n_elements() {
            return Err(ProblemError::Dimension {
                expected: field.n_elements(),
                got: builder.n(),
            });
        }
        Ok(Self {
            field,
            param: Parameterization::Spectral(builder),
        })
    }

    pub fn identity(field: P) -> Self {
        let n = field.n_elements();
        Self {
            field,
            param: Parameterization::Identity(n),
        }
    }

    pub fn field_problem(&self) -> &P {
        &self.field
    }

    pub fn into_field_problem(self) -> P {
        self.field
    }

    pub fn parameterization(&self) -> &Parameterization {
        &self.param
    }

    /// The eigenbasis computed so far (spectral parameterization only).
    pub fn basis(&self) -> Option<&SpectralBasis> {
        match &self.param {
            Parameterization::Spectral(b) => b.basis(),
            Parameterization::Identity(_) => None,
        }
    }

    pub fn synthesize(&self, w: &[f64]) -> Result<Vec<f64>, ProblemError> {
        match &self.param {
            Parameterization::Spectral(b) => {
                let basis = b.basis().ok_or(ProblemError::Dimension {
                    expected: 0,
                    got: w.len(),
                })?;
                basis
                    .synthesize_prefix(w)
                    .map_err(|_| ProblemError::Dimension {
                        expected: basis.k(),
                        got: w.len(),
                    })
            }
            Parameterization::Identity(n) => {
                if w.len() > *n {
                    return Err(ProblemError::Dimension {
                        expected: *n,
                        got: w.len(),
                    });
                }
                let mut f = w.to_vec();
                f.resize(*n, 0.0);
                Ok(f)
            }
        }
    }

    fn reduce(&self, df: &[f64], k: usize) -> Result<Vec<f64>, ProblemError> {
        match &self.param {
            Parameterization::Spectral(b) => b
                .basis()
                .expect("synthesize succeeded")
                .reduce_prefix(df, k)
                .map_err(|e| ProblemError::Basis(e.to_string())),
            Parameterization::Identity(_) => Ok(df[..k].to_vec()),
        }
    }
}

impl<P: FieldProblem> DesignProblem for ReducedProblem<P> {
    fn num_constraints(&self) -> usize {
        self.field.num_constraints()
    }

    fn evaluate(&self, w: &[f64]) -> Result<Evaluation, ProblemError> {
        self.field.evaluate_field(&self.synthesize(w)?)
    }

    fn has_gradient(&self) -> bool {
        self.field.has_field_gradient()
    }

    fn evaluate_with_gradient(&self, w: &[f64]) -> Result<(Evaluation, Gradient), ProblemError> {
        let (e, g) = self.field.evaluate_field_with_gradient(&self.synthesize(w)?)?;
        let k = w.len();
        let grad = Gradient {
            objective: self.reduce(&g.objective, k)?,
            constraints: g
                .constraints
                .iter()
                .map(|c| self.reduce(c, k))
                .collect::<Result<_, _>>()?,
        };
        Ok((e, grad))
    }

    fn reserve(&mut self, k: usize) -> Result<(), ProblemError> {
        match &mut self.param {
            Parameterization::Spectral(b) => b.ensure(k).map(|_| ()).map_err(|e| ProblemError::Basis(e.to_string())),
            Parameterization::Identity(n) if k <= *n => Ok(()),
            Parameterization::Identity(n) => Err(ProblemError::Basis(format!("identity basis has only {n} columns"))),
        }
    }

    fn max_weights(&self) -> Option<usize> {
        Some(self.field.n_elements())
    }

    fn progress(&self, w: &[f64]) -> Option<f64> {
        self.field.field_progress(&self.synthesize(w).ok()?)
    }
}
