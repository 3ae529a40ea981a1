use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{DesignProblem, EvalCounter, Evaluation, Gradient, ProblemError};

fn step_for(w: f64, rel: f64) -> f64 {
    rel * w.abs().max(1.0)
}

fn perturbed(w: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut p = w.to_vec();
    for &(j, h) in moves {
        p[j] += h;
    }
    p
}

fn finite_eval<P: DesignProblem + ?Sized>(
    problem: &P,
    counter: &EvalCounter,
    w: &[f64],
) -> Result<Option<Evaluation>, ProblemError> {
    let e = counter.evaluate(problem, w)?;
    Ok(e.is_finite().then_some(e))
}

/// Forward-difference gradient of the objective and constraints with respect
/// to the coordinates in `window`. Uses one evaluation per coordinate plus
/// one at `w`; a non-finite perturbed value is retried once with a tenth of
/// the step.
pub fn numerical_gradient<P: DesignProblem + ?Sized>(
    problem: &P,
    w: &[f64],
    window: Range<usize>,
    fd_step: f64,
    counter: &EvalCounter,
) -> Result<(Evaluation, Gradient), ProblemError> {
    gradient_from(problem, w, window, fd_step, counter, None)
}

pub(crate) fn gradient_from<P: DesignProblem + ?Sized>(
    problem: &P,
    w: &[f64],
    window: Range<usize>,
    fd_step: f64,
    counter: &EvalCounter,
    known: Option<Evaluation>,
) -> Result<(Evaluation, Gradient), ProblemError> {
    let base = match known {
        Some(e) => e,
        None => counter.evaluate(problem, w)?,
    };
    if !base.is_finite() {
        return Err(ProblemError::Evaluation("non-finite value at base point".into()));
    }
    let nc = base.constraints.len();
    let columns: Vec<(f64, Evaluation)> = window
        .clone()
        .into_par_iter()
        .map(|j| {
            let mut h = step_for(w[j], fd_step);
            for attempt in 0..2 {
                if let Some(e) = finite_eval(problem, counter, &perturbed(w, &[(j, h)]))? {
                    return Ok((h, e));
                }
                if attempt == 0 {
                    h /= 10.0;
                }
            }
            Err(ProblemError::NonFinite(j))
        })
        .collect::<Result<_, _>>()?;
    let mut grad = Gradient {
        objective: Vec::with_capacity(columns.len()),
        constraints: vec![Vec::with_capacity(columns.len()); nc],
    };
    for (h, e) in &columns {
        grad.objective.push((e.objective - base.objective) / h);
        for (i, g) in e.constraints.iter().enumerate() {
            grad.constraints[i].push((g - base.constraints[i]) / h);
        }
    }
    Ok((base, grad))
}

/// Second-order finite-difference model over `window`.
#[derive(Debug, Clone)]
pub struct FdModel {
    pub base: Evaluation,
    /// Central-difference gradients.
    pub gradient: Gradient,
    /// Hessian of `objective_weight * f + sum_i multipliers[i] * g_i`.
    pub hessian: DMatrix<f64>,
}

/// Builds central-difference gradients and the Hessian of a weighted
/// Lagrangian from `1 + 2m + m(m-1)/2` evaluations, all independent.
pub fn finite_difference_hessian<P: DesignProblem + ?Sized>(
    problem: &P,
    w: &[f64],
    window: Range<usize>,
    step: f64,
    objective_weight: f64,
    multipliers: &[f64],
    counter: &EvalCounter,
) -> Result<FdModel, ProblemError> {
    hessian_from(problem, w, window, step, objective_weight, multipliers, counter, None)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn hessian_from<P: DesignProblem + ?Sized>(
    problem: &P,
    w: &[f64],
    window: Range<usize>,
    step: f64,
    objective_weight: f64,
    multipliers: &[f64],
    counter: &EvalCounter,
    known: Option<Evaluation>,
) -> Result<FdModel, ProblemError> {
    let base = match known {
        Some(e) => e,
        None => counter.evaluate(problem, w)?,
    };
    if !base.is_finite() {
        return Err(ProblemError::Evaluation("non-finite value at base point".into()));
    }
    let nc = base.constraints.len();
    let lagrangian = |e: &Evaluation| -> f64 {
        objective_weight * e.objective + e.constraints.iter().zip(multipliers).map(|(g, l)| g * l).sum::<f64>()
    };
    let coords: Vec<usize> = window.clone().collect();
    let m = coords.len();

    // Symmetric pairs (x + h e_j, x - h e_j), shrinking h once on failure.
    let axial: Vec<(f64, Evaluation, Evaluation)> = coords
        .par_iter()
        .map(|&j| {
            let mut h = step_for(w[j], step);
            for attempt in 0..2 {
                let plus = finite_eval(problem, counter, &perturbed(w, &[(j, h)]))?;
                let minus = finite_eval(problem, counter, &perturbed(w, &[(j, -h)]))?;
                if let (Some(p), Some(q)) = (plus, minus) {
                    return Ok((h, p, q));
                }
                if attempt == 0 {
                    h /= 10.0;
                }
            }
            Err(ProblemError::NonFinite(j))
        })
        .collect::<Result<_, _>>()?;

    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let diagonal_moves: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let p = perturbed(w, &[(coords[a], axial[a].0), (coords[b], axial[b].0)]);
            finite_eval(problem, counter, &p).map(|e| e.as_ref().map(&lagrangian))
        })
        .collect::<Result<_, _>>()?;

    let l0 = lagrangian(&base);
    let mut gradient = Gradient {
        objective: Vec::with_capacity(m),
        constraints: vec![Vec::with_capacity(m); nc],
    };
    let mut hessian = DMatrix::zeros(m, m);
    for (a, (h, p, q)) in axial.iter().enumerate() {
        gradient.objective.push((p.objective - q.objective) / (2.0 * h));
        for i in 0..nc {
            gradient.constraints[i].push((p.constraints[i] - q.constraints[i]) / (2.0 * h));
        }
        hessian[(a, a)] = (lagrangian(p) - 2.0 * l0 + lagrangian(q)) / (h * h);
    }
    for (&(a, b), value) in pairs.iter().zip(&diagonal_moves) {
        let v = match value {
            Some(lab) => {
                let (ha, hb) = (axial[a].0, axial[b].0);
                (lab - lagrangian(&axial[a].1) - lagrangian(&axial[b].1) + l0) / (ha * hb)
            }
            None => {
                log::warn!("non-finite value in Hessian pair ({a}, {b}); entry set to zero");
                0.0
            }
        };
        hessian[(a, b)] = v;
        hessian[(b, a)] = v;
    }
    Ok(FdModel { base, gradient, hessian })
}
