use nalgebra::{DMatrix, DVector};

use super::fd::{gradient_from, hessian_from};
use super::qp::solve_box_qp;
use super::{DesignProblem, EvalCounter, Evaluation, Gradient, HessianMode, ProblemError, SlidingConfig};

/// Contiguous block of active coordinates inside a weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub len: usize,
}

impl Window {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone)]
pub struct InnerResult {
    /// Full weight vector; only the window differs from the input.
    pub weights: Vec<f64>,
    pub evaluation: Evaluation,
    pub iterations: usize,
    pub feasible: bool,
    /// The step-size test was met (as opposed to hitting the iteration cap
    /// or a failed line search).
    pub converged: bool,
}

/// Upper bound on elastic-mode multipliers for the scaled subproblem.
const ELASTIC_PENALTY: f64 = 1e6;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

struct Model {
    eval: Evaluation,
    grad: Gradient,
    hessian: Option<DMatrix<f64>>,
}

struct Tracker {
    feas_tol: f64,
    best: Option<(Vec<f64>, Evaluation)>,
}

impl Tracker {
    fn better(&self, e: &Evaluation) -> bool {
        let Some((_, b)) = &self.best else { return true };
        let (fe, fb) = (e.max_violation() <= self.feas_tol, b.max_violation() <= self.feas_tol);
        match (fe, fb) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => e.objective < b.objective,
            (false, false) => e.max_violation() < b.max_violation(),
        }
    }

    fn offer(&mut self, x: &[f64], e: &Evaluation) {
        if e.is_finite() && self.better(e) {
            self.best = Some((x.to_vec(), e.clone()));
        }
    }
}

/// Sequential quadratic programming over the coordinates in `window`;
/// everything else in `w` is held fixed.
///
/// Each iteration solves an elastic (l1-penalized) QP through its dual, a
/// box-constrained QP in the multipliers, and globalizes with an Armijo
/// search on the l1 merit function. Returns the best feasible iterate seen,
/// or the least infeasible one.
pub fn inner_solve<P: DesignProblem + ?Sized>(
    problem: &P,
    w: &[f64],
    window: Window,
    cfg: &SlidingConfig,
    counter: &EvalCounter,
) -> Result<InnerResult, ProblemError> {
    let range = window.range();
    if range.end > w.len() {
        return Err(ProblemError::Dimension {
            expected: range.end,
            got: w.len(),
        });
    }
    let m = window.len;
    let analytic = problem.has_gradient() && !cfg.black_box;
    let mut x = w.to_vec();
    let mut tracker = Tracker {
        feas_tol: cfg.feasibility_tol,
        best: None,
    };

    let mut lambda = vec![0.0; problem.num_constraints()];
    let mut f_scale = 1.0;
    let mut nu = 1.0f64;
    let mut hinv = DMatrix::<f64>::identity(m, m);
    let mut previous: Option<(Vec<f64>, Gradient)> = None;
    let first = if analytic {
        counter.evaluate_with_gradient(problem, &x).map(|(e, g)| (e, Some(g)))?
    } else {
        (counter.evaluate(problem, &x)?, None)
    };
    if !first.0.is_finite() {
        return Err(ProblemError::Evaluation("non-finite value at initial point".into()));
    }
    let f0 = first.0.objective.abs();
    if f0 > 0.0 {
        f_scale = f0;
    }
    lambda.resize(first.0.constraints.len(), 0.0);
    let mut known = Some(first);
    let mut iterations = 0;
    let mut converged = false;

    for iter in 0..cfg.inner_max_iter {
        let model = match build_model(problem, &x, &range, cfg, analytic, f_scale, &lambda, counter, known.take()) {
            Ok(model) => model,
            Err(e) if iter == 0 => return Err(e),
            Err(e) => {
                log::warn!("inner solve stopped: {e}");
                break;
            }
        };
        tracker.offer(&x, &model.eval);
        iterations = iter + 1;

        let c = DVector::from_iterator(m, model.grad.objective.iter().map(|v| v / f_scale));
        let nc = model.eval.constraints.len();
        let jac = DMatrix::from_fn(nc, m, |i, j| model.grad.constraints[i][j]);
        let g = DVector::from_column_slice(&model.eval.constraints);

        match &model.hessian {
            Some(h) => hinv = regularized_inverse(h),
            None => {
                if let Some((px, pg)) = previous.take() {
                    bfgs_inverse_update(&mut hinv, &px, &x[range.clone()], &pg, &model.grad, f_scale, &lambda);
                }
            }
        }

        let (d, new_lambda) = qp_step(&hinv, &c, &jac, &g);
        lambda = new_lambda;
        let lambda_max = lambda.iter().fold(0.0f64, |a, &b| a.max(b));
        nu = nu.max(1.5 * lambda_max);

        let xw = &x[range.clone()];
        let x_norm = xw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let d_norm = d.amax();
        let violation = model.eval.max_violation();
        if d_norm <= cfg.inner_tol * (1.0 + x_norm) && violation <= cfg.feasibility_tol {
            converged = true;
            break;
        }

        let merit = |e: &Evaluation| e.objective / f_scale + nu * e.constraints.iter().map(|v| v.max(0.0)).sum::<f64>();
        let phi0 = merit(&model.eval);
        let linear_viol: f64 = (&g + &jac * &d).iter().map(|v| v.max(0.0)).sum();
        let current_viol: f64 = g.iter().map(|v| v.max(0.0)).sum();
        let slope = c.dot(&d) - nu * (current_viol - linear_viol);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = x.clone();
            for (k, j) in range.clone().enumerate() {
                trial[j] += alpha * d[k];
            }
            let outcome = if analytic {
                counter.evaluate_with_gradient(problem, &trial).map(|(e, gr)| (e, Some(gr)))
            } else {
                counter.evaluate(problem, &trial).map(|e| (e, None))
            };
            if let Ok((e, gr)) = outcome {
                if e.is_finite() {
                    let phi = merit(&e);
                    let ok = if slope < 0.0 {
                        phi <= phi0 + ARMIJO * alpha * slope
                    } else {
                        phi < phi0
                    };
                    if ok {
                        accepted = Some((trial, e, gr));
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, e, gr)) => {
                let step_norm = alpha * d_norm;
                previous = Some((x[range.clone()].to_vec(), model.grad));
                x = trial;
                tracker.offer(&x, &e);
                known = Some((e, gr));
                if step_norm <= cfg.inner_tol * (1.0 + x_norm) && known.as_ref().unwrap().0.max_violation() <= cfg.feasibility_tol {
                    converged = true;
                    break;
                }
            }
            None => {
                converged = violation <= cfg.feasibility_tol;
                break;
            }
        }
    }

    let (weights, evaluation) = tracker.best.expect("at least one evaluation");
    let feasible = evaluation.max_violation() <= cfg.feasibility_tol;
    Ok(InnerResult {
        weights,
        evaluation,
        iterations,
        feasible,
        converged,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_model<P: DesignProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    range: &std::ops::Range<usize>,
    cfg: &SlidingConfig,
    analytic: bool,
    f_scale: f64,
    lambda: &[f64],
    counter: &EvalCounter,
    known: Option<(Evaluation, Option<Gradient>)>,
) -> Result<Model, ProblemError> {
    let (known_eval, known_grad) = match known {
        Some((e, g)) => (Some(e), g),
        None => (None, None),
    };
    match cfg.hessian {
        HessianMode::FiniteDifference => {
            let fd = hessian_from(problem, x, range.clone(), cfg.hessian_step, 1.0 / f_scale, lambda, counter, known_eval)?;
            let grad = if analytic {
                match known_grad {
                    Some(g) => g.slice(range.clone()),
                    None => counter.evaluate_with_gradient(problem, x)?.1.slice(range.clone()),
                }
            } else {
                fd.gradient
            };
            Ok(Model {
                eval: fd.base,
                grad,
                hessian: Some(fd.hessian),
            })
        }
        HessianMode::Bfgs => {
            let (eval, grad) = if analytic {
                match (known_eval, known_grad) {
                    (Some(e), Some(g)) => (e, g.slice(range.clone())),
                    _ => {
                        let (e, g) = counter.evaluate_with_gradient(problem, x)?;
                        (e, g.slice(range.clone()))
                    }
                }
            } else {
                gradient_from(problem, x, range.clone(), cfg.fd_step, counter, known_eval)?
            };
            if !eval.is_finite() {
                return Err(ProblemError::Evaluation("non-finite value at iterate".into()));
            }
            Ok(Model {
                eval,
                grad,
                hessian: None,
            })
        }
    }
}

/// Inverse of `h` after replacing each eigenvalue by its magnitude, floored
/// relative to the largest.
fn regularized_inverse(h: &DMatrix<f64>) -> DMatrix<f64> {
    let m = h.nrows();
    if m == 0 {
        return DMatrix::zeros(0, 0);
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let top = eig.eigenvalues.amax();
    let floor = (1e-8 * top).max(1e-10);
    let inv = DVector::from_iterator(m, eig.eigenvalues.iter().map(|&l| 1.0 / l.abs().max(floor)));
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&inv) * q.transpose()
}

fn lagrangian_gradient(grad: &Gradient, f_scale: f64, lambda: &[f64]) -> DVector<f64> {
    let mut v = DVector::from_iterator(grad.objective.len(), grad.objective.iter().map(|g| g / f_scale));
    for (row, &l) in grad.constraints.iter().zip(lambda) {
        if l != 0.0 {
            for (k, r) in row.iter().enumerate() {
                v[k] += l * r;
            }
        }
    }
    v
}

fn bfgs_inverse_update(
    hinv: &mut DMatrix<f64>,
    x_old: &[f64],
    x_new: &[f64],
    g_old: &Gradient,
    g_new: &Gradient,
    f_scale: f64,
    lambda: &[f64],
) {
    let s = DVector::from_iterator(x_old.len(), x_new.iter().zip(x_old).map(|(a, b)| a - b));
    let y = lagrangian_gradient(g_new, f_scale, lambda) - lagrangian_gradient(g_old, f_scale, lambda);
    let sy = s.dot(&y);
    if sy <= 1e-12 * s.norm() * y.norm() || !sy.is_finite() {
        return;
    }
    let m = s.len();
    if hinv.iter().enumerate().all(|(i, &v)| v == if i % (m + 1) == 0 { 1.0 } else { 0.0 }) {
        *hinv *= sy / y.dot(&y);
    }
    let rho = 1.0 / sy;
    let hy = &*hinv * &y;
    let yhy = y.dot(&hy);
    // H+ = H - rho (s hy' + hy s') + (rho^2 y'Hy + rho) s s'
    let coef = rho * rho * yhy + rho;
    for i in 0..m {
        for j in 0..m {
            hinv[(i, j)] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + coef * s[i] * s[j];
        }
    }
}

/// Solves the elastic QP subproblem through its dual; returns the step and
/// the constraint multipliers.
fn qp_step(hinv: &DMatrix<f64>, c: &DVector<f64>, jac: &DMatrix<f64>, g: &DVector<f64>) -> (DVector<f64>, Vec<f64>) {
    let hc = hinv * c;
    if jac.nrows() == 0 {
        return (-hc, Vec::new());
    }
    let hj = hinv * jac.transpose();
    let mm = jac * &hj;
    let q = g - jac * &hc;
    let sol = solve_box_qp(&mm, q.as_slice(), ELASTIC_PENALTY);
    let lam = DVector::from_column_slice(&sol.x);
    let d = -(hc + hj * &lam);
    (d, sol.x)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// f = (w0 - 1)^2 + 2 (w1 + 0.5)^2 + w0 w1 + |w[2..]|^2 / 10, optional g = w0 - c.
    struct Bowl {
        clamp: Option<f64>,
    }

    impl DesignProblem for Bowl {
        fn num_constraints(&self) -> usize {
            usize::from(self.clamp.is_some())
        }
        fn evaluate(&self, w: &[f64]) -> Result<Evaluation, ProblemError> {
            let objective = (w[0] - 1.0).powi(2) + 2.0 * (w[1] + 0.5).powi(2) + w[0] * w[1] + 0.1 * w[2..].iter().map(|v| v * v).sum::<f64>();
            Ok(Evaluation {
                objective,
                constraints: self.clamp.iter().map(|c| w[0] - c).collect(),
            })
        }
    }

    fn cfg(mode: HessianMode) -> SlidingConfig {
        SlidingConfig {
            hessian: mode,
            inner_max_iter: 100,
            ..SlidingConfig::default()
        }
    }

    #[test]
    fn unconstrained_quadratic_exact_minimizer() {
        // Stationarity: 2(w0 - 1) + w1 = 0, 4(w1 + .5) + w0 = 0.
        let a = nalgebra::Matrix2::new(2.0, 1.0, 1.0, 4.0);
        let expect = a.lu().solve(&nalgebra::Vector2::new(2.0, -2.0)).unwrap();
        let c = EvalCounter::new();
        let r = inner_solve(&Bowl { clamp: None }, &[0.3, 0.3], Window::new(0, 2), &cfg(HessianMode::FiniteDifference), &c).unwrap();
        assert!((r.weights[0] - expect[0]).abs() < 1e-8, "{:?}", r.weights);
        assert!((r.weights[1] - expect[1]).abs() < 1e-8);
        assert!(r.converged && r.feasible);
    }

    #[test]
    fn bfgs_reaches_the_same_minimizer() {
        let c = EvalCounter::new();
        let r = inner_solve(&Bowl { clamp: None }, &[0.0, 0.0], Window::new(0, 2), &cfg(HessianMode::Bfgs), &c).unwrap();
        assert!((r.weights[0] - 10.0 / 7.0).abs() < 1e-5, "{:?}", r.weights);
        assert!((r.weights[1] - (-6.0 / 7.0)).abs() < 1e-5);
    }

    #[test]
    fn active_constraint_is_clamped() {
        let c = EvalCounter::new();
        let r = inner_solve(&Bowl { clamp: Some(0.5) }, &[0.0, 0.0], Window::new(0, 2), &cfg(HessianMode::FiniteDifference), &c).unwrap();
        assert!((r.weights[0] - 0.5).abs() < 1e-6, "{:?}", r.weights);
        // With w0 fixed at 0.5: 4(w1 + .5) + .5 = 0.
        assert!((r.weights[1] + 0.625).abs() < 1e-6);
        assert!(r.feasible);
    }

    #[test]
    fn infeasible_start_is_repaired() {
        let c = EvalCounter::new();
        let r = inner_solve(&Bowl { clamp: Some(-2.0) }, &[3.0, 0.0], Window::new(0, 2), &cfg(HessianMode::Bfgs), &c).unwrap();
        assert!(r.feasible);
        assert!((r.weights[0] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn frozen_coordinates_are_bit_identical() {
        let c = EvalCounter::new();
        let w = [0.1234567891234, 0.3, 0.7, -0.987654321];
        let r = inner_solve(&Bowl { clamp: None }, &w, Window::new(1, 2), &cfg(HessianMode::FiniteDifference), &c).unwrap();
        assert_eq!(r.weights[0].to_bits(), w[0].to_bits());
        assert_eq!(r.weights[3].to_bits(), w[3].to_bits());
        assert_ne!(r.weights[1], w[1]);
    }
}
