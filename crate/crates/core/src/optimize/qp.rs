use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct BoxQpResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Lower,
    Upper,
    Free,
}

/// Minimizes `x'Mx/2 - q'x` subject to `0 <= x <= upper` for symmetric
/// positive semidefinite `M` with a primal active-set method. A tiny ridge
/// keeps the free subproblems nonsingular.
pub fn solve_box_qp(m: &DMatrix<f64>, q: &[f64], upper: f64) -> BoxQpResult {
    let n = q.len();
    assert_eq!(m.nrows(), n);
    if n == 0 {
        return BoxQpResult {
            x: vec![],
            iterations: 0,
            converged: true,
        };
    }
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] += 1e-12 * scale;
    }
    let qscale = q.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let tol = 1e-13 * (qscale + scale * upper.min(1e12).max(1.0));

    let mut x = vec![0.0; n];
    let mut status = vec![Status::Lower; n];
    let max_iter = 20 * n + 100;
    for it in 0..max_iter {
        let free: Vec<usize> = (0..n).filter(|&i| status[i] == Status::Free).collect();
        let z = if free.is_empty() {
            Vec::new()
        } else {
            let sub = DMatrix::from_fn(free.len(), free.len(), |r, c| a[(free[r], free[c])]);
            let rhs = DVector::from_iterator(
                free.len(),
                free.iter().map(|&i| {
                    q[i] - (0..n)
                        .filter(|&j| status[j] != Status::Free)
                        .map(|j| a[(i, j)] * x[j])
                        .sum::<f64>()
                }),
            );
            let sol = match sub.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => sub.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(free.len())),
            };
            sol.iter().copied().collect()
        };
        let inside = z.iter().all(|&v| v >= 0.0 && v <= upper);
        if inside {
            for (k, &i) in free.iter().enumerate() {
                x[i] = z[k];
            }
            let mut worst = (tol, None);
            for i in 0..n {
                if status[i] == Status::Free {
                    continue;
                }
                let g: f64 = (0..n).map(|j| a[(i, j)] * x[j]).sum::<f64>() - q[i];
                let v = if status[i] == Status::Lower { -g } else { g };
                if v > worst.0 {
                    worst = (v, Some(i));
                }
            }
            match worst.1 {
                Some(i) => status[i] = Status::Free,
                None => {
                    return BoxQpResult {
                        x,
                        iterations: it + 1,
                        converged: true,
                    }
                }
            }
        } else {
            let mut alpha = 1.0;
            let mut block = None;
            for (k, &i) in free.iter().enumerate() {
                let d = z[k] - x[i];
                let t = if z[k] < 0.0 {
                    -x[i] / d
                } else if z[k] > upper {
                    (upper - x[i]) / d
                } else {
                    continue;
                };
                if t < alpha {
                    alpha = t.max(0.0);
                    block = Some((i, if z[k] < 0.0 { Status::Lower } else { Status::Upper }));
                }
            }
            for (k, &i) in free.iter().enumerate() {
                x[i] += alpha * (z[k] - x[i]);
            }
            if let Some((i, s)) = block {
                status[i] = s;
                x[i] = if s == Status::Lower { 0.0 } else { upper };
            }
        }
    }
    log::warn!("box QP did not converge in {max_iter} iterations");
    BoxQpResult {
        x,
        iterations: max_iter,
        converged: false,
    }
}
