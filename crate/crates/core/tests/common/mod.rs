//! Test-only oracles, independent of the library's numerical paths.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slidebasis::mesh::{Domain, ElementAdjacency, QuadGrid};
use slidebasis::rocket::{solve_eikonal_with_sources, RocketParams};
use slidebasis::spectral::{assemble_laplacian, LaplacianMatrix};

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
/// Returns ascending eigenvalues and the matching eigenvectors (as columns).
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for i in 0..n {
        v[i][i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (values, vectors)
}

pub fn dense(l: &LaplacianMatrix) -> Vec<Vec<f64>> {
    let n = l.n();
    (0..n).map(|i| (0..n).map(|j| l.matrix().get(i, j)).collect()).collect()
}

pub fn path_laplacian(n: usize) -> LaplacianMatrix {
    let lists = (0..n)
        .map(|i| {
            let mut l = Vec::new();
            if i > 0 {
                l.push(i - 1);
            }
            if i + 1 < n {
                l.push(i + 1);
            }
            l
        })
        .collect();
    assemble_laplacian(&ElementAdjacency::from_lists(lists).unwrap())
}

pub fn grid_laplacian(nx: usize, ny: usize) -> LaplacianMatrix {
    let g = QuadGrid::new(nx, ny, 1.0, 1.0, 0.0, 0.0).unwrap();
    assemble_laplacian(&g.face_adjacency().unwrap())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Seeded generator for test inputs.
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }

    pub fn vec(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }
}

/// Largest nodal error of fast marching inward from a circle of radius
/// `outer` at speed `c`, measured on the annulus `inner <= |x| <= outer`.
pub fn disk_annulus_error(n: usize, outer: f64, inner: f64, c: f64) -> (f64, f64) {
    let side = 2.0 * outer + 0.2;
    let h = side / n as f64;
    let grid = QuadGrid::new(n, n, h, h, 0.0, 0.0).unwrap();
    let centre = side / 2.0;
    let radius = |i: usize, j: usize| {
        let (x, y) = grid.node_position(i, j);
        (x - centre).hypot(y - centre)
    };
    let mut sources = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let r = radius(i, j);
            if r >= outer {
                sources.push((grid.node_index(i, j), (outer - r) / c));
            }
        }
    }
    let phi = solve_eikonal_with_sources(&grid, &vec![c; n * n], &sources).unwrap();
    let mut worst = 0.0f64;
    for j in 0..=n {
        for i in 0..=n {
            let r = radius(i, j);
            if (inner..=outer).contains(&r) {
                worst = worst.max((phi.at(i, j) - (outer - r) / c).abs());
            }
        }
    }
    (worst, h)
}


/// Inhibited-end cylinder at uniform reference rate `c`: the bore radius is
/// `r_in + c t` and the burning area is its lateral surface. Pressure follows
/// from `rho_p c (P/P_ref)^n A_b = A_t P / c_s`, thrust from `C_f A_t P`.
pub fn cylinder_thrust(p: &RocketParams, c: f64, t: f64) -> f64 {
    let area = 2.0 * PI * (p.r_in + c * t) * p.length;
    let pressure = (p.rho_p * c * area * p.c_s / (p.a_t * p.p_ref.powf(p.n))).powf(1.0 / (1.0 - p.n));
    p.c_f * p.a_t * pressure
}


/// Dense O(n^2) weighted average over every pair of centroids.
pub fn brute_force_filter(centroids: &[[f64; 3]], r_min: f64, rho: &[f64]) -> Vec<f64> {
    centroids
        .iter()
        .map(|ce| {
            let (mut num, mut den) = (0.0, 0.0);
            for (ci, r) in centroids.iter().zip(rho) {
                let d = ((ce[0] - ci[0]).powi(2) + (ce[1] - ci[1]).powi(2) + (ce[2] - ci[2]).powi(2)).sqrt();
                let w = (r_min - d).max(0.0);
                num += w * r;
                den += w;
            }
            num / den
        })
        .collect()
}


/// Tensor-form stiffness `V (lambda g_a,i g_b,j + mu (delta_ij g_a.g_b + g_a,j g_b,i))`
/// from hand-derived shape gradients.
pub fn tensor_stiffness(grads: &[[f64; 3]; 4], vol: f64, e: f64, nu: f64) -> [[f64; 12]; 12] {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut k = [[0.0; 12]; 12];
    for a in 0..4 {
        for b in 0..4 {
            let gg: f64 = (0..3).map(|c| grads[a][c] * grads[b][c]).sum();
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { gg } else { 0.0 };
                    k[3 * a + i][3 * b + j] = vol * (lambda * grads[a][i] * grads[b][j] + mu * (delta + grads[a][j] * grads[b][i]));
                }
            }
        }
    }
    k
}
