use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LaplacianMatrix, SpectralBasis, SpectralError};
use crate::sparse::SkylineCholesky;

/// Tuning of the shift-invert block Krylov eigensolver.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    /// Spectral shift; the operator is `(L - shift I)^-1`.
    pub shift: f64,
    /// Krylov block width. Eigenvalue multiplicities up to this size are
    /// resolved reliably.
    pub block_size: usize,
    /// Convergence threshold on `||L x - lambda x|| / max(1, lambda)`.
    pub residual_tol: f64,
    /// Eigenvalues closer than `cluster_tol * max(1, lambda)` are treated as
    /// one degenerate eigenspace.
    pub cluster_tol: f64,
    /// Cap on the Krylov subspace dimension (defaults to the free dimension).
    pub max_dim: Option<usize>,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            shift: -1e-8,
            block_size: 6,
            residual_tol: 1e-9,
            cluster_tol: 1e-8,
            max_dim: None,
            seed: 0x5eed_ba515,
        }
    }
}

/// Shift-invert operator of a Laplacian, factored once and reused for every
/// basis extension.
#[derive(Debug, Clone)]
pub struct Eigensolver {
    laplacian: LaplacianMatrix,
    factor: SkylineCholesky,
    opts: EigenOptions,
}

impl Eigensolver {
    pub fn new(laplacian: LaplacianMatrix, opts: EigenOptions) -> Result<Self, SpectralError> {
        let factor = SkylineCholesky::factor(&laplacian.matrix().shifted(-opts.shift))?;
        Ok(Self { laplacian, factor, opts })
    }

    pub fn laplacian(&self) -> &LaplacianMatrix {
        &self.laplacian
    }

    pub fn options(&self) -> &EigenOptions {
        &self.opts
    }

    /// The `k` algebraically smallest eigenpairs, ascending.
    pub fn smallest(&self, k: usize) -> Result<SpectralBasis, SpectralError> {
        let n = self.laplacian.n();
        if k == 0 || k > n {
            return Err(SpectralError::InvalidCount { requested: k, available: n });
        }
        let (values, vectors) = self.solve_in_complement(&[], k)?;
        Ok(SpectralBasis::from_columns(n, values, vectors))
    }

    /// Appends the next `m` eigenpairs. Existing columns are kept verbatim;
    /// the new ones are computed in their orthogonal complement.
    pub fn extend(&self, basis: &SpectralBasis, m: usize) -> Result<SpectralBasis, SpectralError> {
        let n = self.laplacian.n();
        if basis.n() != n {
            return Err(SpectralError::Dimension { expected: n, got: basis.n() });
        }
        if basis.k() + m > n {
            return Err(SpectralError::InvalidCount {
                requested: basis.k() + m,
                available: n,
            });
        }
        if m == 0 {
            return Ok(basis.clone());
        }
        let locked: Vec<&[f64]> = (0..basis.k()).map(|c| basis.column(c)).collect();
        let (mut values, vectors) = self.solve_in_complement(&locked, m)?;
        // A cluster split by the previous truncation continues here; keep the
        // sequence non-decreasing across the seam.
        if let Some(&last) = basis.eigenvalues().last() {
            for v in values.iter_mut() {
                if *v < last && last - *v <= self.opts.cluster_tol * last.abs().max(1.0) {
                    *v = last;
                }
            }
        }
        let mut out = basis.clone();
        out.append(values, vectors);
        Ok(out)
    }

    fn solve_in_complement(&self, locked: &[&[f64]], count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpectralError> {
        let n = self.laplacian.n();
        let free = n - locked.len();
        let max_dim = self.opts.max_dim.unwrap_or(free).min(free);
        let block = self.opts.block_size.clamp(1, free);
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ ((n as u64) << 32) ^ locked.len() as u64);
        let mut krylov = Krylov::new(&self.laplacian, locked);

        let mut last_block: Vec<usize> = Vec::new();
        while last_block.len() < block && krylov.dim() < free {
            if let Some(i) = krylov.push(random_vector(&mut rng, n)) {
                last_block.push(i);
            }
        }
        let mut next_check = (count + 2 * block).min(max_dim);
        let mut worst = f64::INFINITY;
        loop {
            let dim = krylov.dim();
            if dim >= next_check || dim == max_dim {
                match krylov.rayleigh_ritz(count, &self.opts) {
                    RitzOutcome::Done(values, vectors) => return Ok(finalize(&self.laplacian, values, vectors, count, &self.opts)),
                    RitzOutcome::Pending { converged, residual } => {
                        worst = residual;
                        if dim == max_dim {
                            return Err(SpectralError::NotConverged {
                                converged,
                                wanted: count,
                                residual,
                            });
                        }
                    }
                }
                next_check = (dim + block.max(dim / 5)).min(max_dim);
            }
            let mut added = Vec::with_capacity(block);
            for &i in &last_block {
                if krylov.dim() >= max_dim {
                    break;
                }
                let w = self.factor.solve(krylov.vector(i))?;
                if let Some(j) = krylov.push(w) {
                    added.push(j);
                }
            }
            // Exhausted an invariant subspace: restart with fresh directions.
            let mut attempts = 0;
            while added.is_empty() && krylov.dim() < max_dim {
                if let Some(j) = krylov.push(random_vector(&mut rng, n)) {
                    added.push(j);
                }
                attempts += 1;
                if attempts > 100 {
                    return Err(SpectralError::NotConverged {
                        converged: 0,
                        wanted: count,
                        residual: worst,
                    });
                }
            }
            last_block = added;
        }
    }
}

/// Computes the `k` smallest eigenpairs of `L` with default options.
pub fn smallest_eigenpairs(laplacian: &LaplacianMatrix, k: usize) -> Result<SpectralBasis, SpectralError> {
    Eigensolver::new(laplacian.clone(), EigenOptions::default())?.smallest(k)
}

/// Appends `m` eigenpairs to `basis`, keeping its columns unchanged.
pub fn extend_basis(laplacian: &LaplacianMatrix, basis: &SpectralBasis, m: usize) -> Result<SpectralBasis, SpectralError> {
    Eigensolver::new(laplacian.clone(), EigenOptions::default())?.extend(basis, m)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

enum RitzOutcome {
    Done(Vec<f64>, Vec<Vec<f64>>),
    Pending { converged: usize, residual: f64 },
}

/// Orthonormal Krylov basis kept together with `L V` and the projected matrix `V^T L V`.
struct Krylov<'a> {
    laplacian: &'a LaplacianMatrix,
    locked: &'a [&'a [f64]],
    vectors: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
    projected: Vec<Vec<f64>>,
}

impl<'a> Krylov<'a> {
    fn new(laplacian: &'a LaplacianMatrix, locked: &'a [&'a [f64]]) -> Self {
        Self {
            laplacian,
            locked,
            vectors: Vec::new(),
            images: Vec::new(),
            projected: Vec::new(),
        }
    }

    fn dim(&self) -> usize {
        self.vectors.len()
    }

    fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    /// Orthogonalizes `w` against the locked columns and the current basis
    /// (two passes) and appends it unless it is numerically dependent.
    fn push(&mut self, mut w: Vec<f64>) -> Option<usize> {
        let original = norm(&w);
        if !(original > 0.0) || !original.is_finite() {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= original);
        for _ in 0..2 {
            for c in self.locked {
                let p = dot(c, &w);
                axpy(-p, c, &mut w);
            }
            for v in &self.vectors {
                let p = dot(v, &w);
                axpy(-p, v, &mut w);
            }
        }
        let remaining = norm(&w);
        if remaining < 1e-8 {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= remaining);
        let lw = self.laplacian.apply(&w);
        let row: Vec<f64> = self.vectors.iter().map(|v| dot(v, &lw)).chain([dot(&w, &lw)]).collect();
        self.vectors.push(w);
        self.images.push(lw);
        self.projected.push(row);
        Some(self.vectors.len() - 1)
    }

    fn rayleigh_ritz(&self, count: usize, opts: &EigenOptions) -> RitzOutcome {
        let m = self.dim();
        let n = self.laplacian.n();
        let free = n - self.locked.len();
        let h = DMatrix::from_fn(m, m, |i, j| if j <= i { self.projected[i][j] } else { self.projected[j][i] });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let exhausted = m == free;

        let mut values = Vec::new();
        let mut vectors = Vec::new();
        let mut first_bad = f64::NAN;
        for &col in &order {
            let theta = eig.eigenvalues[col];
            let mut y = vec![0.0; n];
            let mut r = vec![0.0; n];
            for j in 0..m {
                let z = eig.eigenvectors[(j, col)];
                axpy(z, &self.vectors[j], &mut y);
                axpy(z, &self.images[j], &mut r);
            }
            axpy(-theta, &y, &mut r);
            let residual = norm(&r) / theta.abs().max(1.0);
            if residual > opts.residual_tol && !exhausted {
                first_bad = residual;
                break;
            }
            values.push(theta);
            vectors.push(y);
            // Stop once the cluster straddling `count` has been closed by a
            // strictly larger converged eigenvalue.
            if values.len() > count {
                let last = values.len() - 1;
                if values[last] - values[last - 1] > opts.cluster_tol * values[last].abs().max(1.0) {
                    values.pop();
                    vectors.pop();
                    return RitzOutcome::Done(values, vectors);
                }
            }
        }
        if values.len() >= count && (exhausted || values.len() == free) {
            return RitzOutcome::Done(values, vectors);
        }
        RitzOutcome::Pending {
            converged: values.len(),
            residual: first_bad,
        }
    }
}

/// Canonical basis per degenerate cluster, deterministic signs, truncation to `count`.
fn finalize(
    laplacian: &LaplacianMatrix,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    count: usize,
    opts: &EigenOptions,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut out_values = Vec::with_capacity(values.len());
    let mut out_vectors = Vec::with_capacity(values.len());
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= opts.cluster_tol * values[end].abs().max(1.0) {
            end += 1;
        }
        let cluster = if end - start == 1 {
            vec![vectors[start].clone()]
        } else {
            canonical_cluster_basis(&vectors[start..end])
        };
        let mut quotients = Vec::with_capacity(cluster.len());
        for mut v in cluster {
            fix_sign(&mut v);
            quotients.push(laplacian.quadratic_form(&v));
            out_vectors.push(v);
        }
        let mean = quotients.iter().sum::<f64>() / quotients.len() as f64;
        out_values.extend(std::iter::repeat(mean).take(quotients.len()));
        start = end;
        if out_values.len() >= count {
            break;
        }
    }
    out_values.truncate(count);
    out_vectors.truncate(count);
    (out_values, out_vectors)
}

/// Basis of `span(vectors)` independent of which orthonormal basis was
/// supplied: project the unit vectors `e_0, e_1, ...` onto the span and
/// Gram-Schmidt them in index order.
fn canonical_cluster_basis(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = vectors.len();
    let n = vectors[0].len();
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..n {
        if chosen.len() == d {
            break;
        }
        let mut p = vec![0.0; n];
        for v in vectors {
            axpy(v[i], v, &mut p);
        }
        for _ in 0..2 {
            for c in &chosen {
                let s = dot(c, &p);
                axpy(-s, c, &mut p);
            }
        }
        let len = norm(&p);
        if len > 1e-3 {
            p.iter_mut().for_each(|x| *x /= len);
            chosen.push(p);
        }
    }
    chosen
}

/// First entry above noise level made positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-6 * peak) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
