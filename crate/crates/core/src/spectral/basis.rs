use super::{EigenOptions, Eigensolver, LaplacianMatrix, SpectralError};

/// Ordered Laplacian eigenpairs; column `i` of `B` is the eigenvector of the
/// `i`-th smallest eigenvalue. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    n: usize,
    eigenvalues: Vec<f64>,
    data: Vec<f64>,
}

impl SpectralBasis {
    pub(crate) fn from_columns(n: usize, eigenvalues: Vec<f64>, columns: Vec<Vec<f64>>) -> Self {
        let mut basis = Self {
            n,
            eigenvalues: Vec::new(),
            data: Vec::new(),
        };
        basis.append(eigenvalues, columns);
        basis
    }

    /// Builds from raw column-major data; used by the cache loader.
    pub fn from_raw(n: usize, eigenvalues: Vec<f64>, data: Vec<f64>) -> Result<Self, SpectralError> {
        if data.len() != n * eigenvalues.len() {
            return Err(SpectralError::Dimension {
                expected: n * eigenvalues.len(),
                got: data.len(),
            });
        }
        Ok(Self { n, eigenvalues, data })
    }

    /// The identity basis (one weight per element).
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            n,
            eigenvalues: vec![0.0; n],
            data,
        }
    }

    pub(crate) fn append(&mut self, eigenvalues: Vec<f64>, columns: Vec<Vec<f64>>) {
        assert_eq!(eigenvalues.len(), columns.len());
        for c in &columns {
            assert_eq!(c.len(), self.n);
            self.data.extend_from_slice(c);
        }
        self.eigenvalues.extend(eigenvalues);
    }

    /// Number of elements (rows).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of basis vectors (columns).
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    /// Basis restricted to its first `k` columns.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.k());
        Self {
            n: self.n,
            eigenvalues: self.eigenvalues[..k].to_vec(),
            data: self.data[..k * self.n].to_vec(),
        }
    }

    /// `F = B[:, ..w.len()] w`; shorter weight vectors address the leading columns.
    pub fn synthesize_prefix(&self, w: &[f64]) -> Result<Vec<f64>, SpectralError> {
        if w.len() > self.k() {
            return Err(SpectralError::Dimension { expected: self.k(), got: w.len() });
        }
        let mut field = vec![0.0; self.n];
        for (i, &wi) in w.iter().enumerate() {
            if wi != 0.0 {
                field.iter_mut().zip(self.column(i)).for_each(|(f, b)| *f += wi * b);
            }
        }
        Ok(field)
    }

    /// `B[:, ..k]^T dF`.
    pub fn reduce_prefix(&self, field_gradient: &[f64], k: usize) -> Result<Vec<f64>, SpectralError> {
        if field_gradient.len() != self.n {
            return Err(SpectralError::Dimension {
                expected: self.n,
                got: field_gradient.len(),
            });
        }
        if k > self.k() {
            return Err(SpectralError::Dimension { expected: self.k(), got: k });
        }
        Ok((0..k)
            .map(|i| self.column(i).iter().zip(field_gradient).map(|(b, g)| b * g).sum())
            .collect())
    }

    /// `max |B^T B - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.k() {
            for j in 0..=i {
                let d: f64 = self.column(i).iter().zip(self.column(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }

    /// `||L e_i - lambda_i e_i||_2` per column.
    pub fn residuals(&self, laplacian: &LaplacianMatrix) -> Vec<f64> {
        (0..self.k())
            .map(|i| {
                let e = self.column(i);
                let le = laplacian.apply(e);
                le.iter()
                    .zip(e)
                    .map(|(a, b)| (a - self.eigenvalues[i] * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }
}

/// `F = B w` with `|w| = k`.
pub fn synthesize_field(basis: &SpectralBasis, w: &[f64]) -> Result<Vec<f64>, SpectralError> {
    if w.len() != basis.k() {
        return Err(SpectralError::Dimension { expected: basis.k(), got: w.len() });
    }
    basis.synthesize_prefix(w)
}

/// Chain rule through `F = B w`: `df/dw = B^T df/dF`.
pub fn reduce_gradient(basis: &SpectralBasis, field_gradient: &[f64]) -> Result<Vec<f64>, SpectralError> {
    basis.reduce_prefix(field_gradient, basis.k())
}

/// Lazily grown basis: eigenpairs are computed only when more columns are requested.
#[derive(Debug, Clone)]
pub struct BasisBuilder {
    solver: Eigensolver,
    basis: Option<SpectralBasis>,
}

impl BasisBuilder {
    pub fn new(laplacian: LaplacianMatrix, opts: EigenOptions) -> Result<Self, SpectralError> {
        Ok(Self {
            solver: Eigensolver::new(laplacian, opts)?,
            basis: None,
        })
    }

    /// Starts from previously computed columns (e.g. a cache hit).
    pub fn with_basis(mut self, basis: SpectralBasis) -> Result<Self, SpectralError> {
        if basis.n() != self.solver.laplacian().n() {
            return Err(SpectralError::Dimension {
                expected: self.solver.laplacian().n(),
                got: basis.n(),
            });
        }
        self.basis = Some(basis);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.solver.laplacian().n()
    }

    pub fn k(&self) -> usize {
        self.basis.as_ref().map_or(0, SpectralBasis::k)
    }

    pub fn laplacian(&self) -> &LaplacianMatrix {
        self.solver.laplacian()
    }

    /// Makes at least `k` columns available and returns the basis.
    pub fn ensure(&mut self, k: usize) -> Result<&SpectralBasis, SpectralError> {
        let k = k.max(1);
        match self.basis.take() {
            None => self.basis = Some(self.solver.smallest(k)?),
            Some(b) if b.k() < k => {
                let extra = k - b.k();
                match self.solver.extend(&b, extra) {
                    Ok(ext) => self.basis = Some(ext),
                    Err(e) => {
                        self.basis = Some(b);
                        return Err(e);
                    }
                }
            }
            Some(b) => self.basis = Some(b),
        }
        Ok(self.basis.as_ref().unwrap())
    }

    pub fn basis(&self) -> Option<&SpectralBasis> {
        self.basis.as_ref()
    }
}
