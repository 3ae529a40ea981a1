use super::FilterError;

/// Convolution weights `H_ei = max(0, r_min - |c_e - c_i|)` over element centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFilterKernel {
    r_min: f64,
    offsets: Vec<usize>,
    columns: Vec<usize>,
    weights: Vec<f64>,
    row_sums: Vec<f64>,
}

impl DensityFilterKernel {
    pub fn new(centroids: &[[f64; 3]], r_min: f64) -> Result<Self, FilterError> {
        if !(r_min > 0.0) || !r_min.is_finite() {
            return Err(FilterError::Kernel(format!("radius must be positive, got {r_min}")));
        }
        let n = centroids.len();
        let mut lo = [f64::INFINITY; 3];
        for c in centroids {
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
            }
        }
        let cell = |c: &[f64; 3]| -> [i64; 3] {
            let mut key = [0i64; 3];
            for k in 0..3 {
                key[k] = ((c[k] - lo[k]) / r_min).floor() as i64;
            }
            key
        };
        let mut buckets: std::collections::HashMap<[i64; 3], Vec<usize>> = std::collections::HashMap::new();
        for (i, c) in centroids.iter().enumerate() {
            buckets.entry(cell(c)).or_default().push(i);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut columns = Vec::new();
        let mut weights = Vec::new();
        let mut row_sums = Vec::with_capacity(n);
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut identity = true;
        for ce in centroids {
            row.clear();
            let key = cell(ce);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(list) = buckets.get(&[key[0] + dx, key[1] + dy, key[2] + dz]) else {
                            continue;
                        };
                        for &i in list {
                            let ci = &centroids[i];
                            let d = ((ce[0] - ci[0]).powi(2) + (ce[1] - ci[1]).powi(2) + (ce[2] - ci[2]).powi(2)).sqrt();
                            let w = r_min - d;
                            if w > 0.0 {
                                row.push((i, w));
                            }
                        }
                    }
                }
            }
            row.sort_unstable_by_key(|&(i, _)| i);
            if row.len() > 1 {
                identity = false;
            }
            let sum: f64 = row.iter().map(|&(_, w)| w).sum();
            row_sums.push(sum);
            for &(i, w) in &row {
                columns.push(i);
                weights.push(w);
            }
            offsets.push(columns.len());
        }
        if identity && n > 1 {
            log::warn!("density filter radius {r_min} is below the element spacing; filter is the identity");
        }
        Ok(Self {
            r_min,
            offsets,
            columns,
            weights,
            row_sums,
        })
    }

    pub fn radius(&self) -> f64 {
        self.r_min
    }

    pub fn n(&self) -> usize {
        self.row_sums.len()
    }

    pub fn row(&self, e: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[e]..self.offsets[e + 1];
        self.columns[span.clone()].iter().copied().zip(self.weights[span].iter().copied())
    }

    pub fn row_sum(&self, e: usize) -> f64 {
        self.row_sums[e]
    }

    /// `rho~_e = sum_i H_ei rho_i / sum_i H_ei`.
    pub fn apply(&self, rho: &[f64]) -> Result<Vec<f64>, FilterError> {
        self.check(rho.len())?;
        Ok((0..self.n())
            .map(|e| {
                if self.offsets[e + 1] - self.offsets[e] == 1 {
                    rho[self.columns[self.offsets[e]]]
                } else {
                    self.row(e).map(|(i, w)| w * rho[i]).sum::<f64>() / self.row_sums[e]
                }
            })
            .collect())
    }

    /// Transpose of [`apply`](Self::apply): maps sensitivities with respect
    /// to filtered densities back to raw densities.
    pub fn chain(&self, grad_filtered: &[f64]) -> Result<Vec<f64>, FilterError> {
        self.check(grad_filtered.len())?;
        let mut out = vec![0.0; self.n()];
        for e in 0..self.n() {
            let g = grad_filtered[e] / self.row_sums[e];
            for (i, w) in self.row(e) {
                out[i] += w * g;
            }
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<(), FilterError> {
        if len != self.n() {
            return Err(FilterError::Dimension { expected: self.n(), got: len });
        }
        Ok(())
    }
}

pub fn density_filter_apply(rho: &[f64], kernel: &DensityFilterKernel) -> Result<Vec<f64>, FilterError> {
    kernel.apply(rho)
}

pub fn density_filter_chain(grad: &[f64], kernel: &DensityFilterKernel) -> Result<Vec<f64>, FilterError> {
    kernel.chain(grad)
}
