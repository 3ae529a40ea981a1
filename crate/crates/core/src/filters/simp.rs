use serde::{Deserialize, Serialize};

use super::FilterError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Normalized density in `[0, 1]`.
    pub density: f64,
    /// Young's modulus.
    pub modulus: f64,
}

/// Ordered discrete materials for multi-material SIMP interpolation.
///
/// On each interval `[rho_m, rho_{m+1}]` the modulus is `a_m rho^p + b_m`,
/// scaled and translated so that the curve passes through both materials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSet {
    materials: Vec<Material>,
    penalty: f64,
}

impl MaterialSet {
    pub fn new(materials: Vec<Material>, penalty: f64) -> Result<Self, FilterError> {
        if materials.len() < 2 {
            return Err(FilterError::Materials("need at least two materials".into()));
        }
        if !(penalty >= 1.0) || !penalty.is_finite() {
            return Err(FilterError::Materials(format!("penalty must be >= 1, got {penalty}")));
        }
        for m in &materials {
            if !(0.0..=1.0).contains(&m.density) || !(m.modulus >= 0.0) || !m.modulus.is_finite() {
                return Err(FilterError::Materials(format!("bad material {m:?}")));
            }
        }
        for w in materials.windows(2) {
            if !(w[1].density > w[0].density) {
                return Err(FilterError::Materials("densities must be strictly ascending".into()));
            }
            if w[1].modulus < w[0].modulus {
                return Err(FilterError::Materials("moduli must be non-decreasing".into()));
            }
        }
        Ok(Self { materials, penalty })
    }

    /// Void plus two solids: densities 0, 0.1, 1 with moduli 0, 2 GPa, 3 GPa.
    pub fn beam() -> Self {
        Self::from_pairs(&[(0.0, 0.0), (0.1, 2.0e9), (1.0, 3.0e9)], 3.0)
    }

    /// Three solids: densities 0.1, 0.3, 1 with moduli 1.5, 2.5, 3 GPa.
    pub fn bracket() -> Self {
        Self::from_pairs(&[(0.1, 1.5e9), (0.3, 2.5e9), (1.0, 3.0e9)], 3.0)
    }

    pub fn from_pairs(pairs: &[(f64, f64)], penalty: f64) -> Self {
        Self::new(
            pairs
                .iter()
                .map(|&(density, modulus)| Material { density, modulus })
                .collect(),
            penalty,
        )
        .expect("valid material table")
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn min_density(&self) -> f64 {
        self.materials[0].density
    }

    pub fn max_density(&self) -> f64 {
        self.materials.last().unwrap().density
    }

    pub fn max_modulus(&self) -> f64 {
        self.materials.last().unwrap().modulus
    }

    /// Modulus and its derivative at density `rho`. Densities outside the
    /// table are clamped and report a zero derivative.
    pub fn ordered_simp(&self, rho: f64) -> (f64, f64) {
        let mats = &self.materials;
        let last = mats.len() - 1;
        let p = self.penalty;
        if rho < mats[0].density {
            log::trace!("ordered SIMP saturated below at rho={rho}");
            return (mats[0].modulus, 0.0);
        }
        if rho > mats[last].density {
            log::trace!("ordered SIMP saturated above at rho={rho}");
            return (mats[last].modulus, 0.0);
        }
        if rho == mats[last].density {
            let (_, a) = self.interval_coefficients(last - 1);
            return (mats[last].modulus, p * a * rho.powf(p - 1.0));
        }
        let m = mats.partition_point(|mat| mat.density <= rho) - 1;
        let (b, a) = self.interval_coefficients(m);
        let slope = p * a * rho.powf(p - 1.0);
        if rho == mats[m].density {
            return (mats[m].modulus, slope);
        }
        (a * rho.powf(p) + b, slope)
    }

    /// `(b_m, a_m)` of interval `m`.
    fn interval_coefficients(&self, m: usize) -> (f64, f64) {
        let (lo, hi) = (self.materials[m], self.materials[m + 1]);
        let p = self.penalty;
        let a = (hi.modulus - lo.modulus) / (hi.density.powf(p) - lo.density.powf(p));
        (lo.modulus - a * lo.density.powf(p), a)
    }

    /// Index of the material whose density is nearest to `rho`.
    pub fn snap(&self, rho: f64) -> usize {
        self.materials
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.density - rho).abs().total_cmp(&(b.1.density - rho).abs()))
            .map(|(i, _)| i)
            .unwrap()
    }
}

pub fn ordered_simp(rho: f64, mats: &MaterialSet) -> (f64, f64) {
    mats.ordered_simp(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn knots_are_exact() {
        let beam = MaterialSet::beam();
        assert_eq!(ordered_simp(0.1, &beam).0, 2.0e9);
        assert_eq!(ordered_simp(0.0, &beam).0, 0.0);
        assert_eq!(ordered_simp(1.0, &beam).0, 3.0e9);
        let bracket = MaterialSet::bracket();
        assert_eq!(ordered_simp(1.0, &bracket).0, 3.0e9);
        assert_eq!(ordered_simp(0.3, &bracket).0, 2.5e9);
        assert_eq!(ordered_simp(0.1, &bracket).0, 1.5e9);
    }

    #[test]
    fn linear_when_penalty_is_one() {
        let set = MaterialSet::from_pairs(&[(0.2, 1.0), (0.8, 4.0)], 1.0);
        for &rho in &[0.2, 0.35, 0.5, 0.8] {
            let (e, de) = set.ordered_simp(rho);
            assert!((e - (1.0 + (rho - 0.2) * 5.0)).abs() < 1e-12);
            assert!((de - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn clamps_outside() {
        let set = MaterialSet::bracket();
        assert_eq!(set.ordered_simp(0.05), (1.5e9, 0.0));
        assert_eq!(set.ordered_simp(1.5), (3.0e9, 0.0));
    }

    #[test]
    fn rejects_unordered() {
        assert!(MaterialSet::new(
            vec![Material { density: 0.5, modulus: 1.0 }, Material { density: 0.4, modulus: 2.0 }],
            3.0
        )
        .is_err());
        assert!(MaterialSet::new(
            vec![Material { density: 0.1, modulus: 2.0 }, Material { density: 0.4, modulus: 1.0 }],
            3.0
        )
        .is_err());
    }

    #[test]
    fn snap_to_nearest() {
        let set = MaterialSet::beam();
        assert_eq!(set.snap(0.04), 0);
        assert_eq!(set.snap(0.3), 1);
        assert_eq!(set.snap(0.7), 2);
    }

    proptest! {
        #[test]
        fn continuous_monotone_with_consistent_derivative(rho in 0.001f64..0.999) {
            let set = MaterialSet::bracket();
            let h = 1e-7;
            let (e0, de) = set.ordered_simp(rho);
            let (e1, _) = set.ordered_simp(rho + h);
            prop_assert!(de >= 0.0);
            prop_assert!(e1 >= e0);
            // One-sided difference away from knots.
            if set.materials().iter().all(|m| (m.density - rho).abs() > 1e-5) && rho > 0.1 {
                let fd = (e1 - e0) / h;
                prop_assert!((fd - de).abs() <= 1e-4 * de.abs().max(1.0));
            }
        }
    }
}
