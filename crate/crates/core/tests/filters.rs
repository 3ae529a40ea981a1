mod common;

use common::{brute_force_filter, dot, Rng};
use proptest::prelude::*;
use slidebasis::filters::{ordered_simp, DensityFilterKernel, LogisticBounds, MaterialSet};
use slidebasis::topopt::box_tet_mesh;
use slidebasis::Domain;

#[test]
fn density_filter_matches_brute_force() {
    let mut rng = Rng::new(21);
    let scattered: Vec<[f64; 3]> = (0..300).map(|_| [rng.uniform(0.0, 2.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.5)]).collect();
    let mesh = box_tet_mesh([6, 3, 2], [2.0, 1.0, 0.7]).unwrap();
    let tet_centroids = mesh.element_centroids();
    for (centroids, radii) in [(&scattered, [0.05, 0.2, 0.7]), (&tet_centroids, [0.1, 0.3, 1.5])] {
        let rho = rng.vec(centroids.len(), 0.0, 1.0);
        for r_min in radii {
            let kernel = DensityFilterKernel::new(centroids, r_min).unwrap();
            let fast = kernel.apply(&rho).unwrap();
            let slow = brute_force_filter(centroids, r_min, &rho);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-12, "r_min={r_min}: {a} vs {b}");
            }
            // The chain rule is the exact transpose.
            let g = rng.vec(centroids.len(), -1.0, 1.0);
            let lhs = dot(&g, &fast);
            let rhs = dot(&kernel.chain(&g).unwrap(), &rho);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}

#[test]
fn logistic_midpoint_asymptotes_and_slope() {
    for (lo, hi) in [(0.002, 0.012), (0.1, 1.0), (-3.0, 5.0)] {
        let b = LogisticBounds::with_default_slope(lo, hi).unwrap();
        assert!((b.value(0.0) - 0.5 * (lo + hi)).abs() <= 1e-15 * hi.abs().max(1.0));
        assert!((b.derivative(0.0) - b.kappa * (hi - lo) / 4.0).abs() <= 1e-14 * b.kappa * (hi - lo));
        // Default slope: the tangent at the midpoint spans the bounds over 4/3 units.
        assert!((b.derivative(0.0) - 1.5).abs() <= 1e-12);
        let far = 60.0 / b.kappa;
        assert!((b.value(far) - hi).abs() <= 1e-12 * (hi - lo));
        assert!((b.value(-far) - lo).abs() <= 1e-12 * (hi - lo));
        assert!(b.value(-1e6).is_finite() && b.value(1e6).is_finite());
        assert_eq!(b.derivative(1e6), 0.0);
    }
}

#[test]
fn ordered_simp_knots_on_material_sets() {
    let beam = MaterialSet::beam();
    for (rho, e) in [(0.0, 0.0), (0.1, 2.0e9), (1.0, 3.0e9)] {
        assert_eq!(ordered_simp(rho, &beam).0, e);
    }
    let bracket = MaterialSet::bracket();
    for (rho, e) in [(0.1, 1.5e9), (0.3, 2.5e9), (1.0, 3.0e9)] {
        assert_eq!(ordered_simp(rho, &bracket).0, e);
    }
    // Continuous across interior knots.
    for (set, knot) in [(&beam, 0.1), (&bracket, 0.3)] {
        let below = ordered_simp(knot - 1e-12, set).0;
        let above = ordered_simp(knot + 1e-12, set).0;
        assert!((below - above).abs() <= 1e-9 * set.max_modulus());
    }
}

proptest! {
    #[test]
    fn ordered_simp_is_monotone_with_matching_slope(rho in 0.0f64..1.0, bracket in any::<bool>()) {
        let set = if bracket { MaterialSet::bracket() } else { MaterialSet::beam() };
        let rho = rho.max(set.min_density());
        let (e, de) = ordered_simp(rho, &set);
        let h = 1e-7;
        let hi = (rho + h).min(set.max_density());
        let lo = (rho - h).max(set.min_density());
        prop_assert!(ordered_simp(hi, &set).0 >= e && e >= ordered_simp(lo, &set).0);
        prop_assert!(de >= 0.0);
        // Away from knots the derivative matches a central difference.
        let near_knot = set.materials().iter().any(|m| (m.density - rho).abs() < 2.0 * h);
        if !near_knot {
            let fd = (ordered_simp(rho + h, &set).0 - ordered_simp(rho - h, &set).0) / (2.0 * h);
            prop_assert!((fd - de).abs() <= 1e-5 * set.max_modulus(), "{} vs {}", fd, de);
        }
    }
}
