use std::f64::consts::PI;

use super::ArrivalTimeField;
use crate::mesh::QuadGrid;

/// One piece of an isocontour, inside cell `cell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontSegment {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub cell: usize,
}

impl FrontSegment {
    pub fn length(&self) -> f64 {
        ((self.b[0] - self.a[0]).powi(2) + (self.b[1] - self.a[1]).powi(2)).sqrt()
    }

    pub fn midpoint(&self) -> [f64; 2] {
        [(self.a[0] + self.b[0]) / 2.0, (self.a[1] + self.b[1]) / 2.0]
    }
}

/// Isocontour of an arrival-time field in the `(r, z)` half plane.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BurnFrontCurve {
    pub level: f64,
    pub segments: Vec<FrontSegment>,
}

impl BurnFrontCurve {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(FrontSegment::length).sum()
    }
}

/// Marching squares on the node lattice. A node is inside when
/// `phi > level`; crossings are linearly interpolated along cell edges and
/// saddle cells are resolved by the mean of their corners.
pub fn extract_front(grid: &QuadGrid, phi: &ArrivalTimeField, level: f64) -> BurnFrontCurve {
    let mut segments = Vec::new();
    let (dr, dz) = (grid.dr(), grid.dz());
    let (r0, z0) = grid.origin();
    for j in 0..grid.n_z() {
        for i in 0..grid.n_r() {
            // Corners counter-clockwise from (i, j).
            let idx = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let v = idx.map(|(a, b)| phi.at(a, b));
            let inside = v.map(|x| x > level);
            let mask = inside.iter().enumerate().fold(0u8, |m, (k, &b)| m | (u8::from(b) << k));
            if mask == 0 || mask == 15 {
                continue;
            }
            let pos = |k: usize| {
                let (a, b) = idx[k];
                [r0 + a as f64 * dr, z0 + b as f64 * dz]
            };
            // Crossing on edge e, between corners e and e + 1.
            let crossing = |e: usize| -> [f64; 2] {
                let (p, q) = (e, (e + 1) % 4);
                let t = (v[p] - level) / (v[p] - v[q]);
                let (pp, pq) = (pos(p), pos(q));
                [pp[0] + t * (pq[0] - pp[0]), pp[1] + t * (pq[1] - pp[1])]
            };
            let cell = grid.cell_index(i, j);
            let mut push = |e1: usize, e2: usize| {
                segments.push(FrontSegment {
                    a: crossing(e1),
                    b: crossing(e2),
                    cell,
                });
            };
            let edges: Vec<usize> = (0..4).filter(|&e| inside[e] != inside[(e + 1) % 4]).collect();
            if edges.len() == 2 {
                push(edges[0], edges[1]);
            } else {
                let center_inside = v.iter().sum::<f64>() / 4.0 > level;
                // Edges 3,0 surround corner 0; 0,1 corner 1; 1,2 corner 2; 2,3 corner 3.
                let cut_even = (mask == 0b0101) != center_inside;
                if cut_even {
                    push(3, 0);
                    push(1, 2);
                } else {
                    push(0, 1);
                    push(2, 3);
                }
            }
        }
    }
    BurnFrontCurve { level, segments }
}

/// Mass flow off a front swept around the axis:
/// `sum rho_p * rate(cell) * 2 pi r_mid * length`.
pub fn revolved_flux_integral(curve: &BurnFrontCurve, burn_rate: &[f64], rho_p: f64) -> f64 {
    curve
        .segments
        .iter()
        .map(|s| rho_p * burn_rate[s.cell] * 2.0 * PI * s.midpoint()[0] * s.length())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rocket::solve_eikonal;

    #[test]
    fn vertical_front_of_uniform_field() {
        let g = QuadGrid::for_chamber(20, 6, 0.0, 1.0, 3.0).unwrap();
        let phi = solve_eikonal(&g, &vec![2.0; 120]).unwrap();
        let tau = 0.1234;
        let front = extract_front(&g, &phi, tau);
        let r = 1.0 - 2.0 * tau;
        for s in &front.segments {
            assert!((s.a[0] - r).abs() < 1e-12 && (s.b[0] - r).abs() < 1e-12);
        }
        assert!((front.length() - 3.0).abs() < 1e-12);
        let flux = revolved_flux_integral(&front, &vec![2.0; 120], 5.0);
        assert!((flux - 5.0 * 2.0 * 2.0 * PI * r * 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_level_is_the_casing_and_high_level_is_empty() {
        let g = QuadGrid::for_chamber(10, 4, 0.0, 1.0, 1.0).unwrap();
        let phi = solve_eikonal(&g, &vec![1.0; 40]).unwrap();
        let casing = extract_front(&g, &phi, 0.0);
        assert!(casing.segments.iter().all(|s| (s.a[0] - 1.0).abs() < 1e-12 && (s.b[0] - 1.0).abs() < 1e-12));
        assert!((casing.length() - 1.0).abs() < 1e-12);
        assert!(extract_front(&g, &phi, phi.max() + 1.0).is_empty());
    }

    #[test]
    fn axis_contributes_nothing() {
        let c = BurnFrontCurve {
            level: 0.0,
            segments: vec![FrontSegment {
                a: [0.0, 0.0],
                b: [0.0, 1.0],
                cell: 0,
            }],
        };
        assert_eq!(revolved_flux_integral(&c, &[3.0], 2.0), 0.0);
        assert_eq!(revolved_flux_integral(&BurnFrontCurve::default(), &[], 2.0), 0.0);
    }
}
