use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::RocketError;
use crate::mesh::QuadGrid;

/// Arrival times on the node lattice of a [`QuadGrid`]: node `(i, j)` sits
/// at `(r0 + i dr, z0 + j dz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTimeField {
    nr: usize,
    nz: usize,
    values: Vec<f64>,
}

impl ArrivalTimeField {
    /// Nodes along r.
    pub fn nodes_r(&self) -> usize {
        self.nr
    }

    /// Nodes along z.
    pub fn nodes_z(&self) -> usize {
        self.nz
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nr + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(PartialEq)]
struct Item {
    value: f64,
    node: usize,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.value.total_cmp(&self.value).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Lattice<'a> {
    n_r: usize,
    n_z: usize,
    dr: f64,
    dz: f64,
    slowness: &'a [f64],
}

impl Lattice<'_> {
    fn cell(&self, ci: isize, cj: isize) -> Option<f64> {
        if ci < 0 || cj < 0 || ci >= self.n_r as isize || cj >= self.n_z as isize {
            None
        } else {
            Some(self.slowness[cj as usize * self.n_r + ci as usize])
        }
    }

    fn node(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i > self.n_r as isize || j > self.n_z as isize {
            None
        } else {
            Some(j as usize * (self.n_r + 1) + i as usize)
        }
    }

    /// Smallest upwind candidate at node `(i, j)` given the values that
    /// `known` exposes (infinite when unavailable).
    fn update(&self, i: usize, j: usize, known: impl Fn(usize) -> f64) -> f64 {
        let (i, j) = (i as isize, j as isize);
        let value = |n: Option<usize>| n.map_or(f64::INFINITY, &known);
        let mut best = f64::INFINITY;
        // Edge updates use the faster of the two cells along the edge.
        for (di, dj, h) in [(-1, 0, self.dr), (1, 0, self.dr), (0, -1, self.dz), (0, 1, self.dz)] {
            let a = value(self.node(i + di, j + dj));
            if !a.is_finite() {
                continue;
            }
            let (c1, c2) = if di != 0 {
                let ci = i + di.min(0);
                (self.cell(ci, j - 1), self.cell(ci, j))
            } else {
                let cj = j + dj.min(0);
                (self.cell(i - 1, cj), self.cell(i, cj))
            };
            let f = match (c1, c2) {
                (Some(x), Some(y)) => x.min(y),
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => continue,
            };
            best = best.min(a + h * f);
        }
        // Quadrant updates use the quadrant's own cell.
        for (di, dj) in [(-1, -1), (1, -1), (-1, 1), (1, 1)] {
            let Some(f) = self.cell(i + di.min(0), j + dj.min(0)) else { continue };
            let a = value(self.node(i + di, j));
            let b = value(self.node(i, j + dj));
            if !(a.is_finite() && b.is_finite()) {
                continue;
            }
            let (pr, pz) = (1.0 / (self.dr * self.dr), 1.0 / (self.dz * self.dz));
            let qa = pr + pz;
            let qb = -2.0 * (a * pr + b * pz);
            let qc = a * a * pr + b * b * pz - f * f;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                continue;
            }
            let root = (-qb + disc.sqrt()) / (2.0 * qa);
            if root >= a.max(b) {
                best = best.min(root);
            }
        }
        best
    }
}

fn slowness_of(grid: &QuadGrid, speed: &[f64]) -> Result<Vec<f64>, RocketError> {
    let n = grid.n_r() * grid.n_z();
    if speed.len() != n {
        return Err(RocketError::Dimension {
            expected: n,
            got: speed.len(),
        });
    }
    speed
        .iter()
        .enumerate()
        .map(|(c, &s)| {
            if s > 0.0 && s.is_finite() {
                Ok(1.0 / s)
            } else {
                Err(RocketError::InvalidField { cell: c, value: s })
            }
        })
        .collect()
}

/// Arrival time from the outer casing: `|grad phi| = 1 / speed` with
/// `phi = 0` on every node at `r = r_max`.
pub fn solve_eikonal(grid: &QuadGrid, speed: &[f64]) -> Result<ArrivalTimeField, RocketError> {
    let sources: Vec<(usize, f64)> = (0..=grid.n_z()).map(|j| (grid.node_index(grid.n_r(), j), 0.0)).collect();
    solve_eikonal_with_sources(grid, speed, &sources)
}

/// First-order fast marching from arbitrary fixed node values. Nodes are
/// accepted in non-decreasing order of arrival time.
pub fn solve_eikonal_with_sources(
    grid: &QuadGrid,
    speed: &[f64],
    sources: &[(usize, f64)],
) -> Result<ArrivalTimeField, RocketError> {
    let slowness = slowness_of(grid, speed)?;
    let lattice = Lattice {
        n_r: grid.n_r(),
        n_z: grid.n_z(),
        dr: grid.dr(),
        dz: grid.dz(),
        slowness: &slowness,
    };
    let nr = grid.n_r() + 1;
    let n = grid.n_nodes();
    let mut values = vec![f64::INFINITY; n];
    let mut known = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &(node, v) in sources {
        if node >= n || !v.is_finite() {
            return Err(RocketError::InvalidSource(node));
        }
        values[node] = values[node].min(v);
        heap.push(Item { value: values[node], node });
    }
    while let Some(Item { value, node }) = heap.pop() {
        if known[node] || value > values[node] {
            continue;
        }
        known[node] = true;
        let (i, j) = ((node % nr) as isize, (node / nr) as isize);
        for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            let Some(nb) = lattice.node(i + di, j + dj) else { continue };
            if known[nb] {
                continue;
            }
            let v = lattice.update(nb % nr, nb / nr, |k| if known[k] { values[k] } else { f64::INFINITY });
            if v < values[nb] {
                values[nb] = v;
                heap.push(Item { value: v, node: nb });
            }
        }
    }
    Ok(ArrivalTimeField {
        nr,
        nz: grid.n_z() + 1,
        values,
    })
}

/// Largest `|phi - update(phi)|` over non-source nodes, with every neighbor
/// treated as final.
pub fn eikonal_residual(grid: &QuadGrid, speed: &[f64], phi: &ArrivalTimeField, sources: &[usize]) -> Result<f64, RocketError> {
    let slowness = slowness_of(grid, speed)?;
    let lattice = Lattice {
        n_r: grid.n_r(),
        n_z: grid.n_z(),
        dr: grid.dr(),
        dz: grid.dz(),
        slowness: &slowness,
    };
    let nr = grid.n_r() + 1;
    let mut is_source = vec![false; grid.n_nodes()];
    for &s in sources {
        is_source[s] = true;
    }
    let mut worst = 0.0f64;
    for node in 0..grid.n_nodes() {
        if is_source[node] {
            continue;
        }
        let v = lattice.update(node % nr, node / nr, |k| phi.values[k]);
        worst = worst.max((v - phi.values[node]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_speed_is_exact_radially() {
        let g = QuadGrid::for_chamber(20, 8, 0.2, 1.0, 2.0).unwrap();
        let c = 0.5;
        let phi = solve_eikonal(&g, &vec![c; 160]).unwrap();
        for j in 0..=8 {
            for i in 0..=20 {
                let (r, _) = g.node_position(i, j);
                assert!((phi.at(i, j) - (1.0 - r) / c).abs() < 1e-12);
            }
            assert_eq!(phi.at(20, j), 0.0);
        }
    }

    #[test]
    fn rejects_non_positive_speed() {
        let g = QuadGrid::new(2, 2, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            solve_eikonal(&g, &[1.0, 0.0, 1.0, 1.0]),
            Err(RocketError::InvalidField { cell: 1, .. })
        ));
    }

    #[test]
    fn residual_vanishes_on_heterogeneous_field() {
        let g = QuadGrid::new(15, 11, 0.1, 0.13, 0.0, 0.0).unwrap();
        let speed: Vec<f64> = (0..165).map(|c| 1.0 + 0.7 * ((c * 37 % 11) as f64 / 11.0)).collect();
        let phi = solve_eikonal(&g, &speed).unwrap();
        let sources: Vec<usize> = (0..=11).map(|j| g.node_index(15, j)).collect();
        assert!(eikonal_residual(&g, &speed, &phi, &sources).unwrap() <= 1e-10);
        assert!(phi.values().iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}
