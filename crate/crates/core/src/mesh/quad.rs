use super::{Domain, ElementAdjacency, MeshError};

/// Structured quad lattice over the axisymmetric (r, z) cross-section.
///
/// Cell `(i, j)` has radial index `i < n_r` and axial index `j < n_z`; its flat
/// index is `j * n_r + i`. Nodes are numbered the same way on the
/// `(n_r + 1) x (n_z + 1)` vertex lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    n_r: usize,
    n_z: usize,
    dr: f64,
    dz: f64,
    r0: f64,
    z0: f64,
}

impl QuadGrid {
    pub fn new(n_r: usize, n_z: usize, dr: f64, dz: f64, r0: f64, z0: f64) -> Result<Self, MeshError> {
        if n_r < 2 || n_z < 2 {
            return Err(MeshError::InvalidDomain(format!(
                "grid needs at least 2x2 cells, got {n_r}x{n_z}"
            )));
        }
        if !(dr > 0.0 && dz > 0.0) || !dr.is_finite() || !dz.is_finite() {
            return Err(MeshError::InvalidDomain(format!(
                "cell spacing must be positive, got dr={dr}, dz={dz}"
            )));
        }
        if !r0.is_finite() || !z0.is_finite() || r0 < 0.0 {
            return Err(MeshError::InvalidDomain(format!("bad grid origin ({r0}, {z0})")));
        }
        Ok(Self { n_r, n_z, dr, dz, r0, z0 })
    }

    /// Grid covering the full rectangle `[0, r_out] x [0, length]` of a
    /// cylindrical chamber. Cells inside the bore (`r < r_in`) are part of the
    /// grid so the design field is defined on the whole cross-section.
    pub fn for_chamber(n_r: usize, n_z: usize, r_in: f64, r_out: f64, length: f64) -> Result<Self, MeshError> {
        if !(r_in >= 0.0 && r_in < r_out && length > 0.0) {
            return Err(MeshError::InvalidDomain(format!(
                "chamber needs 0 <= r_in < r_out and length > 0, got r_in={r_in}, r_out={r_out}, length={length}"
            )));
        }
        Self::new(n_r, n_z, r_out / n_r as f64, length / n_z as f64, 0.0, 0.0)
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.r0, self.z0)
    }

    pub fn r_max(&self) -> f64 {
        self.r0 + self.n_r as f64 * self.dr
    }

    pub fn z_max(&self) -> f64 {
        self.z0 + self.n_z as f64 * self.dz
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n_r && j < self.n_z);
        j * self.n_r + i
    }

    #[inline]
    pub fn cell_coords(&self, index: usize) -> (usize, usize) {
        (index % self.n_r, index / self.n_r)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.r0 + (i as f64 + 0.5) * self.dr,
            self.z0 + (j as f64 + 0.5) * self.dz,
        )
    }

    pub fn n_nodes(&self) -> usize {
        (self.n_r + 1) * (self.n_z + 1)
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.n_r + 1) + i
    }

    pub fn node_position(&self, i: usize, j: usize) -> (f64, f64) {
        (self.r0 + i as f64 * self.dr, self.z0 + j as f64 * self.dz)
    }
}

impl Domain for QuadGrid {
    fn n_elements(&self) -> usize {
        self.n_r * self.n_z
    }

    fn face_adjacency(&self) -> Result<ElementAdjacency, MeshError> {
        let mut lists = vec![Vec::with_capacity(4); self.n_elements()];
        for j in 0..self.n_z {
            for i in 0..self.n_r {
                let list = &mut lists[self.cell_index(i, j)];
                if j > 0 {
                    list.push(self.cell_index(i, j - 1));
                }
                if i > 0 {
                    list.push(self.cell_index(i - 1, j));
                }
                if i + 1 < self.n_r {
                    list.push(self.cell_index(i + 1, j));
                }
                if j + 1 < self.n_z {
                    list.push(self.cell_index(i, j + 1));
                }
            }
        }
        Ok(ElementAdjacency::from_sorted_lists(lists))
    }

    fn element_centroids(&self) -> Vec<[f64; 3]> {
        (0..self.n_elements())
            .map(|e| {
                let (i, j) = self.cell_coords(e);
                let (r, z) = self.cell_center(i, j);
                [r, z, 0.0]
            })
            .collect()
    }

    fn element_measures(&self) -> Vec<f64> {
        vec![self.dr * self.dz; self.n_elements()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_chamber_grid() {
        let g = QuadGrid::for_chamber(2, 2, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(g.n_elements(), 4);
        assert_eq!(g.dr(), 0.5);
        assert_eq!(g.dz(), 0.5);
        let total: f64 = g.element_measures().iter().sum();
        assert_eq!(total, 1.0);
        let adj = g.face_adjacency().unwrap();
        for e in 0..4 {
            assert_eq!(adj.degree(e), 2);
        }
    }

    #[test]
    fn published_cross_section_sizes() {
        let g = QuadGrid::for_chamber(100, 30, 0.3, 1.0, 3.0).unwrap();
        assert_eq!(g.n_elements(), 3000);
        let g = QuadGrid::for_chamber(60, 30, 0.3, 1.0, 3.0).unwrap();
        assert_eq!(g.n_elements(), 1800);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(QuadGrid::for_chamber(1, 4, 0.0, 1.0, 1.0).is_err());
        assert!(QuadGrid::for_chamber(4, 4, 1.0, 1.0, 1.0).is_err());
        assert!(QuadGrid::for_chamber(4, 4, 0.0, 1.0, 0.0).is_err());
        assert!(QuadGrid::for_chamber(4, 4, -0.1, 1.0, 1.0).is_err());
        assert!(QuadGrid::new(3, 3, 0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn flat_index_round_trip() {
        let g = QuadGrid::new(7, 5, 0.1, 0.2, 0.0, 0.0).unwrap();
        for e in 0..g.n_elements() {
            let (i, j) = g.cell_coords(e);
            assert_eq!(g.cell_index(i, j), e);
        }
    }

    #[test]
    fn unit_cell_centroid() {
        let g = QuadGrid::new(2, 2, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(g.element_centroids()[0], [0.5, 0.5, 0.0]);
        assert_eq!(g.element_measures()[0], 1.0);
    }
}
