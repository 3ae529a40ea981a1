use crate::mesh::ElementAdjacency;
use crate::sparse::CsrMatrix;

/// `L = D - A` on the dual graph, stored as a sparse symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    matrix: CsrMatrix,
}

impl LaplacianMatrix {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x)
    }

    /// `x^T L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

pub fn assemble_laplacian(adj: &ElementAdjacency) -> LaplacianMatrix {
    let n = adj.n_elements();
    let mut triplets = Vec::with_capacity(n + 2 * adj.n_shared_faces());
    for e in 0..n {
        triplets.push((e, e, adj.degree(e) as f64));
        for &j in adj.neighbors(e) {
            triplets.push((e, j, -1.0));
        }
    }
    LaplacianMatrix {
        matrix: CsrMatrix::from_triplets(n, triplets),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Domain, QuadGrid};

    #[test]
    fn two_element_path() {
        let adj = ElementAdjacency::from_lists(vec![vec![1], vec![0]]).unwrap();
        let l = assemble_laplacian(&adj);
        assert_eq!(l.matrix().get(0, 0), 1.0);
        assert_eq!(l.matrix().get(0, 1), -1.0);
        assert_eq!(l.matrix().get(1, 0), -1.0);
        assert_eq!(l.matrix().get(1, 1), 1.0);
    }

    #[test]
    fn isolated_element() {
        let adj = ElementAdjacency::from_lists(vec![vec![]]).unwrap();
        let l = assemble_laplacian(&adj);
        assert_eq!(l.matrix().to_dense()[(0, 0)], 0.0);
    }

    #[test]
    fn grid_rows_sum_to_zero() {
        let g = QuadGrid::new(2, 2, 1.0, 1.0, 0.0, 0.0).unwrap();
        let l = assemble_laplacian(&g.face_adjacency().unwrap());
        assert_eq!(l.matrix().diagonal(), vec![2.0; 4]);
        for i in 0..4 {
            assert_eq!(l.matrix().row(i).map(|(_, v)| v).sum::<f64>(), 0.0);
        }
        assert_eq!(l.matrix().asymmetry(), 0.0);
    }
}
