use rayon::prelude::*;

use super::element::{element_stiffness, ElementMatrix};
use super::TopOptError;
use crate::mesh::TetMesh;
use crate::sparse::{reverse_cuthill_mckee, CsrMatrix, SkylineCholesky};

/// A prescribed displacement component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub node: usize,
    /// 0, 1 or 2 for x, y, z.
    pub component: usize,
    pub value: f64,
}

/// Linear-elastic tetrahedral model with unit-modulus element matrices
/// cached; the modulus enters per element as a scalar factor.
#[derive(Debug, Clone)]
pub struct FemModel {
    mesh: TetMesh,
    nu: f64,
    supports: Vec<Support>,
    loads: Vec<f64>,
    unit: Vec<ElementMatrix>,
    /// Free-dof index per global dof.
    free: Vec<Option<usize>>,
    prescribed: Vec<f64>,
    n_free: usize,
    ordering: Vec<usize>,
    solver_tol: f64,
}

impl FemModel {
    pub fn new(mesh: TetMesh, nu: f64, supports: Vec<Support>, loads: Vec<f64>) -> Result<Self, TopOptError> {
        if !(nu > -1.0 && nu < 0.5) {
            return Err(TopOptError::Config(format!("Poisson ratio must lie in (-1, 0.5), got {nu}")));
        }
        let n_dof = 3 * mesh.n_vertices();
        if loads.len() != n_dof {
            return Err(TopOptError::Dimension {
                expected: n_dof,
                got: loads.len(),
            });
        }
        if supports.is_empty() {
            return Err(TopOptError::Config("at least one support is required".into()));
        }
        let mut fixed = vec![false; n_dof];
        let mut prescribed = vec![0.0; n_dof];
        for s in &supports {
            if s.node >= mesh.n_vertices() || s.component > 2 || !s.value.is_finite() {
                return Err(TopOptError::Config(format!("invalid support {s:?}")));
            }
            fixed[3 * s.node + s.component] = true;
            prescribed[3 * s.node + s.component] = s.value;
        }
        let mut n_free = 0;
        let free: Vec<Option<usize>> = fixed
            .iter()
            .map(|&f| {
                (!f).then(|| {
                    n_free += 1;
                    n_free - 1
                })
            })
            .collect();
        let unit = (0..mesh.tets().len())
            .into_par_iter()
            .map(|e| element_stiffness(&mesh.corners(e), 1.0, nu))
            .collect::<Result<Vec<_>, _>>()?;
        let mut model = Self {
            mesh,
            nu,
            supports,
            loads,
            unit,
            free,
            prescribed,
            n_free,
            ordering: Vec::new(),
            solver_tol: 1e-8,
        };
        let pattern = model.reduced_stiffness(&vec![1.0; model.n_elements()])?.0;
        model.ordering = reverse_cuthill_mckee(&pattern);
        Ok(model)
    }

    pub fn with_solver_tol(mut self, tol: f64) -> Self {
        self.solver_tol = tol;
        self
    }

    pub fn mesh(&self) -> &TetMesh {
        &self.mesh
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn supports(&self) -> &[Support] {
        &self.supports
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    pub fn n_elements(&self) -> usize {
        self.unit.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.loads.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Unit-modulus element matrix.
    pub fn unit_stiffness(&self, e: usize) -> &ElementMatrix {
        &self.unit[e]
    }

    fn dofs(&self, e: usize) -> [usize; 12] {
        let t = self.mesh.tets()[e];
        std::array::from_fn(|i| 3 * t[i / 3] + i % 3)
    }

    fn check_moduli(&self, moduli: &[f64]) -> Result<(), TopOptError> {
        if moduli.len() != self.n_elements() {
            return Err(TopOptError::Dimension {
                expected: self.n_elements(),
                got: moduli.len(),
            });
        }
        Ok(())
    }

    /// Full stiffness matrix without boundary conditions.
    pub fn assemble_stiffness(&self, moduli: &[f64]) -> Result<CsrMatrix, TopOptError> {
        self.check_moduli(moduli)?;
        let triplets: Vec<(usize, usize, f64)> = (0..self.n_elements())
            .into_par_iter()
            .flat_map_iter(|e| {
                let dofs = self.dofs(e);
                let k = &self.unit[e];
                let m = moduli[e];
                (0..144).map(move |ij| (dofs[ij / 12], dofs[ij % 12], m * k[(ij / 12, ij % 12)]))
            })
            .collect();
        Ok(CsrMatrix::from_triplets(self.n_dofs(), triplets))
    }

    /// Stiffness on free dofs and the matching right-hand side
    /// `F_free - K_fp u_p`.
    pub fn reduced_stiffness(&self, moduli: &[f64]) -> Result<(CsrMatrix, Vec<f64>), TopOptError> {
        self.check_moduli(moduli)?;
        let parts: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, f64)>)> = (0..self.n_elements())
            .into_par_iter()
            .map(|e| {
                let dofs = self.dofs(e);
                let k = &self.unit[e];
                let m = moduli[e];
                let mut trip = Vec::with_capacity(144);
                let mut rhs = Vec::new();
                for a in 0..12 {
                    let Some(fa) = self.free[dofs[a]] else { continue };
                    for b in 0..12 {
                        let v = m * k[(a, b)];
                        match self.free[dofs[b]] {
                            Some(fb) => trip.push((fa, fb, v)),
                            None => {
                                let up = self.prescribed[dofs[b]];
                                if up != 0.0 {
                                    rhs.push((fa, -v * up));
                                }
                            }
                        }
                    }
                }
                (trip, rhs)
            })
            .collect();
        let mut rhs = vec![0.0; self.n_free];
        for (dof, &f) in self.loads.iter().enumerate() {
            if let Some(i) = self.free[dof] {
                rhs[i] += f;
            }
        }
        let mut triplets = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
        for (t, r) in parts {
            triplets.extend(t);
            for (i, v) in r {
                rhs[i] += v;
            }
        }
        Ok((CsrMatrix::from_triplets(self.n_free, triplets), rhs))
    }

    /// Solves `K u = F` with supports eliminated; returns all dofs.
    pub fn solve_displacements(&self, moduli: &[f64]) -> Result<Vec<f64>, TopOptError> {
        let (k, rhs) = self.reduced_stiffness(moduli)?;
        let chol = SkylineCholesky::factor_with_ordering(&k, self.ordering.clone())?;
        let x = chol.solve(&rhs)?;
        let r = k.mul_vec(&x);
        let res: f64 = r.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
        if norm > 0.0 && res > self.solver_tol * norm {
            return Err(TopOptError::Residual(res / norm));
        }
        Ok(self
            .free
            .iter()
            .enumerate()
            .map(|(dof, f)| f.map_or(self.prescribed[dof], |i| x[i]))
            .collect())
    }

    /// `u_e^T k0_e u_e` for every element.
    pub fn element_energies(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n_elements())
            .into_par_iter()
            .map(|e| {
                let dofs = self.dofs(e);
                let ue = nalgebra::SVector::<f64, 12>::from_fn(|i, _| u[dofs[i]]);
                (ue.transpose() * self.unit[e] * ue)[(0, 0)]
            })
            .collect()
    }
}

/// `F^T u`.
pub fn compliance(u: &[f64], f: &[f64]) -> f64 {
    u.iter().zip(f).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topopt::box_tet_mesh;

    fn clamped_block(load: f64) -> FemModel {
        let mesh = box_tet_mesh([3, 2, 2], [3.0, 1.0, 1.0]).unwrap();
        let mut supports = Vec::new();
        let mut loads = vec![0.0; 3 * mesh.n_vertices()];
        for (i, v) in mesh.vertices().iter().enumerate() {
            if v[0] == 0.0 {
                supports.extend((0..3).map(|c| Support { node: i, component: c, value: 0.0 }));
            }
            if v[0] == 3.0 {
                loads[3 * i + 2] = load;
            }
        }
        FemModel::new(mesh, 0.3, supports, loads).unwrap()
    }

    #[test]
    fn stiffness_is_symmetric_and_linear_in_modulus() {
        let m = clamped_block(1.0);
        let k1 = m.assemble_stiffness(&vec![1.0; m.n_elements()]).unwrap();
        let k2 = m.assemble_stiffness(&vec![2.0; m.n_elements()]).unwrap();
        assert_eq!(k1.asymmetry(), 0.0);
        assert_eq!(k2, k1.scaled(2.0));
    }

    #[test]
    fn compliance_scaling_and_superposition() {
        let m = clamped_block(-1.0);
        let e = vec![1.0; m.n_elements()];
        let u = m.solve_displacements(&e).unwrap();
        let c = compliance(&u, m.loads());
        assert!(c > 0.0);
        let k = m.assemble_stiffness(&e).unwrap();
        let uku = compliance(&k.mul_vec(&u), &u);
        assert!((uku - c).abs() <= 1e-9 * c);
        let u2 = m.solve_displacements(&vec![2.0; m.n_elements()]).unwrap();
        assert!((compliance(&u2, m.loads()) - c / 2.0).abs() <= 1e-12 * c);

        let zero = clamped_block(0.0);
        assert!(zero.solve_displacements(&e).unwrap().iter().all(|&x| x == 0.0));
        let a = clamped_block(2.5);
        let ua = a.solve_displacements(&e).unwrap();
        for (x, y) in ua.iter().zip(&u) {
            assert!((x + 2.5 * y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn floating_structure_is_singular() {
        let mesh = box_tet_mesh([1, 1, 1], [1.0, 1.0, 1.0]).unwrap();
        let loads = vec![0.0; 3 * mesh.n_vertices()];
        let m = FemModel::new(mesh, 0.3, vec![Support { node: 0, component: 0, value: 0.0 }], loads).unwrap();
        assert!(m.solve_displacements(&vec![1.0; m.n_elements()]).is_err());
    }
}
