mod common;

use common::{dot, tensor_stiffness, Rng};
use slidebasis::mesh::TetMesh;
use slidebasis::optimize::{finite_difference_hessian, EvalCounter, ReducedProblem};
use slidebasis::spectral::{assemble_laplacian, reduce_gradient, synthesize_field, EigenOptions, Eigensolver};
use slidebasis::topopt::{
    box_tet_mesh, cantilever_model, clamp_nodes, compliance, element_stiffness, surface_load, FemModel, Support,
    ToPoConfig, TopOptDesign,
};
use slidebasis::filters::MaterialSet;
use slidebasis::{BasisBuilder, DesignProblem, Domain};

#[test]
fn single_tet_matches_symbolic_stiffness() {
    // Axis-aligned tet with legs (a, b, c): N1 = x/a, N2 = y/b, N3 = z/c.
    for (a, b, c) in [(1.0, 1.0, 1.0), (2.0, 0.5, 1.25)] {
        let corners = [[0.0, 0.0, 0.0], [a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]];
        let grads = [[-1.0 / a, -1.0 / b, -1.0 / c], [1.0 / a, 0.0, 0.0], [0.0, 1.0 / b, 0.0], [0.0, 0.0, 1.0 / c]];
        for (e, nu) in [(1.0, 0.3), (210.0, 0.0), (3.0, 0.45)] {
            let k = element_stiffness(&corners, e, nu).unwrap();
            let oracle = tensor_stiffness(&grads, a * b * c / 6.0, e, nu);
            let scale = oracle.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            for r in 0..12 {
                for s in 0..12 {
                    assert!((k[(r, s)] - oracle[r][s]).abs() <= 1e-12 * scale, "({r},{s}) legs {a},{b},{c}");
                }
            }
        }
    }
}

#[test]
fn patch_test_reproduces_uniform_strain() {
    let base = box_tet_mesh([3, 3, 3], [1.0, 1.0, 1.0]).unwrap();
    let mut rng = Rng::new(4);
    let on_boundary = |p: &[f64; 3]| p.iter().any(|&x| x == 0.0 || x == 1.0);
    let vertices: Vec<[f64; 3]> = base
        .vertices()
        .iter()
        .map(|p| {
            if on_boundary(p) {
                *p
            } else {
                [p[0] + rng.uniform(-0.08, 0.08), p[1] + rng.uniform(-0.08, 0.08), p[2] + rng.uniform(-0.08, 0.08)]
            }
        })
        .collect();
    let mesh = TetMesh::new(vertices, base.tets().to_vec()).unwrap();
    let grad_u = [[1e-3, 2e-4, -3e-4], [5e-4, -1e-3, 1e-4], [-2e-4, 3e-4, 7e-4]];
    let exact = |p: &[f64; 3], c: usize| 0.01 * c as f64 + (0..3).map(|d| grad_u[c][d] * p[d]).sum::<f64>();
    let mut supports = Vec::new();
    for (node, p) in mesh.vertices().iter().enumerate() {
        if on_boundary(p) {
            for c in 0..3 {
                supports.push(Support { node, component: c, value: exact(p, c) });
            }
        }
    }
    let n_dof = 3 * mesh.n_vertices();
    let model = FemModel::new(mesh, 0.3, supports, vec![0.0; n_dof]).unwrap();
    let u = model.solve_displacements(&vec![7.0; model.n_elements()]).unwrap();
    for (node, p) in model.mesh().vertices().iter().enumerate() {
        for c in 0..3 {
            assert!((u[3 * node + c] - exact(p, c)).abs() <= 1e-12, "node {node} comp {c}");
        }
    }
}

#[test]
fn stiffness_is_symmetric_and_compliance_positive() {
    let model = cantilever_model([4, 2, 2], [2.0, 1.0, 1.0], 10.0, 0.3).unwrap();
    let mut rng = Rng::new(8);
    let moduli = rng.vec(model.n_elements(), 0.5, 2.0);
    let k = model.assemble_stiffness(&moduli).unwrap();
    for i in 0..k.n() {
        for j in 0..k.n() {
            assert_eq!(k.get(i, j), k.get(j, i));
        }
    }
    let u = model.solve_displacements(&moduli).unwrap();
    assert!(compliance(&u, model.loads()) > 0.0);
}

fn small_design(materials: MaterialSet, filter_radius: Option<f64>) -> TopOptDesign {
    // 5 x 2 x 3 hexes: 180 tetrahedra.
    let mesh = box_tet_mesh([5, 2, 3], [2.5, 1.0, 1.5]).unwrap();
    let supports = clamp_nodes(&mesh, |p| p[0] == 0.0);
    let loads = surface_load(&mesh, |p| p[0] == 2.5, [0.0, 0.0, -1.0e3]).unwrap();
    let cfg = ToPoConfig {
        materials,
        filter_radius,
        ..ToPoConfig::default()
    };
    TopOptDesign::new(FemModel::new(mesh, 0.3, supports, loads).unwrap(), cfg).unwrap()
}

#[test]
fn reduced_gradients_match_central_differences() {
    for (materials, radius) in [(MaterialSet::beam(), None), (MaterialSet::bracket(), Some(0.0))] {
        let design = small_design(materials, radius);
        assert!(design.model().n_elements() <= 200);
        let lap = assemble_laplacian(&design.model().mesh().face_adjacency().unwrap());
        let builder = BasisBuilder::new(lap, EigenOptions::default()).unwrap();
        let mut problem = ReducedProblem::spectral(design, builder).unwrap();
        let k = 12;
        problem.reserve(k).unwrap();
        let mut rng = Rng::new(17);
        for trial in 0..5 {
            let w = rng.vec(k, -1.5, 1.5);
            let (_, analytic) = problem.evaluate_with_gradient(&w).unwrap();
            let fd = finite_difference_hessian(&problem, &w, 0..k, 1e-5, 1.0, &[0.0], &EvalCounter::new()).unwrap().gradient;
            for (name, a, b) in [("compliance", &analytic.objective, &fd.objective), ("mass", &analytic.constraints[0], &fd.constraints[0])] {
                let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for (j, (x, y)) in a.iter().zip(b.iter()).enumerate() {
                    assert!((x - y).abs() <= 1e-4 * scale, "trial {trial} {name}[{j}]: {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn reduce_gradient_is_the_adjoint_of_synthesis() {
    let mesh = box_tet_mesh([5, 2, 3], [2.5, 1.0, 1.5]).unwrap();
    let lap = assemble_laplacian(&mesh.face_adjacency().unwrap());
    let basis = Eigensolver::new(lap, EigenOptions::default()).unwrap().smallest(20).unwrap();
    let mut rng = Rng::new(2);
    for _ in 0..5 {
        let w = rng.vec(20, -1.0, 1.0);
        let df = rng.vec(mesh.n_elements(), -1.0, 1.0);
        let lhs = dot(&synthesize_field(&basis, &w).unwrap(), &df);
        let rhs = dot(&w, &reduce_gradient(&basis, &df).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}

#[test]
fn full_mass_budget_drives_toward_dense() {
    let model = small_design(MaterialSet::beam(), None).model().clone();
    let cfg = ToPoConfig {
        m_frac: 1.0,
        materials: MaterialSet::from_pairs(&[(0.0, 0.0), (1.0, 1.0e9)], 3.0),
        ..ToPoConfig::default()
    };
    let design = TopOptDesign::new(model, cfg).unwrap();
    let n = design.model().n_elements();
    let (lo, hi) = (design.forward(&vec![-0.5; n]).unwrap(), design.forward(&vec![0.5; n]).unwrap());
    assert!(hi.compliance < lo.compliance);
    let (dc, _) = design.field_gradients(&vec![0.0; n], &design.forward(&vec![0.0; n]).unwrap()).unwrap();
    assert!(dc.iter().all(|&g| g <= 0.0));
}
