use std::collections::HashMap;

use super::fem::Support;
use super::TopOptError;
use crate::mesh::TetMesh;

/// Box `[0, size]` split into `n` hexahedra, six tetrahedra each, all cut
/// along the same main diagonal so neighbouring hexes conform.
pub fn box_tet_mesh(n: [usize; 3], size: [f64; 3]) -> Result<TetMesh, TopOptError> {
    if n.iter().any(|&k| k == 0) || size.iter().any(|&s| !(s > 0.0)) {
        return Err(TopOptError::Config(format!("invalid box {n:?} x {size:?}")));
    }
    let [nx, ny, nz] = n;
    let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    size[0] * i as f64 / nx as f64,
                    size[1] * j as f64 / ny as f64,
                    size[2] * k as f64 / nz as f64,
                ]);
            }
        }
    }
    const AXES: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for order in AXES {
                    let mut c = [0usize; 3];
                    let mut path = [vid(i, j, k); 4];
                    for (step, &axis) in order.iter().enumerate() {
                        c[axis] = 1;
                        path[step + 1] = vid(i + c[0], j + c[1], k + c[2]);
                    }
                    tets.push(path);
                }
            }
        }
    }
    Ok(TetMesh::new(vertices, tets)?)
}

/// Boundary triangles, i.e. element faces not shared with a neighbour.
pub fn boundary_faces(mesh: &TetMesh) -> Vec<[usize; 3]> {
    let mut count: HashMap<[usize; 3], (usize, [usize; 3])> = HashMap::new();
    for t in mesh.tets() {
        for skip in 0..4 {
            let face: Vec<usize> = (0..4).filter(|&a| a != skip).map(|a| t[a]).collect();
            let mut key = [face[0], face[1], face[2]];
            key.sort_unstable();
            count.entry(key).or_insert((0, key)).0 += 1;
        }
    }
    let mut faces: Vec<[usize; 3]> = count.into_values().filter(|(c, _)| *c == 1).map(|(_, f)| f).collect();
    faces.sort_unstable();
    faces
}

/// Consistent nodal loads of a uniform traction whose total force is
/// `total`, spread over the boundary faces whose vertices all satisfy
/// `on_face`.
pub fn surface_load(mesh: &TetMesh, on_face: impl Fn([f64; 3]) -> bool, total: [f64; 3]) -> Result<Vec<f64>, TopOptError> {
    let v = mesh.vertices();
    let faces: Vec<([usize; 3], f64)> = boundary_faces(mesh)
        .into_iter()
        .filter(|f| f.iter().all(|&i| on_face(v[i])))
        .map(|f| {
            let a = sub(v[f[1]], v[f[0]]);
            let b = sub(v[f[2]], v[f[0]]);
            let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            (f, 0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt())
        })
        .collect();
    let area: f64 = faces.iter().map(|f| f.1).sum();
    if !(area > 0.0) {
        return Err(TopOptError::Config("load surface selects no boundary faces".into()));
    }
    let mut loads = vec![0.0; 3 * mesh.n_vertices()];
    for (f, a) in faces {
        for &node in &f {
            for c in 0..3 {
                loads[3 * node + c] += total[c] * a / (3.0 * area);
            }
        }
    }
    Ok(loads)
}

/// Every component of every vertex satisfying `on_face` held at zero.
pub fn clamp_nodes(mesh: &TetMesh, on_face: impl Fn([f64; 3]) -> bool) -> Vec<Support> {
    mesh.vertices()
        .iter()
        .enumerate()
        .filter(|(_, p)| on_face(**p))
        .flat_map(|(node, _)| (0..3).map(move |component| Support { node, component, value: 0.0 }))
        .collect()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
