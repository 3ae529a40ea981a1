use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Domain, ElementAdjacency, MeshError};

/// Linear tetrahedral mesh. Elements are stored with positive orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    vertices: Vec<[f64; 3]>,
    tets: Vec<[usize; 4]>,
}

const FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

pub(crate) fn signed_volume(p: [[f64; 3]; 4]) -> f64 {
    let a = sub(p[1], p[0]);
    let b = sub(p[2], p[0]);
    let c = sub(p[3], p[0]);
    dot(a, cross(b, c)) / 6.0
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl TetMesh {
    /// Validates indices, flips negatively oriented tets and requires a
    /// single face-connected component.
    pub fn new(vertices: Vec<[f64; 3]>, mut tets: Vec<[usize; 4]>) -> Result<Self, MeshError> {
        if tets.is_empty() {
            return Err(MeshError::InvalidDomain("mesh has no elements".into()));
        }
        for (index, t) in tets.iter_mut().enumerate() {
            if let Some(&v) = t.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::InvalidDomain(format!(
                    "element {index} references vertex {v} but only {} exist",
                    vertices.len()
                )));
            }
            let corners = [vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]];
            let volume = signed_volume(corners);
            let scale = corners
                .iter()
                .flat_map(|c| c.iter())
                .fold(0.0f64, |m, x| m.max(x.abs()))
                .max(1.0);
            if !volume.is_finite() || volume.abs() <= 1e-14 * scale.powi(3) {
                return Err(MeshError::Degenerate { index, volume });
            }
            if volume < 0.0 {
                t.swap(2, 3);
            }
        }
        let mesh = Self { vertices, tets };
        let (components, _) = mesh.face_adjacency()?.components();
        if components != 1 {
            return Err(MeshError::Disconnected(components));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn corners(&self, e: usize) -> [[f64; 3]; 4] {
        let t = self.tets[e];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]], self.vertices[t[3]]]
    }

    /// Mean edge length over all element edges (with repeats).
    pub fn mean_edge_length(&self) -> f64 {
        let mut total = 0.0;
        for e in 0..self.tets.len() {
            let p = self.corners(e);
            for a in 0..4 {
                for b in a + 1..4 {
                    let d = sub(p[a], p[b]);
                    total += dot(d, d).sqrt();
                }
            }
        }
        total / (6 * self.tets.len()) as f64
    }

    /// Reads the node file (`id x y z`) and element file (`id v0 v1 v2 v3`).
    /// Ids are 0-based and must be consecutive; `#` starts a comment.
    pub fn read_files(nodes: impl AsRef<Path>, elements: impl AsRef<Path>) -> Result<Self, MeshError> {
        let vertices = parse_rows::<f64, 3>(nodes.as_ref())?;
        let tets = parse_rows::<usize, 4>(elements.as_ref())?;
        Self::new(vertices, tets)
    }

    pub fn write_files(&self, nodes: impl AsRef<Path>, elements: impl AsRef<Path>) -> Result<(), MeshError> {
        let mut out = String::new();
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "{i} {:e} {:e} {:e}", v[0], v[1], v[2]).unwrap();
        }
        std::fs::write(nodes, out)?;
        let mut out = String::new();
        for (i, t) in self.tets.iter().enumerate() {
            writeln!(out, "{i} {} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
        }
        std::fs::write(elements, out)?;
        Ok(())
    }
}

fn parse_rows<T: std::str::FromStr, const N: usize>(path: &Path) -> Result<Vec<[T; N]>, MeshError>
where
    T: Copy + Default,
{
    let text = std::fs::read_to_string(path)?;
    let err = |line: usize, msg: String| MeshError::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let id: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(lineno + 1, "missing or bad id".into()))?;
        if id != rows.len() {
            return Err(err(lineno + 1, format!("expected id {}, found {id}", rows.len())));
        }
        let mut row = [T::default(); N];
        for slot in row.iter_mut() {
            *slot = fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(lineno + 1, format!("expected {N} values after the id")))?;
        }
        if fields.next().is_some() {
            return Err(err(lineno + 1, "trailing values".into()));
        }
        rows.push(row);
    }
    Ok(rows)
}

impl Domain for TetMesh {
    fn n_elements(&self) -> usize {
        self.tets.len()
    }

    /// Faces are matched by their sorted vertex triple.
    fn face_adjacency(&self) -> Result<ElementAdjacency, MeshError> {
        let mut owner: HashMap<[usize; 3], usize> = HashMap::with_capacity(2 * self.tets.len());
        let mut lists = vec![Vec::with_capacity(4); self.tets.len()];
        let mut shared: HashMap<[usize; 3], u8> = HashMap::new();
        for (e, t) in self.tets.iter().enumerate() {
            for face in FACES {
                let mut key = [t[face[0]], t[face[1]], t[face[2]]];
                key.sort_unstable();
                match owner.get(&key) {
                    None => {
                        owner.insert(key, e);
                    }
                    Some(&other) => {
                        let count = shared.entry(key).or_insert(0);
                        *count += 1;
                        if *count > 1 || other == e {
                            return Err(MeshError::NonManifold(key));
                        }
                        lists[e].push(other);
                        lists[other].push(e);
                    }
                }
            }
        }
        Ok(ElementAdjacency::from_sorted_lists(lists))
    }

    fn element_centroids(&self) -> Vec<[f64; 3]> {
        (0..self.tets.len())
            .map(|e| {
                let p = self.corners(e);
                let mut c = [0.0; 3];
                for q in p {
                    for k in 0..3 {
                        c[k] += q[k] / 4.0;
                    }
                }
                c
            })
            .collect()
    }

    fn element_measures(&self) -> Vec<f64> {
        (0..self.tets.len()).map(|e| signed_volume(self.corners(e))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_tet() -> (Vec<[f64; 3]>, Vec<[usize; 4]>) {
        (
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 1, 2, 3]],
        )
    }

    #[test]
    fn single_tet_volume_and_adjacency() {
        let (v, t) = unit_tet();
        let mesh = TetMesh::new(v, t).unwrap();
        assert!((mesh.element_measures()[0] - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(mesh.element_centroids()[0], [0.25, 0.25, 0.25]);
        let adj = mesh.face_adjacency().unwrap();
        assert_eq!(adj.degree(0), 0);
    }

    #[test]
    fn flips_negative_orientation() {
        let (v, _) = unit_tet();
        let mesh = TetMesh::new(v, vec![[0, 2, 1, 3]]).unwrap();
        assert!(mesh.element_measures()[0] > 0.0);
    }

    #[test]
    fn glued_pair() {
        let (mut v, mut t) = unit_tet();
        v.push([1.0, 1.0, 1.0]);
        t.push([1, 2, 3, 4]);
        let mesh = TetMesh::new(v, t).unwrap();
        let adj = mesh.face_adjacency().unwrap();
        assert_eq!(adj.neighbors(0), &[1]);
        assert_eq!(adj.neighbors(1), &[0]);
    }

    #[test]
    fn detects_non_manifold_face() {
        let (mut v, mut t) = unit_tet();
        v.push([1.0, 1.0, 1.0]);
        v.push([-1.0, 0.5, 0.5]);
        t.push([1, 2, 3, 4]);
        t.push([1, 2, 3, 5]);
        assert!(matches!(TetMesh::new(v, t), Err(MeshError::NonManifold(_))));
    }

    #[test]
    fn detects_degenerate_and_disconnected() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(matches!(
            TetMesh::new(v, vec![[0, 1, 2, 3]]),
            Err(MeshError::Degenerate { .. })
        ));
        let (mut v, mut t) = unit_tet();
        let base = v.len();
        v.extend([[5.0, 0.0, 0.0], [6.0, 0.0, 0.0], [5.0, 1.0, 0.0], [5.0, 0.0, 1.0]]);
        t.push([base, base + 1, base + 2, base + 3]);
        assert!(matches!(TetMesh::new(v, t), Err(MeshError::Disconnected(2))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (mut v, mut t) = unit_tet();
        v.push([1.0, 1.0, 1.0]);
        t.push([1, 2, 3, 4]);
        let mesh = TetMesh::new(v, t).unwrap();
        let (n, e) = (dir.path().join("m.node"), dir.path().join("m.ele"));
        mesh.write_files(&n, &e).unwrap();
        let back = TetMesh::read_files(&n, &e).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let n = dir.path().join("m.node");
        let e = dir.path().join("m.ele");
        std::fs::write(&n, "# header\n0 0 0 0\n1 1 0 0\n2 0 1 0\n3 0 0 1\n").unwrap();
        std::fs::write(&e, "0 0 1 2\n").unwrap();
        match TetMesh::read_files(&n, &e) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
