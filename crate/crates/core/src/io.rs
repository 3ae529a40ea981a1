//! Plain-text output: CSV helpers and legacy ASCII VTK writers.

use std::io::{self, Write};
use std::path::Path;

use crate::mesh::{QuadGrid, TetMesh};
use crate::topopt::Support;

/// Formats with 17 significant digits so values round-trip exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("field '{name}' has {got} values, expected {expected}")]
    FieldLength { name: String, expected: usize, got: usize },
}

fn check_fields(fields: &[(&str, &[f64])], n: usize) -> Result<(), IoError> {
    for (name, v) in fields {
        if v.len() != n {
            return Err(IoError::FieldLength {
                name: name.to_string(),
                expected: n,
                got: v.len(),
            });
        }
    }
    Ok(())
}

fn io_err(path: &str) -> impl Fn(io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_string(),
        source,
    }
}

fn write_cell_data<W: Write>(out: &mut W, n: usize, fields: &[(&str, &[f64])]) -> io::Result<()> {
    writeln!(out, "CELL_DATA {n}")?;
    for (name, values) in fields {
        writeln!(out, "SCALARS {} double 1", name.replace(char::is_whitespace, "_"))?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in *values {
            writeln!(out, "{}", format_float(*v))?;
        }
    }
    Ok(())
}

/// Quad grid as a legacy `STRUCTURED_GRID` in the `z = 0` plane, with `r`
/// along x and the axial coordinate along y.
pub fn write_vtk_structured<W: Write>(mut out: W, grid: &QuadGrid, title: &str, fields: &[(&str, &[f64])]) -> Result<(), IoError> {
    let n = grid.n_r() * grid.n_z();
    check_fields(fields, n)?;
    let e = io_err("<vtk>");
    let mut body = || -> io::Result<()> {
        writeln!(out, "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET STRUCTURED_GRID", title.lines().next().unwrap_or(""))?;
        writeln!(out, "DIMENSIONS {} {} 1", grid.n_r() + 1, grid.n_z() + 1)?;
        writeln!(out, "POINTS {} double", grid.n_nodes())?;
        for j in 0..=grid.n_z() {
            for i in 0..=grid.n_r() {
                let (r, z) = grid.node_position(i, j);
                writeln!(out, "{} {} 0", format_float(r), format_float(z))?;
            }
        }
        write_cell_data(&mut out, n, fields)
    };
    body().map_err(e)
}

/// Tetrahedral mesh as a legacy `UNSTRUCTURED_GRID` with per-cell scalars.
pub fn write_vtk_unstructured<W: Write>(mut out: W, mesh: &TetMesh, title: &str, fields: &[(&str, &[f64])]) -> Result<(), IoError> {
    let n = mesh.tets().len();
    check_fields(fields, n)?;
    let e = io_err("<vtk>");
    let mut body = || -> io::Result<()> {
        writeln!(out, "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET UNSTRUCTURED_GRID", title.lines().next().unwrap_or(""))?;
        writeln!(out, "POINTS {} double", mesh.n_vertices())?;
        for p in mesh.vertices() {
            writeln!(out, "{} {} {}", format_float(p[0]), format_float(p[1]), format_float(p[2]))?;
        }
        writeln!(out, "CELLS {n} {}", 5 * n)?;
        for t in mesh.tets() {
            writeln!(out, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
        }
        writeln!(out, "CELL_TYPES {n}")?;
        for _ in 0..n {
            writeln!(out, "10")?;
        }
        write_cell_data(&mut out, n, fields)
    };
    body().map_err(e)
}

/// One row per index, one column per field.
pub fn write_columns_csv<W: Write>(mut out: W, index: &str, fields: &[(&str, &[f64])]) -> Result<(), IoError> {
    let n = fields.first().map_or(0, |f| f.1.len());
    check_fields(fields, n)?;
    let e = io_err("<csv>");
    let mut body = || -> io::Result<()> {
        write!(out, "{index}")?;
        for (name, _) in fields {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for i in 0..n {
            write!(out, "{i}")?;
            for (_, v) in fields {
                write!(out, ",{}", format_float(v[i]))?;
            }
            writeln!(out)?;
        }
        Ok(())
    };
    body().map_err(e)
}

/// Numeric CSV rows with exactly `width` columns. A non-numeric first line
/// is taken as a header; blank lines and `#` comments are skipped.
pub fn read_numeric_csv(path: &Path, width: usize) -> Result<Vec<Vec<f64>>, IoError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(io_err(&p))?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) if row.len() == width => rows.push(row),
            Ok(row) => {
                return Err(IoError::Parse {
                    path: p,
                    line: n + 1,
                    msg: format!("expected {width} columns, found {}", row.len()),
                })
            }
            Err(_) if rows.is_empty() && n == 0 => continue,
            Err(err) => {
                return Err(IoError::Parse {
                    path: p,
                    line: n + 1,
                    msg: err.to_string(),
                })
            }
        }
    }
    Ok(rows)
}

fn node_index(v: f64, path: &str, line: usize) -> Result<usize, IoError> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(IoError::Parse {
            path: path.to_string(),
            line,
            msg: format!("bad index {v}"),
        })
    }
}

/// `node,component,value` rows, component 0..=2 for x, y, z.
pub fn read_supports_csv(path: &Path) -> Result<Vec<Support>, IoError> {
    let p = path.display().to_string();
    read_numeric_csv(path, 3)?
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            Ok(Support {
                node: node_index(r[0], &p, k + 1)?,
                component: node_index(r[1], &p, k + 1)?,
                value: r[2],
            })
        })
        .collect()
}

/// `node,fx,fy,fz` rows summed into a dense load vector.
pub fn read_loads_csv(path: &Path, n_vertices: usize) -> Result<Vec<f64>, IoError> {
    let p = path.display().to_string();
    let mut loads = vec![0.0; 3 * n_vertices];
    for (k, r) in read_numeric_csv(path, 4)?.into_iter().enumerate() {
        let node = node_index(r[0], &p, k + 1)?;
        if node >= n_vertices {
            return Err(IoError::Parse {
                path: p,
                line: k + 1,
                msg: format!("node {node} out of range"),
            });
        }
        for c in 0..3 {
            loads[3 * node + c] += r[1 + c];
        }
    }
    Ok(loads)
}

pub fn write_supports_csv<W: Write>(mut out: W, supports: &[Support]) -> io::Result<()> {
    writeln!(out, "node,component,value")?;
    for s in supports {
        writeln!(out, "{},{},{}", s.node, s.component, format_float(s.value))?;
    }
    Ok(())
}

/// Rows for every node with a non-zero load.
pub fn write_loads_csv<W: Write>(mut out: W, loads: &[f64]) -> io::Result<()> {
    writeln!(out, "node,fx,fy,fz")?;
    for (node, f) in loads.chunks(3).enumerate() {
        if f.iter().any(|&x| x != 0.0) {
            writeln!(out, "{node},{},{},{}", format_float(f[0]), format_float(f[1]), format_float(f[2]))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topopt::{box_tet_mesh, cantilever_model};

    #[test]
    fn float_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn vtk_layouts() {
        let g = QuadGrid::new(3, 2, 0.5, 1.0, 0.0, 0.0).unwrap();
        let mut buf = Vec::new();
        write_vtk_structured(&mut buf, &g, "rate", &[("rate", &[1.0; 6])]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("DIMENSIONS 4 3 1") && s.contains("POINTS 12 double") && s.contains("CELL_DATA 6"));
        assert!(write_vtk_structured(Vec::new(), &g, "x", &[("bad", &[1.0; 5])]).is_err());

        let m = box_tet_mesh([1, 1, 1], [1.0, 1.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_vtk_unstructured(&mut buf, &m, "t", &[("rho", &[0.5; 6]), ("id", &[1.0; 6])]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("CELLS 6 30") && s.contains("CELL_TYPES 6") && s.contains("SCALARS id double 1"));
    }

    #[test]
    fn boundary_condition_csv_round_trip() {
        let model = cantilever_model([2, 1, 1], [2.0, 1.0, 1.0], 3.0, 0.3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (bc, ld) = (dir.path().join("bc.csv"), dir.path().join("loads.csv"));
        write_supports_csv(std::fs::File::create(&bc).unwrap(), model.supports()).unwrap();
        write_loads_csv(std::fs::File::create(&ld).unwrap(), model.loads()).unwrap();
        assert_eq!(read_supports_csv(&bc).unwrap(), model.supports());
        assert_eq!(read_loads_csv(&ld, model.mesh().n_vertices()).unwrap(), model.loads());
        std::fs::write(&bc, "node,component,value\n1,0\n").unwrap();
        assert!(matches!(read_supports_csv(&bc), Err(IoError::Parse { line: 2, .. })));
    }
}
