//! Output files: legacy VTK unstructured grids, CSV tables, atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::elements::FeFunction;
use crate::error::{invalid, Result};
use crate::mesh::TriMesh;

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| invalid!("output path {} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// Values attached to points or cells of a [`VtkMesh`].
#[derive(Debug, Clone, PartialEq)]
pub enum VtkData {
    Scalar(Vec<f64>),
    Vector(Vec<[f64; 2]>),
}

impl VtkData {
    fn len(&self) -> usize {
        match self {
            VtkData::Scalar(v) => v.len(),
            VtkData::Vector(v) => v.len(),
        }
    }

    /// Vertex values of a finite element function. Lagrange spaces number
    /// vertex dofs first, so the leading coefficients are the vertex values.
    pub fn from_function(f: &FeFunction) -> Self {
        let space = f.space();
        let nv = space.mesh().num_vertices();
        let ns = space.num_scalar_dofs();
        let c = f.coeffs();
        if space.components() == 1 {
            VtkData::Scalar(c[..nv].to_vec())
        } else {
            VtkData::Vector((0..nv).map(|i| [c[i], c[ns + i]]).collect())
        }
    }
}

/// Legacy ASCII VTK unstructured grid of triangles.
#[derive(Debug)]
pub struct VtkMesh<'a> {
    mesh: &'a TriMesh,
    title: String,
    point_data: Vec<(String, VtkData)>,
    cell_data: Vec<(String, VtkData)>,
}

/// Shortest round-trip representation, identical on every platform.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:e}")
    }
}

impl<'a> VtkMesh<'a> {
    pub fn new(mesh: &'a TriMesh, title: &str) -> Self {
        VtkMesh { mesh, title: title.replace('\n', " "), point_data: Vec::new(), cell_data: Vec::new() }
    }

    pub fn point_data(mut self, name: &str, data: VtkData) -> Result<Self> {
        if data.len() != self.mesh.num_vertices() {
            return Err(invalid!("point field {name} has {} values for {} points", data.len(), self.mesh.num_vertices()));
        }
        self.point_data.push((sanitize(name), data));
        Ok(self)
    }

    pub fn cell_data(mut self, name: &str, data: VtkData) -> Result<Self> {
        if data.len() != self.mesh.num_cells() {
            return Err(invalid!("cell field {name} has {} values for {} cells", data.len(), self.mesh.num_cells()));
        }
        self.cell_data.push((sanitize(name), data));
        Ok(self)
    }

    pub fn to_text(&self) -> String {
        let m = self.mesh;
        let mut s = String::new();
        s.push_str("# vtk DataFile Version 3.0\n");
        let _ = writeln!(s, "{}", self.title);
        s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
        let _ = writeln!(s, "POINTS {} double", m.num_vertices());
        for p in m.vertices() {
            let _ = writeln!(s, "{} {} 0", fmt_f64(p[0]), fmt_f64(p[1]));
        }
        let nc = m.num_cells();
        let _ = writeln!(s, "CELLS {nc} {}", 4 * nc);
        for c in m.cells() {
            let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
        }
        let _ = writeln!(s, "CELL_TYPES {nc}");
        for _ in 0..nc {
            s.push_str("5\n");
        }
        write_block(&mut s, "POINT_DATA", m.num_vertices(), &self.point_data);
        write_block(&mut s, "CELL_DATA", nc, &self.cell_data);
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}

fn write_block(s: &mut String, header: &str, n: usize, fields: &[(String, VtkData)]) {
    if fields.is_empty() {
        return;
    }
    let _ = writeln!(s, "{header} {n}");
    for (name, data) in fields {
        match data {
            VtkData::Scalar(v) => {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v {
                    let _ = writeln!(s, "{}", fmt_f64(*x));
                }
            }
            VtkData::Vector(v) => {
                let _ = writeln!(s, "VECTORS {name} double");
                for x in v {
                    let _ = writeln!(s, "{} {} 0", fmt_f64(x[0]), fmt_f64(x[1]));
                }
            }
        }
    }
}

/// Comma-separated table with a fixed header.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    /// Row whose first cell is a label.
    pub fn push_labeled(&mut self, label: &str, row: &[f64]) {
        assert_eq!(row.len() + 1, self.header.len(), "row width");
        let mut r = vec![label.to_string()];
        r.extend(row.iter().map(|&x| fmt_f64(x)));
        self.rows.push(r);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}
