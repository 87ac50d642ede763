//! Minimal whitespace-separated mesh format:
//!
//! ```text
//! nv nc nb
//! x y              (nv lines)
//! a b c            (nc lines, zero-based, counter-clockwise)
//! a b marker       (nb lines; marker is 0/1/2 or wall/inlet/outlet)
//! ```

use std::io::{BufRead, Write};

use super::{BoundaryEdge, Marker, TriMesh};
use crate::error::{Error, Result};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(format!("mesh text: {}", msg.into()))
}

fn parse_marker(tok: &str) -> Result<Marker> {
    match tok.to_ascii_lowercase().as_str() {
        "0" | "wall" => Ok(Marker::Wall),
        "1" | "inlet" => Ok(Marker::Inlet),
        "2" | "outlet" => Ok(Marker::Outlet),
        other => Err(parse_err(format!("unknown marker `{other}`"))),
    }
}

pub fn read_mesh_text<R: BufRead>(reader: R) -> Result<TriMesh> {
    let mut tokens = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("");
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| parse_err(format!("unexpected end reading {what}")));
    let count = |s: String| s.parse::<usize>().map_err(|e| parse_err(format!("bad count `{s}`: {e}")));
    let nv = count(next("header")?)?;
    let nc = count(next("header")?)?;
    let nb = count(next("header")?)?;

    let float = |s: String| s.parse::<f64>().map_err(|e| parse_err(format!("bad coordinate `{s}`: {e}")));
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push([float(next("vertex")?)?, float(next("vertex")?)?]);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        cells.push([count(next("cell")?)?, count(next("cell")?)?, count(next("cell")?)?]);
    }
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let a = count(next("boundary edge")?)?;
        let b = count(next("boundary edge")?)?;
        let marker = parse_marker(&next("boundary marker")?)?;
        boundary.push(BoundaryEdge { vertices: [a, b], marker });
    }
    TriMesh::new(vertices, cells, boundary)
}

pub fn write_mesh_text<W: Write>(mesh: &TriMesh, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {}", mesh.num_vertices(), mesh.num_cells(), mesh.boundary_edges().len())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {}", p[0], p[1])?;
    }
    for c in mesh.cells() {
        writeln!(w, "{} {} {}", c[0], c[1], c[2])?;
    }
    for e in mesh.boundary_edges() {
        writeln!(w, "{} {} {}", e.vertices[0], e.vertices[1], e.marker.as_index())?;
    }
    Ok(())
}
