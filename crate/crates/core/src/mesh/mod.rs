//! Conforming triangle meshes, structured quadrilateral grids, and the
//! geometric quantities the stabilization needs (cell diameters, areas).

mod locate;
mod quad;
mod text;

pub use locate::PointLocator;
pub use quad::{build_bent_quad_grid, crisscross_refine, BentChannel, GeometryMap, QuadGrid};
pub use text::{read_mesh_text, write_mesh_text};

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{invalid, Result};

pub type Point = [f64; 2];

/// Boundary condition tag carried by boundary edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Wall,
    Inlet,
    Outlet,
}

impl Marker {
    pub fn as_index(self) -> usize {
        match self {
            Marker::Wall => 0,
            Marker::Inlet => 1,
            Marker::Outlet => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Marker::Wall),
            1 => Some(Marker::Inlet),
            2 => Some(Marker::Outlet),
            _ => None,
        }
    }

    /// Wall beats inlet beats outlet where a vertex touches several markers.
    pub fn priority(self) -> u8 {
        match self {
            Marker::Wall => 3,
            Marker::Inlet => 2,
            Marker::Outlet => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: Marker,
}

/// How each structured quadrilateral is split into triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    /// Two triangles per quad along the (i,j)-(i+1,j+1) diagonal.
    Right,
    /// Four triangles per quad meeting at the quad barycenter.
    CrissCross,
}

/// Unique edges of a mesh. Local edge `e` of a cell joins local vertices
/// `e` and `(e+1)%3`.
#[derive(Debug, Clone)]
pub struct Edges {
    pub vertices: Vec<[usize; 2]>,
    pub cell_edges: Vec<[usize; 3]>,
    pub edge_cells: Vec<[Option<usize>; 2]>,
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    cell_diameter: Vec<f64>,
    parent: Option<Vec<usize>>,
    edges: OnceLock<Edges>,
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    /// Builds a mesh and checks orientation, conformity, and that the marked
    /// boundary edges are exactly the edges owned by a single cell.
    pub fn new(
        vertices: Vec<Point>,
        cells: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(invalid!("mesh has no cells"));
        }
        let nv = vertices.len();
        for (c, cell) in cells.iter().enumerate() {
            if cell.iter().any(|&v| v >= nv) {
                return Err(invalid!("cell {c} references a missing vertex"));
            }
            let area = signed_area(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
            if area.is_nan() || area <= 0.0 {
                return Err(invalid!("cell {c} has nonpositive signed area {area}"));
            }
        }

        let cell_diameter = cells
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| vertices[v]);
                dist(a, b).max(dist(b, c)).max(dist(c, a))
            })
            .collect();

        let mesh = TriMesh {
            vertices,
            cells,
            boundary_edges,
            cell_diameter,
            parent: None,
            edges: OnceLock::new(),
        };
        mesh.check_boundary()?;
        Ok(mesh)
    }

    pub(crate) fn with_parent(mut self, parent: Vec<usize>) -> Self {
        debug_assert_eq!(parent.len(), self.cells.len());
        self.parent = Some(parent);
        self
    }

    fn check_boundary(&self) -> Result<()> {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for cell in &self.cells {
            for e in 0..3 {
                let key = edge_key(cell[e], cell[(e + 1) % 3]);
                let n = owner.entry(key).or_insert(0);
                *n += 1;
                if *n > 2 {
                    return Err(invalid!("edge {key:?} is shared by more than two cells"));
                }
            }
        }
        let mut marked: HashMap<(usize, usize), ()> = HashMap::new();
        for be in &self.boundary_edges {
            let key = edge_key(be.vertices[0], be.vertices[1]);
            match owner.get(&key) {
                Some(1) => {}
                Some(_) => return Err(invalid!("boundary edge {key:?} is interior")),
                None => return Err(invalid!("boundary edge {key:?} is not a mesh edge")),
            }
            if marked.insert(key, ()).is_some() {
                return Err(invalid!("boundary edge {key:?} is listed twice"));
            }
        }
        let unmarked = owner
            .iter()
            .filter(|(k, &n)| n == 1 && !marked.contains_key(*k))
            .count();
        if unmarked > 0 {
            return Err(invalid!("{unmarked} single-cell edges carry no boundary marker"));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Longest edge of each cell.
    pub fn cell_diameters(&self) -> &[f64] {
        &self.cell_diameter
    }

    pub fn h_max(&self) -> f64 {
        self.cell_diameter.iter().cloned().fold(0.0, f64::max)
    }

    /// Parent quadrilateral of each triangle when the mesh came from a grid.
    pub fn parent(&self) -> Option<&[usize]> {
        self.parent.as_deref()
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        self.cells[c].map(|v| self.vertices[v])
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, p] = self.cell_points(c);
        signed_area(a, b, p)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    pub fn edges(&self) -> &Edges {
        self.edges.get_or_init(|| {
            let mut index: HashMap<(usize, usize), usize> = HashMap::new();
            let mut vertices = Vec::new();
            let mut edge_cells: Vec<[Option<usize>; 2]> = Vec::new();
            let mut cell_edges = Vec::with_capacity(self.cells.len());
            for (c, cell) in self.cells.iter().enumerate() {
                let mut ce = [0; 3];
                for (e, slot) in ce.iter_mut().enumerate() {
                    let key = edge_key(cell[e], cell[(e + 1) % 3]);
                    let id = *index.entry(key).or_insert_with(|| {
                        vertices.push([key.0, key.1]);
                        edge_cells.push([None, None]);
                        vertices.len() - 1
                    });
                    if edge_cells[id][0].is_none() {
                        edge_cells[id][0] = Some(c);
                    } else {
                        edge_cells[id][1] = Some(c);
                    }
                    *slot = id;
                }
                cell_edges.push(ce);
            }
            Edges {
                vertices,
                cell_edges,
                edge_cells,
            }
        })
    }

    /// Marker of every boundary edge, keyed by the global edge index.
    pub fn boundary_edge_markers(&self) -> HashMap<usize, Marker> {
        let edges = self.edges();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, e) in edges.vertices.iter().enumerate() {
            lookup.insert((e[0], e[1]), i);
        }
        self.boundary_edges
            .iter()
            .map(|be| {
                let key = edge_key(be.vertices[0], be.vertices[1]);
                (lookup[&key], be.marker)
            })
            .collect()
    }

    pub fn has_marker(&self, m: Marker) -> bool {
        self.boundary_edges.iter().any(|e| e.marker == m)
    }

    /// Full conformity check, including hanging vertices lying inside a
    /// boundary edge. Quadratic in the boundary size; meant for tests.
    pub fn check_conformity(&self) -> Result<()> {
        self.check_boundary()?;
        for be in &self.boundary_edges {
            let a = self.vertices[be.vertices[0]];
            let b = self.vertices[be.vertices[1]];
            let len = dist(a, b);
            for (v, &p) in self.vertices.iter().enumerate() {
                if v == be.vertices[0] || v == be.vertices[1] {
                    continue;
                }
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                if cross.abs() > 1e-12 * len * len {
                    continue;
                }
                let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
                if t > 1e-12 && t < 1.0 - 1e-12 {
                    return Err(invalid!("vertex {v} hangs on edge {:?}", be.vertices));
                }
            }
        }
        Ok(())
    }
}

/// Structured triangle mesh of the rectangle `(x0,x1)×(y0,y1)`.
///
/// All boundary edges are WALL unless `channel` is set, in which case the
/// edges on `x = x0` are INLET and those on `x = x1` are OUTLET.
pub fn build_rect_tri_mesh(
    bounds: [f64; 4],
    nx: usize,
    ny: usize,
    pattern: Pattern,
    channel: bool,
) -> Result<TriMesh> {
    let mut grid = QuadGrid::rectangle(bounds, nx, ny)?;
    if channel {
        grid = grid.with_side_markers([Marker::Wall, Marker::Outlet, Marker::Wall, Marker::Inlet]);
    }
    grid.triangulate(pattern)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: [f64; 4] = [0.0, 1.0, 0.0, 1.0];

    #[test]
    fn unit_square_right_single_quad() {
        let m = build_rect_tri_mesh(UNIT, 1, 1, Pattern::Right, false).unwrap();
        assert_eq!(m.num_cells(), 2);
        assert_eq!(m.num_vertices(), 4);
        assert!((m.h_max() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.boundary_edges().len(), 4);
    }

    #[test]
    fn crisscross_counts_and_conformity() {
        let m = build_rect_tri_mesh(UNIT, 2, 2, Pattern::CrissCross, false).unwrap();
        assert_eq!(m.num_cells(), 16);
        m.check_conformity().unwrap();
        let m = build_rect_tri_mesh([0.0, 4.0, 0.0, 1.0], 40, 10, Pattern::CrissCross, true).unwrap();
        assert_eq!(m.num_cells(), 1600);
        assert!(m.has_marker(Marker::Inlet) && m.has_marker(Marker::Outlet));
    }

    #[test]
    fn area_sums_to_domain() {
        for pattern in [Pattern::Right, Pattern::CrissCross] {
            let m = build_rect_tri_mesh([-0.5, 1.5, 0.0, 2.0], 7, 5, pattern, false).unwrap();
            assert!((m.total_area() - 4.0).abs() < 4e-12);
        }
    }

    #[test]
    fn refinement_halves_h() {
        for pattern in [Pattern::Right, Pattern::CrissCross] {
            let h1 = build_rect_tri_mesh(UNIT, 4, 4, pattern, false).unwrap().h_max();
            let h2 = build_rect_tri_mesh(UNIT, 8, 8, pattern, false).unwrap().h_max();
            assert!((h1 / h2 - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(build_rect_tri_mesh(UNIT, 0, 1, Pattern::Right, false).is_err());
        assert!(build_rect_tri_mesh([1.0, 1.0, 0.0, 1.0], 1, 1, Pattern::Right, false).is_err());
    }

    #[test]
    fn rejects_clockwise_cell() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let b = vec![
            BoundaryEdge { vertices: [0, 1], marker: Marker::Wall },
            BoundaryEdge { vertices: [1, 2], marker: Marker::Wall },
            BoundaryEdge { vertices: [2, 0], marker: Marker::Wall },
        ];
        assert!(TriMesh::new(v.clone(), vec![[0, 2, 1]], b.clone()).is_err());
        assert!(TriMesh::new(v, vec![[0, 1, 2]], b).is_ok());
    }

    #[test]
    fn hanging_vertex_is_detected() {
        // Two cells on the left, one big cell on the right sharing a split edge.
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.5], [2.0, 0.5]];
        let cells = vec![[0, 1, 4], [0, 4, 3], [3, 4, 2], [1, 5, 2]];
        let edge = |a, b| BoundaryEdge { vertices: [a, b], marker: Marker::Wall };
        let b = vec![edge(0, 1), edge(2, 3), edge(3, 0), edge(1, 5), edge(5, 2), edge(1, 4), edge(4, 2), edge(1, 2)];
        // The split edge is listed as boundary so the cheap check passes,
        // but (1,2) is an interior seam through vertex 4.
        let err = TriMesh::new(v, cells, b).and_then(|m| m.check_conformity());
        assert!(err.is_err());
    }

    #[test]
    fn edges_are_shared_consistently() {
        let m = build_rect_tri_mesh(UNIT, 3, 2, Pattern::CrissCross, false).unwrap();
        let e = m.edges();
        let nb = e.edge_cells.iter().filter(|c| c[1].is_none()).count();
        assert_eq!(nb, m.boundary_edges().len());
        // Euler: V - E + F = 1 for a simply connected planar mesh.
        assert_eq!(m.num_vertices() + m.num_cells(), e.vertices.len() + 1);
    }
}
