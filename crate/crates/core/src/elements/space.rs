use std::sync::Arc;

use super::reference::RefElement;
use crate::error::{invalid, Result};
use crate::mesh::{Marker, Point, TriMesh};

pub type Mat2 = [[f64; 2]; 2];

/// Affine map `x = x0 + J ξ` from the reference triangle onto a cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub x0: Point,
    pub jac: Mat2,
    pub inv: Mat2,
    pub det: f64,
}

impl CellGeometry {
    pub fn new(p: [Point; 3]) -> Self {
        let jac = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        CellGeometry { x0: p[0], jac, inv, det }
    }

    pub fn map(&self, xi: [f64; 2]) -> Point {
        [
            self.x0[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.x0[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    /// Physical gradient `J⁻ᵀ ∇̂φ`.
    #[inline]
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }

    /// Physical Laplacian `tr(J⁻ᵀ Ĥ J⁻¹)` from reference `[xx, xy, yy]`.
    #[inline]
    pub fn laplacian(&self, h: [f64; 3]) -> f64 {
        let mut lap = 0.0;
        for i in 0..2 {
            let a = self.inv[0][i];
            let b = self.inv[1][i];
            lap += h[0] * a * a + 2.0 * h[1] * a * b + h[2] * b * b;
        }
        lap
    }
}

/// Continuous Lagrange space P_k (scalar or 2-vector) over a mesh.
///
/// Scalar dofs are numbered vertices first, then edge nodes, then cell
/// interior nodes. Vector components are stored in blocks: component `c`
/// of scalar dof `i` is global index `c * num_scalar_dofs + i`.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<TriMesh>,
    element: RefElement,
    components: usize,
    cell_dofs: Vec<usize>,
    dof_coords: Vec<Point>,
    boundary: Vec<Option<Marker>>,
}

impl FeSpace {
    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn element(&self) -> &RefElement {
        &self.element
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn num_scalar_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    /// Total dof count including all components.
    pub fn num_dofs(&self) -> usize {
        self.components * self.dof_coords.len()
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.element.num_nodes()
    }

    /// Scalar global dofs of cell `c`, in reference-node order.
    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        let n = self.element.num_nodes();
        &self.cell_dofs[c * n..(c + 1) * n]
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    /// Boundary marker of each scalar dof (None in the interior).
    pub fn boundary_markers(&self) -> &[Option<Marker>] {
        &self.boundary
    }

    /// Scalar dofs on edges carrying one of `markers`.
    pub fn boundary_dofs(&self, markers: &[Marker]) -> Vec<usize> {
        self.boundary
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_some_and(|m| markers.contains(&m)))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn all_boundary_dofs(&self) -> Vec<usize> {
        self.boundary_dofs(&[Marker::Wall, Marker::Inlet, Marker::Outlet])
    }

    pub fn geometry(&self, c: usize) -> CellGeometry {
        CellGeometry::new(self.mesh.cell_points(c))
    }

    pub fn same_mesh(&self, other: &FeSpace) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }
}

/// Builds the dof map of P_k with `components` ∈ {1, 2} on `mesh`.
pub fn build_space(mesh: Arc<TriMesh>, degree: usize, components: usize) -> Result<Arc<FeSpace>> {
    if components != 1 && components != 2 {
        return Err(invalid!("components must be 1 or 2, got {components}"));
    }
    let element = RefElement::new(degree)?;
    let nv = mesh.num_vertices();
    let edges = mesh.edges();
    let ne = edges.vertices.len();
    let per_edge = element.nodes_per_edge();
    let per_cell = element.nodes_per_interior();
    let n = element.num_nodes();
    let k = degree as f64;
    let total = nv + ne * per_edge + mesh.num_cells() * per_cell;

    let mut dof_coords = Vec::with_capacity(total);
    dof_coords.extend_from_slice(mesh.vertices());
    for e in &edges.vertices {
        let (a, b) = (mesh.vertices()[e[0]], mesh.vertices()[e[1]]);
        for r in 1..=per_edge {
            let t = r as f64 / k;
            dof_coords.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    let interior_nodes = &element.nodes()[3 + 3 * per_edge..];
    for c in 0..mesh.num_cells() {
        let g = CellGeometry::new(mesh.cell_points(c));
        for &xi in interior_nodes {
            dof_coords.push(g.map(xi));
        }
    }

    let mut cell_dofs = Vec::with_capacity(mesh.num_cells() * n);
    for (c, cell) in mesh.cells().iter().enumerate() {
        cell_dofs.extend_from_slice(cell);
        for e in 0..3 {
            let id = edges.cell_edges[c][e];
            let forward = edges.vertices[id][0] == cell[e];
            for r in 0..per_edge {
                let rr = if forward { r } else { per_edge - 1 - r };
                cell_dofs.push(nv + id * per_edge + rr);
            }
        }
        for r in 0..per_cell {
            cell_dofs.push(nv + ne * per_edge + c * per_cell + r);
        }
    }

    let mut boundary: Vec<Option<Marker>> = vec![None; total];
    let mut mark = |d: usize, m: Marker| {
        if boundary[d].is_none_or(|old| m.priority() > old.priority()) {
            boundary[d] = Some(m);
        }
    };
    for (id, m) in mesh.boundary_edge_markers() {
        let [a, b] = edges.vertices[id];
        mark(a, m);
        mark(b, m);
        for r in 0..per_edge {
            mark(nv + id * per_edge + r, m);
        }
    }

    Ok(Arc::new(FeSpace {
        mesh,
        element,
        components,
        cell_dofs,
        dof_coords,
        boundary,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_tri_mesh, Pattern};

    fn two_cell() -> Arc<TriMesh> {
        Arc::new(build_rect_tri_mesh([0.0, 1.0, 0.0, 1.0], 1, 1, Pattern::Right, false).unwrap())
    }

    #[test]
    fn dof_counts_on_two_cells() {
        assert_eq!(build_space(two_cell(), 1, 1).unwrap().num_dofs(), 4);
        assert_eq!(build_space(two_cell(), 2, 1).unwrap().num_dofs(), 9);
        assert_eq!(build_space(two_cell(), 3, 2).unwrap().num_dofs(), 32);
    }

    #[test]
    fn shared_dofs_have_matching_coordinates() {
        // Continuity: every cell's local node maps to a global dof located
        // at the physical image of that reference node.
        let mesh = Arc::new(build_rect_tri_mesh([0.0, 2.0, 0.0, 1.0], 3, 2, Pattern::CrissCross, false).unwrap());
        for k in 1..=3 {
            let s = build_space(mesh.clone(), k, 1).unwrap();
            for c in 0..mesh.num_cells() {
                let g = s.geometry(c);
                for (i, &d) in s.cell_dofs(c).iter().enumerate() {
                    let x = g.map(s.element().nodes()[i]);
                    let y = s.dof_coords()[d];
                    assert!((x[0] - y[0]).abs() < 1e-13 && (x[1] - y[1]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn boundary_dofs_lie_on_the_boundary() {
        let mesh = Arc::new(build_rect_tri_mesh([0.0, 1.0, 0.0, 1.0], 3, 3, Pattern::Right, false).unwrap());
        for k in 1..=3 {
            let s = build_space(mesh.clone(), k, 1).unwrap();
            let on_boundary = |p: &Point| {
                p[0].abs() < 1e-13 || (p[0] - 1.0).abs() < 1e-13 || p[1].abs() < 1e-13 || (p[1] - 1.0).abs() < 1e-13
            };
            let expected: Vec<usize> = s
                .dof_coords()
                .iter()
                .enumerate()
                .filter(|(_, p)| on_boundary(p))
                .map(|(i, _)| i)
                .collect();
            assert_eq!(s.all_boundary_dofs(), expected);
            assert_eq!(expected.len(), 4 * 3 * k);
        }
    }

    #[test]
    fn channel_markers_prefer_wall_at_corners() {
        let mesh = Arc::new(build_rect_tri_mesh([0.0, 4.0, 0.0, 1.0], 4, 2, Pattern::Right, true).unwrap());
        let s = build_space(mesh, 1, 1).unwrap();
        let inlet = s.boundary_dofs(&[Marker::Inlet]);
        // Only the middle inlet vertex; the corners are wall.
        assert_eq!(inlet.len(), 1);
        assert_eq!(s.dof_coords()[inlet[0]], [0.0, 0.5]);
    }

    #[test]
    fn geometry_pullback() {
        let g = CellGeometry::new([[1.0, 1.0], [3.0, 1.0], [1.0, 2.0]]);
        assert_eq!(g.det, 2.0);
        // φ̂ = ξ₀ has physical gradient (1/2, 0).
        assert_eq!(g.grad([1.0, 0.0]), [0.5, 0.0]);
        // φ̂ = ξ₀² + ξ₁² → (x-1)²/4 + (y-1)², Laplacian 1/2 + 2.
        assert!((g.laplacian([2.0, 0.0, 2.0]) - 2.5).abs() < 1e-15);
    }
}
