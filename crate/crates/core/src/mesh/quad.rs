use std::f64::consts::FRAC_PI_2;

use super::{signed_area, BoundaryEdge, Marker, Pattern, Point, TriMesh};
use crate::error::{invalid, Result};

/// Channel made of a straight inflow leg, a quarter-annulus bend and a
/// straight outflow leg, all of width `outer_radius - inner_radius`.
///
/// The bend is centred at the origin and sweeps from angle -π/2 to 0. The
/// inflow leg runs along +x ending at x = 0; the outflow leg runs along +y
/// starting at y = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BentChannel {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub leg_length: f64,
}

impl BentChannel {
    fn centerline_lengths(&self) -> [f64; 3] {
        let mid = 0.5 * (self.inner_radius + self.outer_radius);
        [self.leg_length, FRAC_PI_2 * mid, self.leg_length]
    }

    /// Exact area of the (curved) channel.
    pub fn area(&self) -> f64 {
        let w = self.outer_radius - self.inner_radius;
        2.0 * self.leg_length * w
            + 0.25 * std::f64::consts::PI * (self.outer_radius.powi(2) - self.inner_radius.powi(2))
    }

    fn map(&self, s: f64, t: f64) -> Point {
        let [l1, l2, l3] = self.centerline_lengths();
        // t = 0 on the outer wall, t = 1 on the inner wall keeps the map
        // orientation-preserving.
        let r = self.outer_radius - t * (self.outer_radius - self.inner_radius);
        let ell = s * (l1 + l2 + l3);
        if ell <= l1 {
            [ell - l1, -r]
        } else if ell <= l1 + l2 {
            let theta = -FRAC_PI_2 + FRAC_PI_2 * (ell - l1) / l2;
            [r * theta.cos(), r * theta.sin()]
        } else {
            [r, ell - l1 - l2]
        }
    }
}

/// Map from the reference square `[0,1]²` onto the physical domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryMap {
    Rectangle { bounds: [f64; 4] },
    Bent(BentChannel),
}

impl GeometryMap {
    pub fn map(&self, s: f64, t: f64) -> Point {
        match self {
            GeometryMap::Rectangle { bounds: [x0, x1, y0, y1] } => {
                [x0 + s * (x1 - x0), y0 + t * (y1 - y0)]
            }
            GeometryMap::Bent(b) => b.map(s, t),
        }
    }
}

/// Structured `nx × ny` quadrilateral grid with one constant 2-vector per
/// cell (the pixel payload of a velocity image).
#[derive(Debug, Clone)]
pub struct QuadGrid {
    nx: usize,
    ny: usize,
    map: GeometryMap,
    vertices: Vec<Point>,
    payload: Vec<[f64; 2]>,
    /// Markers for the sides t=0, s=1, t=1, s=0.
    side_markers: [Marker; 4],
}

impl QuadGrid {
    pub fn new(map: GeometryMap, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(invalid!("grid cell counts must be positive, got {nx}×{ny}"));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(map.map(i as f64 / nx as f64, j as f64 / ny as f64));
            }
        }
        let grid = QuadGrid {
            nx,
            ny,
            map,
            vertices,
            payload: vec![[0.0; 2]; nx * ny],
            side_markers: [Marker::Wall; 4],
        };
        for c in 0..grid.num_cells() {
            let q = grid.quad_points(c);
            let a = signed_area(q[0], q[1], q[2]) + signed_area(q[0], q[2], q[3]);
            if a.is_nan() || a <= 0.0 {
                return Err(invalid!("grid cell {c} is degenerate or inverted"));
            }
        }
        Ok(grid)
    }

    pub fn rectangle(bounds: [f64; 4], nx: usize, ny: usize) -> Result<Self> {
        let [x0, x1, y0, y1] = bounds;
        if !(x1 > x0 && y1 > y0) {
            return Err(invalid!("degenerate rectangle bounds {bounds:?}"));
        }
        Self::new(GeometryMap::Rectangle { bounds }, nx, ny)
    }

    pub fn with_side_markers(mut self, markers: [Marker; 4]) -> Self {
        self.side_markers = markers;
        self
    }

    /// Same geometry map with `factor` times as many cells in each direction.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let mut g = Self::new(self.map, self.nx * factor, self.ny * factor)?;
        g.side_markers = self.side_markers;
        Ok(g)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn map(&self) -> &GeometryMap {
        &self.map
    }

    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn payload(&self) -> &[[f64; 2]] {
        &self.payload
    }

    pub fn set_payload(&mut self, payload: Vec<[f64; 2]>) -> Result<()> {
        if payload.len() != self.num_cells() {
            return Err(invalid!(
                "payload has {} entries for {} cells",
                payload.len(),
                self.num_cells()
            ));
        }
        self.payload = payload;
        Ok(())
    }

    fn vid(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Counter-clockwise vertex indices of cell `c = j*nx + i`.
    pub fn quad(&self, c: usize) -> [usize; 4] {
        let (i, j) = (c % self.nx, c / self.nx);
        [self.vid(i, j), self.vid(i + 1, j), self.vid(i + 1, j + 1), self.vid(i, j + 1)]
    }

    pub fn quad_points(&self, c: usize) -> [Point; 4] {
        self.quad(c).map(|v| self.vertices[v])
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let q = self.quad_points(c);
        signed_area(q[0], q[1], q[2]) + signed_area(q[0], q[2], q[3])
    }

    fn boundary_edges(&self) -> Vec<BoundaryEdge> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = Vec::with_capacity(2 * (nx + ny));
        let m = self.side_markers;
        for i in 0..nx {
            out.push(BoundaryEdge { vertices: [self.vid(i, 0), self.vid(i + 1, 0)], marker: m[0] });
        }
        for j in 0..ny {
            out.push(BoundaryEdge { vertices: [self.vid(nx, j), self.vid(nx, j + 1)], marker: m[1] });
        }
        for i in (0..nx).rev() {
            out.push(BoundaryEdge { vertices: [self.vid(i + 1, ny), self.vid(i, ny)], marker: m[2] });
        }
        for j in (0..ny).rev() {
            out.push(BoundaryEdge { vertices: [self.vid(0, j + 1), self.vid(0, j)], marker: m[3] });
        }
        out
    }

    /// Splits every quad into triangles; each triangle remembers its parent.
    pub fn triangulate(&self, pattern: Pattern) -> Result<TriMesh> {
        let mut vertices = self.vertices.clone();
        let per = match pattern {
            Pattern::Right => 2,
            Pattern::CrissCross => 4,
        };
        let mut cells = Vec::with_capacity(per * self.num_cells());
        let mut parent = Vec::with_capacity(per * self.num_cells());
        for c in 0..self.num_cells() {
            let [a, b, cc, d] = self.quad(c);
            match pattern {
                Pattern::Right => {
                    cells.push([a, b, cc]);
                    cells.push([a, cc, d]);
                }
                Pattern::CrissCross => {
                    let p = self.quad_points(c);
                    let m = [
                        0.25 * (p[0][0] + p[1][0] + p[2][0] + p[3][0]),
                        0.25 * (p[0][1] + p[1][1] + p[2][1] + p[3][1]),
                    ];
                    let mid = vertices.len();
                    vertices.push(m);
                    cells.extend([[a, b, mid], [b, cc, mid], [cc, d, mid], [d, a, mid]]);
                }
            }
            parent.extend(std::iter::repeat_n(c, per));
        }
        Ok(TriMesh::new(vertices, cells, self.boundary_edges())?.with_parent(parent))
    }
}

/// Barycentric criss-cross refinement: four triangles per quad, each
/// carrying its parent quad index so the pixel payload can be read back.
pub fn crisscross_refine(grid: &QuadGrid) -> Result<TriMesh> {
    grid.triangulate(Pattern::CrissCross)
}

/// Structured grid on a [`BentChannel`] with `n_across` cells across the
/// channel and `n_along` cells along its centerline.
pub fn build_bent_quad_grid(
    inner_radius: f64,
    outer_radius: f64,
    leg_length: f64,
    n_across: usize,
    n_along: usize,
) -> Result<QuadGrid> {
    if !(inner_radius > 0.0 && outer_radius > inner_radius) {
        return Err(invalid!(
            "need outer_radius > inner_radius > 0, got {inner_radius}, {outer_radius}"
        ));
    }
    if !(leg_length >= 0.0) {
        return Err(invalid!("leg length must be nonnegative, got {leg_length}"));
    }
    let channel = BentChannel { inner_radius, outer_radius, leg_length };
    QuadGrid::new(GeometryMap::Bent(channel), n_along, n_across)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polygon_area(grid: &QuadGrid) -> f64 {
        grid.boundary_edges()
            .iter()
            .map(|e| {
                let a = grid.vertices[e.vertices[0]];
                let b = grid.vertices[e.vertices[1]];
                0.5 * (a[0] * b[1] - b[0] * a[1])
            })
            .sum()
    }

    #[test]
    fn bent_grid_with_693_cells() {
        let g = build_bent_quad_grid(1.0, 2.0, 3.0, 9, 77).unwrap();
        assert_eq!(g.num_cells(), 693);
        let m = crisscross_refine(&g).unwrap();
        assert_eq!(m.num_cells(), 2772);
        m.check_conformity().unwrap();
        let poly = polygon_area(&g);
        assert!((m.total_area() - poly).abs() < 1e-12 * poly);
        let quads: f64 = (0..g.num_cells()).map(|c| g.cell_area(c)).sum();
        assert!((quads - poly).abs() < 1e-12 * poly);
    }

    #[test]
    fn bent_polygon_area_converges_to_channel_area() {
        let exact = BentChannel { inner_radius: 1.0, outer_radius: 2.0, leg_length: 3.0 }.area();
        let coarse = build_bent_quad_grid(1.0, 2.0, 3.0, 2, 20).unwrap();
        let fine = coarse.refined(4).unwrap();
        let e1 = (polygon_area(&coarse) - exact).abs();
        let e2 = (polygon_area(&fine) - exact).abs();
        assert!(e2 < e1 / 8.0, "{e1} {e2}");
    }

    #[test]
    fn single_curved_quad() {
        let g = build_bent_quad_grid(1.0, 2.0, 0.0, 1, 1).unwrap();
        assert_eq!(g.num_cells(), 1);
        assert!(g.cell_area(0) > 0.0);
    }

    #[test]
    fn refinement_quadruples_cells() {
        let g = build_bent_quad_grid(0.5, 1.5, 1.0, 3, 10).unwrap();
        let r = g.refined(2).unwrap();
        assert_eq!(r.num_cells(), 4 * g.num_cells());
        assert_eq!(r.map(), g.map());
    }

    #[test]
    fn invalid_radii() {
        assert!(build_bent_quad_grid(2.0, 1.0, 1.0, 2, 2).is_err());
        assert!(build_bent_quad_grid(0.0, 1.0, 1.0, 2, 2).is_err());
    }

    #[test]
    fn unit_quad_splits_into_quarter_triangles() {
        let g = QuadGrid::rectangle([0.0, 1.0, 0.0, 1.0], 1, 1).unwrap();
        let m = crisscross_refine(&g).unwrap();
        assert_eq!(m.num_cells(), 4);
        for c in 0..4 {
            assert!((m.cell_area(c) - 0.25).abs() < 1e-15);
        }
        assert_eq!(m.parent().unwrap(), &[0, 0, 0, 0]);
    }

    #[test]
    fn rect_400_quads_give_1600_triangles() {
        let g = QuadGrid::rectangle([0.0, 4.0, 0.0, 1.0], 40, 10).unwrap();
        assert_eq!(crisscross_refine(&g).unwrap().num_cells(), 1600);
    }

    #[test]
    fn payload_length_is_checked() {
        let mut g = QuadGrid::rectangle([0.0, 1.0, 0.0, 1.0], 2, 2).unwrap();
        assert!(g.set_payload(vec![[0.0; 2]; 3]).is_err());
        assert!(g.set_payload(vec![[1.0, 2.0]; 4]).is_ok());
    }
}
