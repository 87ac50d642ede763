use super::{Point, TriMesh};

/// Bucket grid over cell bounding boxes for point-in-cell queries.
#[derive(Debug, Clone)]
pub struct PointLocator {
    origin: Point,
    cell_size: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl PointLocator {
    pub fn new(mesh: &TriMesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let n = (mesh.num_cells() as f64).sqrt().ceil().max(1.0) as usize;
        let span = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
        let aspect = span[0] / span[1];
        let nx = ((n as f64 * aspect.sqrt()).ceil() as usize).clamp(1, 4096);
        let ny = ((n as f64 / aspect.sqrt()).ceil() as usize).clamp(1, 4096);
        let cell_size = [span[0] / nx as f64, span[1] / ny as f64];
        let mut buckets = vec![Vec::new(); nx * ny];
        let to_bucket = |x: f64, d: usize, n: usize| -> usize {
            (((x - lo[d]) / cell_size[d]).floor().max(0.0) as usize).min(n - 1)
        };
        for (c, pts) in (0..mesh.num_cells()).map(|c| (c, mesh.cell_points(c))) {
            let bx0 = to_bucket(pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), 0, nx);
            let bx1 = to_bucket(pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), 0, nx);
            let by0 = to_bucket(pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min), 1, ny);
            let by1 = to_bucket(pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max), 1, ny);
            for by in by0..=by1 {
                for bx in bx0..=bx1 {
                    buckets[by * nx + bx].push(c);
                }
            }
        }
        PointLocator { origin: lo, cell_size, dims: [nx, ny], buckets }
    }

    /// Cell containing `x` and the reference coordinates of `x` in it.
    /// Points on shared edges resolve to the lowest-numbered cell.
    pub fn locate(&self, mesh: &TriMesh, x: Point) -> Option<(usize, Point)> {
        let b = [0, 1].map(|d| {
            let f = ((x[d] - self.origin[d]) / self.cell_size[d]).floor();
            if f < -1.0 || f > self.dims[d] as f64 {
                None
            } else {
                Some((f.max(0.0) as usize).min(self.dims[d] - 1))
            }
        });
        let (bx, by) = (b[0]?, b[1]?);
        let mut best: Option<(usize, Point, f64)> = None;
        for &c in &self.buckets[by * self.dims[0] + bx] {
            let [p0, p1, p2] = mesh.cell_points(c);
            let j = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let r = [x[0] - p0[0], x[1] - p0[1]];
            let xi = [(j[1][1] * r[0] - j[0][1] * r[1]) / det, (-j[1][0] * r[0] + j[0][0] * r[1]) / det];
            let outside = (-xi[0]).max(-xi[1]).max(xi[0] + xi[1] - 1.0);
            if outside <= 1e-12 {
                return Some((c, xi));
            }
            if best.as_ref().is_none_or(|b| outside < b.2) {
                best = Some((c, xi, outside));
            }
        }
        // Accept boundary points slightly outside a polygonal approximation.
        best.filter(|b| b.2 < 1e-9).map(|b| (b.0, b.1))
    }
}
