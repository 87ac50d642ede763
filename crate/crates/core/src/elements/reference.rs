use crate::error::{invalid, Result};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 3;
/// Node count of the largest supported element.
pub const MAX_NODES: usize = 10;

/// Values, reference gradients and reference Hessians `[xx, xy, yy]` of
/// every basis function at one point.
#[derive(Debug, Clone, Copy)]
pub struct BasisAt {
    pub n: usize,
    pub values: [f64; MAX_NODES],
    pub grads: [[f64; 2]; MAX_NODES],
    pub hessians: [[f64; 3]; MAX_NODES],
}

/// Basis tables at a list of points, indexed `[point][node]`.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub points: Vec<[f64; 2]>,
    pub at: Vec<BasisAt>,
}

/// One affine factor `c + g·ξ` of a Lagrange basis polynomial.
#[derive(Debug, Clone, Copy)]
struct Factor {
    c: f64,
    g: [f64; 2],
}

/// Continuous Lagrange element P_k on the reference triangle.
///
/// Nodes are the barycentric lattice points, ordered: the three vertices,
/// then `k-1` nodes along each edge (edge `e` runs from vertex `e` to vertex
/// `(e+1)%3`), then interior nodes.
#[derive(Debug, Clone)]
pub struct RefElement {
    degree: usize,
    nodes: Vec<[f64; 2]>,
    factors: Vec<Vec<Factor>>,
}

fn lattice(k: usize) -> Vec<[usize; 3]> {
    let mut idx = vec![[k, 0, 0], [0, k, 0], [0, 0, k]];
    for r in 1..k {
        idx.push([k - r, r, 0]);
    }
    for r in 1..k {
        idx.push([0, k - r, r]);
    }
    for r in 1..k {
        idx.push([r, 0, k - r]);
    }
    for i1 in 1..k {
        for i2 in 1..k {
            if i1 + i2 < k {
                idx.push([k - i1 - i2, i1, i2]);
            }
        }
    }
    idx
}

impl RefElement {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(invalid!("element degree must be 1..={MAX_DEGREE}, got {degree}"));
        }
        let k = degree as f64;
        // Barycentric coordinates as affine functions of ξ.
        let bary = [
            Factor { c: 1.0, g: [-1.0, -1.0] },
            Factor { c: 0.0, g: [1.0, 0.0] },
            Factor { c: 0.0, g: [0.0, 1.0] },
        ];
        let multi = lattice(degree);
        let nodes = multi
            .iter()
            .map(|m| [m[1] as f64 / k, m[2] as f64 / k])
            .collect();
        // φ = Π_a Π_{m < i_a} (k λ_a - m) / (m + 1)
        let factors = multi
            .iter()
            .map(|mi| {
                let mut fs = Vec::new();
                for (a, &ia) in mi.iter().enumerate() {
                    for m in 0..ia {
                        let s = 1.0 / (m as f64 + 1.0);
                        fs.push(Factor {
                            c: (k * bary[a].c - m as f64) * s,
                            g: [k * bary[a].g[0] * s, k * bary[a].g[1] * s],
                        });
                    }
                }
                fs
            })
            .collect();
        Ok(RefElement { degree, nodes, factors })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Interior nodes per edge.
    pub fn nodes_per_edge(&self) -> usize {
        self.degree - 1
    }

    pub fn nodes_per_interior(&self) -> usize {
        (self.degree - 1) * self.degree.saturating_sub(2) / 2
    }

    pub fn eval(&self, xi: [f64; 2]) -> BasisAt {
        let mut out = BasisAt {
            n: self.nodes.len(),
            values: [0.0; MAX_NODES],
            grads: [[0.0; 2]; MAX_NODES],
            hessians: [[0.0; 3]; MAX_NODES],
        };
        for (i, fs) in self.factors.iter().enumerate() {
            let (mut v, mut g, mut h) = (1.0, [0.0; 2], [0.0; 3]);
            for f in fs {
                let fv = f.c + f.g[0] * xi[0] + f.g[1] * xi[1];
                h = [
                    h[0] * fv + 2.0 * g[0] * f.g[0],
                    h[1] * fv + g[0] * f.g[1] + g[1] * f.g[0],
                    h[2] * fv + 2.0 * g[1] * f.g[1],
                ];
                g = [g[0] * fv + v * f.g[0], g[1] * fv + v * f.g[1]];
                v *= fv;
            }
            out.values[i] = v;
            out.grads[i] = g;
            out.hessians[i] = h;
        }
        out
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        Tabulation {
            points: points.to_vec(),
            at: points.iter().map(|&p| self.eval(p)).collect(),
        }
    }
}

/// Basis values, gradients and Hessians of P_k at `points`.
pub fn reference_basis(degree: usize, points: &[[f64; 2]]) -> Result<Tabulation> {
    Ok(RefElement::new(degree)?.tabulate(points))
}
