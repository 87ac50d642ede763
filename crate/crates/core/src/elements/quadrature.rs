use crate::error::{invalid, Result};

/// Quadrature on the reference triangle with vertices (0,0), (1,0), (0,1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    degree: usize,
}

impl QuadratureRule {
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Highest total polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub const MAX_QUADRATURE_DEGREE: usize = 10;

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Rule exact for polynomials of total degree `exactness` (1..=10).
///
/// Degree 1 is the centroid rule and degree 2 the symmetric three-point
/// rule; higher degrees use a collapsed (Duffy) Gauss product rule.
pub fn quadrature_rule(exactness: usize) -> Result<QuadratureRule> {
    if exactness == 0 || exactness > MAX_QUADRATURE_DEGREE {
        return Err(invalid!(
            "quadrature exactness must be in 1..={MAX_QUADRATURE_DEGREE}, got {exactness}"
        ));
    }
    let (points, weights) = match exactness {
        1 => (vec![[1.0 / 3.0, 1.0 / 3.0]], vec![0.5]),
        2 => (
            vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            vec![1.0 / 6.0; 3],
        ),
        d => {
            // x = u, y = (1-u) v, dx dy = (1-u) du dv: degree d+1 in u, d in v.
            let (u, wu) = gauss_legendre((d + 2).div_ceil(2));
            let (v, wv) = gauss_legendre((d + 1).div_ceil(2));
            let mut pts = Vec::with_capacity(u.len() * v.len());
            let mut ws = Vec::with_capacity(u.len() * v.len());
            for (ui, wui) in u.iter().zip(&wu) {
                for (vj, wvj) in v.iter().zip(&wv) {
                    pts.push([*ui, (1.0 - ui) * vj]);
                    ws.push(wui * wvj * (1.0 - ui));
                }
            }
            (pts, ws)
        }
    };
    Ok(QuadratureRule { points, weights, degree: exactness })
}
