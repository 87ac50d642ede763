use super::csr::{norm2, CsrMatrix};
use super::ilu::Ilu0;
use super::lu::SparseLu;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub rtol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { rtol: 1e-10, restart: 200, max_iter: 5000 }
    }
}

/// Approximate inverse applied inside [`gmres`].
pub trait Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        Ilu0::apply(self, r)
    }
}

impl Preconditioner for SparseLu {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.solve(r)
    }
}

/// Restarted right-preconditioned GMRES. Returns the solution and the
/// total number of inner iterations.
pub fn gmres(a: &CsrMatrix, b: &[f64], m: &dyn Preconditioner, x0: Option<&[f64]>, opts: GmresOptions) -> Result<(Vec<f64>, usize)> {
    let n = a.nrows();
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let nb = norm2(b);
    if nb == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let restart = opts.restart.max(1).min(n.max(1));
    let mut total = 0;
    let mut best = f64::INFINITY;
    while total < opts.max_iter {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        if beta / nb <= opts.rtol {
            return Ok((x, total));
        }
        if beta >= best * (1.0 - 1e-12) && total > 0 {
            return Err(Error::SolverFailure(format!(
                "GMRES stagnated at relative residual {:.3e} after {total} iterations",
                beta / nb
            )));
        }
        best = beta;
        let mut v = vec![r.iter().map(|ri| ri / beta).collect::<Vec<f64>>()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            let z = m.apply(&v[k]);
            let mut w = a.matvec(&z);
            for (i, vi) in v.iter().enumerate() {
                let hik: f64 = w.iter().zip(vi).map(|(a, b)| a * b).sum();
                h[i][k] = hik;
                w.iter_mut().zip(vi).for_each(|(wj, vj)| *wj -= hik * vj);
            }
            let hn = norm2(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            if g[k + 1].abs() / nb <= opts.rtol * 0.5 || hn == 0.0 || total >= opts.max_iter {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut upd = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&v) {
            upd.iter_mut().zip(vi).for_each(|(u, vv)| *u += yi * vv);
        }
        let z = m.apply(&upd);
        x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi += zi);
    }
    let ax = a.matvec(&x);
    let res = norm2(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>()) / nb;
    if res <= opts.rtol {
        Ok((x, total))
    } else {
        Err(Error::SolverFailure(format!(
            "GMRES reached {total} iterations with relative residual {res:.3e}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{relative_residual, Triplets};

    #[test]
    fn solves_convection_diffusion() {
        let n = 400;
        let mut t = Triplets::default();
        for i in 0..n {
            t.push(i, i, 2.5);
            if i > 0 {
                t.push(i, i - 1, -1.4);
            }
            if i + 1 < n {
                t.push(i, i + 1, -0.6);
            }
            if i + 20 < n {
                t.push(i, i + 20, -0.3);
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let (x, it) = gmres(&a, &b, &Ilu0::new(&a), None, GmresOptions { restart: 30, ..Default::default() }).unwrap();
        assert!(relative_residual(&a, &x, &b) <= 1e-10);
        assert!(it > 0);
    }
}
