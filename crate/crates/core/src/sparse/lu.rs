//! Left-looking sparse LU with threshold partial pivoting
//! (Gilbert-Peierls), on a fill-reducing column ordering.

use super::csr::CsrMatrix;
use super::ordering::{nested_dissection, nested_dissection_grouped};
use crate::error::{Error, Result};

/// Column-compressed storage used internally for the factors.
#[derive(Debug, Clone, Default)]
struct Csc {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

/// Reusable column ordering.
#[derive(Debug, Clone)]
pub struct Symbolic {
    n: usize,
    q: Vec<usize>,
}

impl Symbolic {
    pub fn analyze(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument("LU needs a square matrix".into()));
        }
        Ok(Symbolic { n: a.nrows(), q: nested_dissection(a) })
    }

    /// Ordering on the quotient graph of `groups`, e.g. all unknowns
    /// attached to one mesh node.
    pub fn analyze_grouped(a: &CsrMatrix, groups: &[usize]) -> Result<Self> {
        if a.nrows() != a.ncols() || groups.len() != a.nrows() {
            return Err(Error::InvalidArgument("LU needs a square matrix and one group per unknown".into()));
        }
        Ok(Symbolic { n: a.nrows(), q: nested_dissection_grouped(a, groups) })
    }

    pub fn natural(n: usize) -> Self {
        Symbolic { n, q: (0..n).collect() }
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    l: Csc,
    u: Csc,
    pinv: Vec<usize>,
    q: Vec<usize>,
}

struct Workspace {
    x: Vec<f64>,
    xi: Vec<usize>,
    stack: Vec<usize>,
    pstack: Vec<usize>,
    mark: Vec<usize>,
    stamp: usize,
}

const NONE: usize = usize::MAX;

impl SparseLu {
    /// Factors `A(:, q) = P^T L U`. A diagonal entry is accepted as pivot
    /// when it is at least `tol` times the largest candidate.
    pub fn factor(a: &CsrMatrix, sym: &Symbolic, tol: f64) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() || sym.n != n {
            return Err(Error::InvalidArgument("LU size mismatch".into()));
        }
        let at = a.transpose(); // rows of A^T are columns of A
        let mut l = Csc { ptr: Vec::with_capacity(n + 1), ..Default::default() };
        let mut u = Csc { ptr: Vec::with_capacity(n + 1), ..Default::default() };
        let mut pinv = vec![NONE; n];
        let mut ws = Workspace {
            x: vec![0.0; n],
            xi: Vec::with_capacity(n),
            stack: Vec::new(),
            pstack: Vec::new(),
            mark: vec![0; n],
            stamp: 0,
        };
        for k in 0..n {
            l.ptr.push(l.idx.len());
            u.ptr.push(u.idx.len());
            let col = sym.q[k];
            let (bi, bx) = at.row(col);
            spsolve(&l, bi, bx, &pinv, &mut ws);
            let mut ipiv = NONE;
            let mut amax = -1.0f64;
            for &i in &ws.xi {
                if pinv[i] == NONE {
                    let t = ws.x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    u.idx.push(pinv[i]);
                    u.val.push(ws.x[i]);
                }
            }
            if ipiv == NONE || amax <= 0.0 || !amax.is_finite() {
                return Err(Error::SolverFailure(format!(
                    "structurally or numerically singular matrix at column {k} of {n}"
                )));
            }
            if pinv[col] == NONE && ws.x[col].abs() >= amax * tol {
                ipiv = col;
            }
            let pivot = ws.x[ipiv];
            u.idx.push(k);
            u.val.push(pivot);
            pinv[ipiv] = k;
            l.idx.push(ipiv);
            l.val.push(1.0);
            for &i in &ws.xi {
                if pinv[i] == NONE {
                    l.idx.push(i);
                    l.val.push(ws.x[i] / pivot);
                }
                ws.x[i] = 0.0;
            }
        }
        l.ptr.push(l.idx.len());
        u.ptr.push(u.idx.len());
        for i in l.idx.iter_mut() {
            *i = pinv[*i];
        }
        Ok(SparseLu { n, l, u, pinv, q: sym.q.clone() })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Nonzeros in `L + U`.
    pub fn nnz(&self) -> usize {
        self.l.idx.len() + self.u.idx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        // L y = Pb, unit diagonal first in each column
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l.ptr[j] + 1..self.l.ptr[j + 1] {
                    y[self.l.idx[p]] -= self.l.val[p] * yj;
                }
            }
        }
        // U, diagonal last in each column
        for j in (0..n).rev() {
            let last = self.u.ptr[j + 1] - 1;
            y[j] /= self.u.val[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u.ptr[j]..last {
                    y[self.u.idx[p]] -= self.u.val[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        x
    }
}

/// Solves `L x = b(:)` for the sparse column `b`; leaves the nonzero
/// pattern of `x` in topological order in `ws.xi`.
fn spsolve(l: &Csc, bi: &[usize], bx: &[f64], pinv: &[usize], ws: &mut Workspace) {
    reach(l, bi, pinv, ws);
    for &i in &ws.xi {
        ws.x[i] = 0.0;
    }
    for (&i, &v) in bi.iter().zip(bx) {
        ws.x[i] = v;
    }
    for &j in &ws.xi {
        let jj = pinv[j];
        if jj == NONE {
            continue;
        }
        let xj = ws.x[j];
        // columns jj < current k are complete; l.ptr[jj + 1] exists
        for p in l.ptr[jj] + 1..l.ptr[jj + 1] {
            ws.x[l.idx[p]] -= l.val[p] * xj;
        }
    }
}

fn reach(l: &Csc, bi: &[usize], pinv: &[usize], ws: &mut Workspace) {
    ws.stamp += 1;
    let stamp = ws.stamp;
    ws.xi.clear();
    let mut post: Vec<usize> = Vec::new();
    for &start in bi {
        if ws.mark[start] == stamp {
            continue;
        }
        // iterative DFS
        ws.stack.clear();
        ws.pstack.clear();
        ws.stack.push(start);
        ws.pstack.push(NONE);
        while let Some(&j) = ws.stack.last() {
            let top = ws.stack.len() - 1;
            let jj = pinv[j];
            if ws.mark[j] != stamp {
                ws.mark[j] = stamp;
                ws.pstack[top] = if jj == NONE { 0 } else { l.ptr[jj] + 1 };
            }
            let end = if jj == NONE { 0 } else { l.ptr[jj + 1] };
            let mut p = ws.pstack[top];
            let mut pushed = false;
            while p < end {
                let i = l.idx[p];
                p += 1;
                if ws.mark[i] != stamp {
                    ws.pstack[top] = p;
                    ws.stack.push(i);
                    ws.pstack.push(NONE);
                    pushed = true;
                    break;
                }
            }
            if !pushed {
                ws.stack.pop();
                ws.pstack.pop();
                post.push(j);
            }
        }
    }
    post.reverse();
    ws.xi.extend_from_slice(&post);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{relative_residual, Triplets};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(n: usize, density: f64, seed: u64, zero_diag: bool) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Triplets::default();
        for i in 0..n {
            if !zero_diag || i % 3 != 0 {
                t.push(i, i, rng.random_range(1.0..2.0));
            }
            // keep it nonsingular with a permuted band
            t.push(i, (i + 1) % n, rng.random_range(-1.0..1.0) + 3.0);
            for j in 0..n {
                if rng.random::<f64>() < density {
                    t.push(i, j, rng.random_range(-1.0..1.0));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.nrows();
        let d = a.to_dense();
        let m = DMatrix::from_fn(n, n, |i, j| d[i][j]);
        m.lu().solve(&DVector::from_column_slice(b)).unwrap().as_slice().to_vec()
    }

    #[test]
    fn matches_dense_oracle() {
        for (seed, zero_diag) in [(1, false), (2, true), (3, true)] {
            let a = random_sparse(60, 0.05, seed, zero_diag);
            let b: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
            for sym in [Symbolic::analyze(&a).unwrap(), Symbolic::natural(60)] {
                for tol in [1.0, 0.1, 1e-3] {
                    let lu = SparseLu::factor(&a, &sym, tol).unwrap();
                    let x = lu.solve(&b);
                    let xr = dense_solve(&a, &b);
                    for (p, q) in x.iter().zip(&xr) {
                        assert!((p - q).abs() < 1e-9 * (1.0 + q.abs()), "{p} vs {q}");
                    }
                    assert!(relative_residual(&a, &x, &b) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_returns_rhs() {
        let a = CsrMatrix::identity(5);
        let lu = SparseLu::factor(&a, &Symbolic::analyze(&a).unwrap(), 0.1).unwrap();
        assert_eq!(lu.solve(&[1.0, 2.0, 3.0, 4.0, 5.0]), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let r = SparseLu::factor(&a, &Symbolic::natural(2), 1.0);
        assert!(matches!(r, Err(Error::SolverFailure(_))));
    }

    #[test]
    fn saddle_point_with_zero_block() {
        // [[K, B^T], [B, 0]]
        let d = vec![
            vec![4.0, -1.0, 0.0, 1.0],
            vec![-1.0, 4.0, -1.0, 1.0],
            vec![0.0, -1.0, 4.0, 1.0],
            vec![1.0, 1.0, 1.0, 0.0],
        ];
        let a = CsrMatrix::from_dense(&d);
        let b = [1.0, 0.0, -1.0, 0.5];
        let lu = SparseLu::factor(&a, &Symbolic::analyze(&a).unwrap(), 0.01).unwrap();
        let x = lu.solve(&b);
        assert!(relative_residual(&a, &x, &b) < 1e-14);
    }
}
