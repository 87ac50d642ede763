use super::csr::CsrMatrix;

/// Zero-fill incomplete LU on the pattern of `A` plus its diagonal.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Self {
        let n = a.nrows();
        // ensure the diagonal is in the pattern
        let mut t = super::Triplets::with_capacity(a.nnz() + n);
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                t.push(i, j, x);
            }
            t.push(i, i, 0.0);
        }
        let mut lu = CsrMatrix::from_triplets(n, n, &t).expect("pattern in range");
        let diag: Vec<usize> = (0..n)
            .map(|i| lu.indptr()[i] + lu.row(i).0.binary_search(&i).unwrap())
            .collect();
        let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let indptr = lu.indptr().to_vec();
        let indices = lu.indices().to_vec();
        let vals = lu.values_mut();
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in indptr[i]..indptr[i + 1] {
                pos[indices[p]] = p;
            }
            for p in indptr[i]..diag[i] {
                let k = indices[p];
                let f = vals[p] / vals[diag[k]];
                vals[p] = f;
                for q in diag[k] + 1..indptr[k + 1] {
                    let j = indices[q];
                    if pos[j] != usize::MAX {
                        vals[pos[j]] -= f * vals[q];
                    }
                }
            }
            if vals[diag[i]].abs() < 1e-12 * scale {
                vals[diag[i]] = if vals[diag[i]] < 0.0 { -1e-8 * scale } else { 1e-8 * scale };
            }
            for p in indptr[i]..indptr[i + 1] {
                pos[indices[p]] = usize::MAX;
            }
        }
        Ilu0 { lu, diag }
    }

    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let ptr = self.lu.indptr();
        let idx = self.lu.indices();
        let val = self.lu.values();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for p in ptr[i]..self.diag[i] {
                s -= val[p] * y[idx[p]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for p in self.diag[i] + 1..ptr[i + 1] {
                s -= val[p] * y[idx[p]];
            }
            y[i] = s / val[self.diag[i]];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_tridiagonal() {
        let a = CsrMatrix::from_dense(&[
            vec![4.0, -1.0, 0.0, 0.0],
            vec![-1.0, 4.0, -1.0, 0.0],
            vec![0.0, -1.0, 4.0, -1.0],
            vec![0.0, 0.0, -1.0, 4.0],
        ]);
        let b = [1.0, 2.0, 3.0, 4.0];
        let x = Ilu0::new(&a).apply(&b);
        let r = a.matvec(&x);
        for (p, q) in r.iter().zip(&b) {
            assert!((p - q).abs() < 1e-14);
        }
    }
}
