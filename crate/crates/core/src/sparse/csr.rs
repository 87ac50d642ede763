use crate::error::{invalid, Result};

/// Coordinate-format accumulation buffer. Duplicates are summed on
/// compression.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Triplets {
    pub fn with_capacity(n: usize) -> Self {
        Triplets {
            rows: Vec::with_capacity(n),
            cols: Vec::with_capacity(n),
            vals: Vec::with_capacity(n),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn append(&mut self, other: &mut Triplets) {
        self.rows.append(&mut other.rows);
        self.cols.append(&mut other.cols);
        self.vals.append(&mut other.vals);
    }
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Compresses triplets. Entries of a row are summed in insertion order,
    /// so identical triplet lists give bit-identical matrices.
    pub fn from_triplets(nrows: usize, ncols: usize, t: &Triplets) -> Result<Self> {
        for (&i, &j) in t.rows.iter().zip(&t.cols) {
            if i >= nrows || j >= ncols {
                return Err(invalid!("triplet ({i}, {j}) outside {nrows}x{ncols}"));
            }
        }
        let mut count = vec![0usize; nrows + 1];
        for &i in &t.rows {
            count[i + 1] += 1;
        }
        for i in 0..nrows {
            count[i + 1] += count[i];
        }
        // stable bucket by row
        let mut next = count.clone();
        let mut order = vec![0usize; t.len()];
        for (k, &i) in t.rows.iter().enumerate() {
            order[next[i]] = k;
            next[i] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        indptr.push(0);
        let mut row: Vec<(usize, usize)> = Vec::new();
        for i in 0..nrows {
            row.clear();
            row.extend(order[count[i]..count[i + 1]].iter().map(|&k| (t.cols[k], k)));
            row.sort_by_key(|&(j, _)| j); // stable
            let mut last = usize::MAX;
            for &(j, k) in &row {
                if j == last {
                    *values.last_mut().unwrap() += t.vals[k];
                } else {
                    indices.push(j);
                    values.push(t.vals[k]);
                    last = j;
                }
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix { nrows, ncols, indptr, indices, values })
    }

    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != nrows + 1 || indices.len() != values.len() || indptr[nrows] != indices.len() {
            return Err(invalid!("inconsistent CSR arrays"));
        }
        for i in 0..nrows {
            let r = &indices[indptr[i]..indptr[i + 1]];
            if r.windows(2).any(|w| w[0] >= w[1]) || r.iter().any(|&j| j >= ncols) {
                return Err(invalid!("row {i} has unsorted or out-of-range columns"));
            }
        }
        Ok(CsrMatrix { nrows, ncols, indptr, indices, values })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let mut t = Triplets::default();
        let ncols = rows.first().map_or(0, |r| r.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        Self::from_triplets(rows.len(), ncols, &t).expect("dense rows are in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map_or(0.0, |k| v[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                indices[next[j]] = i;
                values[next[j]] = a;
                next[j] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, indptr: count, indices, values }
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                row[j] = a;
            }
        }
        d
    }

    /// Keeps entries for which `keep(i, j, v)` holds.
    pub fn filter(&self, keep: impl Fn(usize, usize, f64) -> bool) -> CsrMatrix {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if keep(i, j, a) {
                    indices.push(j);
                    values.push(a);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, values }
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `‖A x − b‖ / ‖b‖`, or the absolute residual when `b = 0`.
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r: Vec<f64> = a.matvec(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    let nb = norm2(b);
    if nb > 0.0 {
        norm2(&r) / nb
    } else {
        norm2(&r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed() {
        let mut t = Triplets::default();
        t.push(1, 0, 2.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 3.0);
        t.push(0, 0, -1.0);
        let a = CsrMatrix::from_triplets(2, 2, &t).unwrap();
        assert_eq!(a.to_dense(), vec![vec![-1.0, 1.0], vec![5.0, 0.0]]);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn out_of_range_triplet() {
        let mut t = Triplets::default();
        t.push(2, 0, 1.0);
        assert!(CsrMatrix::from_triplets(2, 2, &t).is_err());
    }

    proptest! {
        #[test]
        fn matches_dense_accumulation(entries in proptest::collection::vec((0usize..7, 0usize..5, -10.0f64..10.0), 0..60)) {
            let mut t = Triplets::default();
            let mut d = vec![vec![0.0; 5]; 7];
            for &(i, j, v) in &entries {
                t.push(i, j, v);
                d[i][j] += v;
            }
            let a = CsrMatrix::from_triplets(7, 5, &t).unwrap();
            for i in 0..7 {
                for j in 0..5 {
                    prop_assert!((a.get(i, j) - d[i][j]).abs() < 1e-12);
                }
            }
            prop_assert_eq!(a.transpose().transpose(), a.clone());
            let x: Vec<f64> = (0..5).map(|k| k as f64 - 2.0).collect();
            let y = a.matvec(&x);
            for i in 0..7 {
                let e: f64 = (0..5).map(|j| d[i][j] * x[j]).sum();
                prop_assert!((y[i] - e).abs() < 1e-10);
            }
        }
    }
}
