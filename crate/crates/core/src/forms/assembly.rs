//! Generic cell loop producing a sparse matrix and a load vector.

use crate::error::Result;
use crate::par::{map_chunks, ExecMode};
use crate::sparse::{CsrMatrix, Triplets};

/// Dense element contribution: `mat` is row-major `dofs.len()²`.
#[derive(Debug, Default, Clone)]
pub(crate) struct CellBlock {
    pub dofs: Vec<usize>,
    pub mat: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl CellBlock {
    pub fn reset(&mut self, m: usize) {
        self.dofs.clear();
        self.mat.clear();
        self.mat.resize(m * m, 0.0);
        self.rhs.clear();
        self.rhs.resize(m, 0.0);
    }
}

pub(crate) const CHUNK: usize = 256;

/// Runs `kernel` over all cells. Chunks are merged in order so the result
/// does not depend on `mode`.
pub(crate) fn assemble_cells<K>(
    ncells: usize,
    n: usize,
    mode: ExecMode,
    with_matrix: bool,
    kernel: K,
) -> Result<(CsrMatrix, Vec<f64>)>
where
    K: Fn(usize, &mut CellBlock) -> Result<()> + Sync + Send,
{
    let parts = map_chunks(mode, ncells, CHUNK, |range| -> Result<(Triplets, Vec<(usize, f64)>)> {
        let mut t = Triplets::default();
        let mut r = Vec::new();
        let mut block = CellBlock::default();
        for c in range {
            kernel(c, &mut block)?;
            let m = block.dofs.len();
            if with_matrix {
                for (a, &i) in block.dofs.iter().enumerate() {
                    for (b, &j) in block.dofs.iter().enumerate() {
                        t.push(i, j, block.mat[a * m + b]);
                    }
                }
            }
            for (a, &i) in block.dofs.iter().enumerate() {
                if block.rhs[a] != 0.0 {
                    r.push((i, block.rhs[a]));
                }
            }
        }
        Ok((t, r))
    });
    let mut trip = Triplets::default();
    let mut rhs = vec![0.0; n];
    for part in parts {
        let (mut t, r) = part?;
        trip.append(&mut t);
        for (i, v) in r {
            rhs[i] += v;
        }
    }
    let a = CsrMatrix::from_triplets(n, n, &trip)?;
    Ok((a, rhs))
}
