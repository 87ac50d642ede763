//! MatrixMarket coordinate/array text I/O.

use std::io::{BufRead, Write};

use super::csr::{CsrMatrix, Triplets};
use crate::error::{Error, Result};

pub fn write_matrix_market<W: Write>(mut out: W, a: &CsrMatrix) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            writeln!(out, "{} {} {:.17e}", i + 1, j + 1, x)?;
        }
    }
    Ok(())
}

pub fn write_vector_market<W: Write>(mut out: W, x: &[f64]) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix array real general")?;
    writeln!(out, "{} 1", x.len())?;
    for v in x {
        writeln!(out, "{v:.17e}")?;
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(input: R) -> Result<CsrMatrix> {
    let bad = |m: &str| Error::Data(format!("MatrixMarket: {m}"));
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))??;
    let h = header.to_ascii_lowercase();
    if !h.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(bad("only real coordinate matrices are supported"));
    }
    let symmetric = h.contains("symmetric");
    let mut size: Option<(usize, usize, usize)> = None;
    let mut t = Triplets::default();
    for line in lines {
        let line = line?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = s.split_whitespace().collect();
        match size {
            None => {
                if f.len() != 3 {
                    return Err(bad("bad size line"));
                }
                let p = |x: &str| x.parse::<usize>().map_err(|_| bad("bad size line"));
                size = Some((p(f[0])?, p(f[1])?, p(f[2])?));
            }
            Some(_) => {
                if f.len() != 3 {
                    return Err(bad("bad entry line"));
                }
                let i: usize = f[0].parse().map_err(|_| bad("bad row index"))?;
                let j: usize = f[1].parse().map_err(|_| bad("bad column index"))?;
                let v: f64 = f[2].parse().map_err(|_| bad("bad value"))?;
                if i == 0 || j == 0 {
                    return Err(bad("indices are 1-based"));
                }
                t.push(i - 1, j - 1, v);
                if symmetric && i != j {
                    t.push(j - 1, i - 1, v);
                }
            }
        }
    }
    let (m, n, _) = size.ok_or_else(|| bad("missing size line"))?;
    CsrMatrix::from_triplets(m, n, &t)
}
