use std::str::FromStr;

use log::debug;

use crate::error::{Error, Result};
use crate::forms::LinearSystem;
use crate::sparse::{gmres, relative_residual, CsrMatrix, GmresOptions, Ilu0, SparseLu, Symbolic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    #[default]
    Direct,
    Krylov,
}

impl FromStr for SolverMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(SolverMethod::Direct),
            "krylov" => Ok(SolverMethod::Krylov),
            _ => Err(Error::Config(format!("unknown solver method '{s}'"))),
        }
    }
}

impl std::fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverMethod::Direct => "direct",
            SolverMethod::Krylov => "krylov",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: SolverMethod,
    pub rtol: f64,
    /// Diagonal preference threshold of the LU pivoting.
    pub pivot_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { method: SolverMethod::Direct, rtol: 1e-10, pivot_tol: 1e-4 }
    }
}

/// Linear solver that keeps the column ordering between calls with the
/// same sparsity pattern.
#[derive(Debug, Default)]
pub struct LinearSolver {
    opts: SolverOptions,
    symbolic: Option<(Vec<usize>, Vec<usize>, Symbolic)>,
    reuse: bool,
    last_lu: Option<SparseLu>,
}

impl LinearSolver {
    pub fn new(opts: SolverOptions) -> Self {
        LinearSolver { opts, symbolic: None, reuse: false, last_lu: None }
    }

    /// Keeps the last LU factors and first tries them as a GMRES
    /// preconditioner on the next matrix with the same pattern. Suited to
    /// fixed-point loops whose matrices change slowly.
    pub fn with_factor_reuse(mut self) -> Self {
        self.reuse = true;
        self
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    fn symbolic(&mut self, a: &CsrMatrix, groups: Option<&[usize]>) -> Result<&Symbolic> {
        let same = matches!(&self.symbolic, Some((p, i, _)) if p == a.indptr() && i == a.indices());
        if !same {
            self.last_lu = None;
            let sym = match groups {
                Some(g) => Symbolic::analyze_grouped(a, g)?,
                None => Symbolic::analyze(a)?,
            };
            self.symbolic = Some((a.indptr().to_vec(), a.indices().to_vec(), sym));
        }
        Ok(&self.symbolic.as_ref().unwrap().2)
    }

    /// Solves `A x = b`; returns `x` and the relative residual.
    pub fn solve_matrix(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.solve_grouped(a, b, None)
    }

    fn solve_grouped(&mut self, a: &CsrMatrix, b: &[f64], groups: Option<&[usize]>) -> Result<(Vec<f64>, f64)> {
        if a.nrows() != a.ncols() || a.nrows() != b.len() {
            return Err(Error::InvalidArgument("system is not square".into()));
        }
        if b.iter().all(|&v| v == 0.0) {
            return Ok((vec![0.0; b.len()], 0.0));
        }
        let rtol = self.opts.rtol;
        let (x, res) = match self.opts.method {
            SolverMethod::Direct => {
                let pivot = self.opts.pivot_tol;
                let sym = self.symbolic(a, groups)?.clone();
                if let Some(lu) = self.last_lu.as_ref().filter(|_| self.reuse) {
                    let opts = GmresOptions { rtol: 0.5 * rtol, restart: 60, max_iter: 60 };
                    if let Ok((x, it)) = gmres(a, b, lu, None, opts) {
                        let res = relative_residual(a, &x, b);
                        if res <= rtol {
                            debug!("reused LU factors: {it} GMRES iterations");
                            return Ok((x, res));
                        }
                    }
                    debug!("stale LU factors rejected");
                }
                let mut out = None;
                for tol in [pivot, 1.0] {
                    let lu = match SparseLu::factor(a, &sym, tol) {
                        Ok(lu) => lu,
                        Err(e) if tol < 1.0 => {
                            debug!("LU with pivot tolerance {tol} failed: {e}");
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    debug!("LU: n = {}, nnz(A) = {}, nnz(L+U) = {}", a.nrows(), a.nnz(), lu.nnz());
                    let mut x = lu.solve(b);
                    let mut res = relative_residual(a, &x, b);
                    for _ in 0..3 {
                        if res <= rtol * 0.1 {
                            break;
                        }
                        let ax = a.matvec(&x);
                        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
                        let dx = lu.solve(&r);
                        let cand: Vec<f64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
                        let rc = relative_residual(a, &cand, b);
                        if rc >= res {
                            break;
                        }
                        x = cand;
                        res = rc;
                    }
                    let done = res <= rtol;
                    out = Some((x, res));
                    if self.reuse {
                        self.last_lu = Some(lu);
                    }
                    if done {
                        break;
                    }
                }
                out.ok_or_else(|| Error::SolverFailure("LU factorization failed".into()))?
            }
            SolverMethod::Krylov => {
                let m = Ilu0::new(a);
                let (x, it) = gmres(a, b, &m, None, GmresOptions { rtol, ..Default::default() })?;
                debug!("GMRES converged in {it} iterations");
                let res = relative_residual(a, &x, b);
                (x, res)
            }
        };
        if !(res <= rtol) {
            return Err(Error::SolverFailure(format!(
                "relative residual {res:.3e} exceeds tolerance {rtol:.1e} (n = {})",
                a.nrows()
            )));
        }
        Ok((x, res))
    }

    /// Solves a block system; unknowns sharing a mesh node are ordered
    /// together with velocities ahead of the pressure.
    pub fn solve(&mut self, sys: &LinearSystem) -> Result<(Vec<f64>, f64)> {
        let groups = node_groups(sys);
        self.solve_grouped(&sys.matrix, &sys.rhs, groups.as_deref())
    }
}

/// Node index of every unknown for the `[ux | uy | p | extra]` layout.
/// Pressure dof `j` shares node `j` with velocity dof `j`, which holds for
/// equal-order pairs and for P2/P1 with vertex-first numbering.
fn node_groups(sys: &LinearSystem) -> Option<Vec<usize>> {
    let (nv, np) = (sys.n_velocity, sys.n_pressure);
    if nv == 0 || nv % 2 != 0 || np > nv / 2 {
        return None;
    }
    let ns = nv / 2;
    let n = sys.matrix.nrows();
    Some(
        (0..n)
            .map(|i| {
                if i < nv {
                    i % ns
                } else if i < nv + np {
                    i - nv
                } else {
                    ns + (i - nv - np)
                }
            })
            .collect(),
    )
}

/// One-shot solve of a constrained system.
pub fn solve_linear(sys: &LinearSystem, opts: SolverOptions) -> Result<Vec<f64>> {
    LinearSolver::new(opts).solve(sys).map(|(x, _)| x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero() {
        let a = CsrMatrix::identity(4);
        for method in [SolverMethod::Direct, SolverMethod::Krylov] {
            let mut s = LinearSolver::new(SolverOptions { method, ..Default::default() });
            let (x, _) = s.solve_matrix(&a, &[1.0, 2.0, 3.0, 4.0]).unwrap();
            for (xi, ei) in x.iter().zip([1.0, 2.0, 3.0, 4.0]) {
                assert!((xi - ei).abs() < 1e-12);
            }
            let (z, r) = s.solve_matrix(&a, &[0.0; 4]).unwrap();
            assert_eq!(z, vec![0.0; 4]);
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn method_parse() {
        assert_eq!("KRYLOV".parse::<SolverMethod>().unwrap(), SolverMethod::Krylov);
        assert!("cg".parse::<SolverMethod>().is_err());
    }

    #[test]
    fn singular_reports_failure() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let r = LinearSolver::new(SolverOptions::default()).solve_matrix(&a, &[1.0, 0.0]);
        assert!(matches!(r, Err(Error::SolverFailure(_))));
    }

    #[test]
    fn reused_factors_solve_a_perturbed_matrix() {
        let dense = |eps: f64| -> Vec<Vec<f64>> {
            (0..6usize)
                .map(|i| (0..6usize).map(|j| if i == j { 4.0 + eps * i as f64 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 }).collect())
                .collect()
        };
        let b = vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0];
        let mut s = LinearSolver::new(SolverOptions::default()).with_factor_reuse();
        s.solve_matrix(&CsrMatrix::from_dense(&dense(0.0)), &b).unwrap();
        let a = CsrMatrix::from_dense(&dense(0.3));
        let (x, res) = s.solve_matrix(&a, &b).unwrap();
        assert!(res <= 1e-10);
        let (y, _) = LinearSolver::new(SolverOptions::default()).solve_matrix(&a, &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}
