//! Numerical checks of the structural properties of the scheme.

use std::fmt::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elements::{
    build_space, interpolate_vector, quadrature_rule, CellGeometry, FeFunction, FeSpace, RefElement,
};
use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::forms::{
    assemble_stabilized_raw, assemble_triple_norm_gram, pressure_mass, tau_stab, AssemblyOptions, PhysParams,
    ProblemData, Terms,
};
use crate::mesh::{build_rect_tri_mesh, Pattern, Point, TriMesh};
use crate::solve::check_sigma_condition;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    /// Whether the hypotheses of the underlying estimate hold, where that
    /// applies.
    pub certified: Option<bool>,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropertyLedger {
    pub results: Vec<PropertyResult>,
}

impl PropertyLedger {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn push(&mut self, r: PropertyResult) {
        self.results.push(r);
    }

    pub fn extend(&mut self, other: PropertyLedger) {
        self.results.extend(other.results);
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            let cert = match r.certified {
                Some(true) => " certified",
                Some(false) => " not-certified",
                None => "",
            };
            let _ = writeln!(
                s,
                "{} {}{} value={:.6e} threshold={:.6e} {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                cert,
                r.value,
                r.threshold,
                r.detail
            );
        }
        s
    }
}

/// Checks `στ_T ≤ δ` and `μτ_T ≤ δ h_T²` on every cell. The value is the
/// largest of the two ratios.
pub fn tau_bounds(mesh: &TriMesh, p: &PhysParams) -> PropertyResult {
    let mut worst = 0.0f64;
    let mut ok = true;
    for &h in mesh.cell_diameters() {
        let t = tau_stab(h, p);
        ok &= p.sigma * t <= p.delta && p.mu * t <= p.delta * h * h;
        worst = worst.max(p.sigma * t / p.delta).max(p.mu * t / (p.delta * h * h));
    }
    PropertyResult {
        name: "tau_bounds".into(),
        passed: ok,
        certified: None,
        value: worst,
        threshold: 1.0,
        detail: format!("cells={}", mesh.num_cells()),
    }
}

/// Largest generalized eigenvalue of `(Δφ, Δφ)` against `(∇φ, ∇φ)` on one
/// cell, times `h_T²`, square-rooted: the sharp inverse constant of that cell.
pub fn c_inv_cell(points: [Point; 3], k: usize) -> Result<f64> {
    let el = RefElement::new(k)?;
    if k == 1 {
        return Ok(0.0);
    }
    let g = CellGeometry::new(points);
    let rule = quadrature_rule((2 * k).max(2))?;
    let n = el.num_nodes();
    let mut kmat = DMatrix::<f64>::zeros(n, n);
    let mut lmat = DMatrix::<f64>::zeros(n, n);
    for (&xi, &w) in rule.points().iter().zip(rule.weights()) {
        let b = el.eval(xi);
        let dx = w * g.det;
        for i in 0..n {
            let gi = g.grad(b.grads[i]);
            let li = g.laplacian(b.hessians[i]);
            for j in 0..n {
                let gj = g.grad(b.grads[j]);
                kmat[(i, j)] += dx * (gi[0] * gj[0] + gi[1] * gj[1]);
                lmat[(i, j)] += dx * li * g.laplacian(b.hessians[j]);
            }
        }
    }
    // complement of constants: e_i − e_last
    let z = DMatrix::from_fn(n, n - 1, |r, c| {
        if r == c {
            1.0
        } else if r == n - 1 {
            -1.0
        } else {
            0.0
        }
    });
    let ks = z.transpose() * &kmat * &z;
    let ls = z.transpose() * &lmat * &z;
    let lam = generalized_extreme_eigen(&ls, &ks)?.1;
    let h = (0..3)
        .flat_map(|a| (a + 1..3).map(move |b| (a, b)))
        .map(|(a, b)| ((points[a][0] - points[b][0]).powi(2) + (points[a][1] - points[b][1]).powi(2)).sqrt())
        .fold(0.0, f64::max);
    Ok((h * h * lam.max(0.0)).sqrt())
}

/// Inverse constant on the reference triangle.
pub fn c_inv_reference(k: usize) -> Result<f64> {
    c_inv_cell([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], k)
}

/// Largest per-cell inverse constant over a mesh.
pub fn c_inv_mesh(mesh: &TriMesh, k: usize) -> Result<f64> {
    let mut best = 0.0f64;
    for c in 0..mesh.num_cells() {
        best = best.max(c_inv_cell(mesh.cell_points(c), k)?);
    }
    Ok(best)
}

/// `(λ_min, λ_max)` of `A x = λ B x` with `A` symmetric and `B` SPD.
pub fn generalized_extreme_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, f64)> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SolverFailure("Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SolverFailure("singular Cholesky factor".into()))?;
    let m = &linv * a * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let ev = m.symmetric_eigenvalues();
    Ok((ev.min(), ev.max()))
}

/// Columns spanning the constrained space: interior velocity dofs and
/// zero-mean pressures. Entries are `(row, column, value)`.
fn constrained_basis(v: &FeSpace, q: &FeSpace, pmass: &[f64]) -> (usize, Vec<Vec<(usize, f64)>>) {
    let ns = v.num_scalar_dofs();
    let nv = v.num_dofs();
    let bnd = v.boundary_markers();
    let mut cols = Vec::new();
    for comp in 0..2 {
        for i in 0..ns {
            if bnd[i].is_none() {
                cols.push(vec![(comp * ns + i, 1.0)]);
            }
        }
    }
    let np = q.num_dofs();
    let last = np - 1;
    for i in 0..last {
        cols.push(vec![(nv + i, 1.0), (nv + last, -pmass[i] / pmass[last])]);
    }
    (nv + np, cols)
}

fn restrict(a: &CsrMatrix, n: usize, cols: &[Vec<(usize, f64)>]) -> DMatrix<f64> {
    let r = cols.len();
    let mut az = DMatrix::<f64>::zeros(n, r);
    for (c, col) in cols.iter().enumerate() {
        for &(j, zj) in col {
            for i in 0..n {
                let v = a.get(i, j);
                if v != 0.0 {
                    az[(i, c)] += v * zj;
                }
            }
        }
    }
    let mut out = DMatrix::<f64>::zeros(r, r);
    for (rr, col) in cols.iter().enumerate() {
        for &(i, zi) in col {
            for c in 0..r {
                out[(rr, c)] += zi * az[(i, c)];
            }
        }
    }
    out
}

/// Minimum of `x^T sym(B) x / x^T G x` over the constrained space by a dense
/// generalized eigen-solve.
pub fn coercivity_dense(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    p: &PhysParams,
    data: &ProblemData,
    opts: &AssemblyOptions,
) -> Result<f64> {
    let sys = assemble_stabilized_raw(v, q, p, &ProblemData { f: Default::default(), g: Default::default(), ..data.clone() }, opts)?;
    let gram = assemble_triple_norm_gram(v, q, p, data, opts)?;
    let (n, cols) = constrained_basis(v, q, &sys.pressure_mass);
    let b = restrict(&sys.matrix, n, &cols);
    let bs = (&b + b.transpose()) * 0.5;
    let g = restrict(&gram, n, &cols);
    Ok(generalized_extreme_eigen(&bs, &g)?.0)
}

/// Minimum Rayleigh quotient over `nvec` random constrained vectors.
pub fn coercivity_random(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    p: &PhysParams,
    data: &ProblemData,
    opts: &AssemblyOptions,
    nvec: usize,
    seed: u64,
) -> Result<f64> {
    let sys = assemble_stabilized_raw(v, q, p, &ProblemData { f: Default::default(), g: Default::default(), ..data.clone() }, opts)?;
    let gram = assemble_triple_norm_gram(v, q, p, data, opts)?;
    let (n, cols) = constrained_basis(v, q, &sys.pressure_mass);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..nvec {
        let mut x = vec![0.0; n];
        for col in &cols {
            let y: f64 = rng.random_range(-1.0..1.0);
            for &(i, z) in col {
                x[i] += y * z;
            }
        }
        let num = sys.matrix.bilinear(&x, &x);
        let den = gram.bilinear(&x, &x);
        best = best.min(num / den);
    }
    Ok(best)
}

/// Random function in `space` vanishing on the boundary.
fn random_zero_trace(space: &Arc<FeSpace>, rng: &mut ChaCha8Rng) -> FeFunction {
    let ns = space.num_scalar_dofs();
    let bnd = space.boundary_markers();
    let coeffs = (0..space.num_dofs())
        .map(|i| if bnd[i % ns].is_some() { 0.0 } else { rng.random_range(-1.0..1.0) })
        .collect();
    FeFunction::from_coeffs(space.clone(), coeffs).expect("length matches")
}

/// Largest `|((∇w)α, v) + ((∇v)α, w) + ((∇·α)w, v)|` over random
/// zero-trace pairs.
pub fn trilinear_residual(v: &Arc<FeSpace>, alpha: &dyn VectorField, trials: usize, seed: u64) -> Result<f64> {
    let rule = quadrature_rule((2 * v.degree() + 3).min(crate::elements::MAX_QUADRATURE_DEGREE))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let w = random_zero_trace(v, &mut rng);
        let u = random_zero_trace(v, &mut rng);
        let mut t = [0.0; 3];
        for c in 0..v.mesh().num_cells() {
            let g = v.geometry(c);
            for (&xi, &wq) in rule.points().iter().zip(rule.weights()) {
                let x = g.map(xi);
                let dx = wq * g.det;
                let a = alpha.value(x);
                let da = alpha.divergence(x);
                let ew = w.evaluate(c, xi);
                let eu = u.evaluate(c, xi);
                for i in 0..2 {
                    t[0] += dx * (ew.grad[i][0] * a[0] + ew.grad[i][1] * a[1]) * eu.value[i];
                    t[1] += dx * (eu.grad[i][0] * a[0] + eu.grad[i][1] * a[1]) * ew.value[i];
                    t[2] += dx * da * ew.value[i] * eu.value[i];
                }
            }
        }
        let scale = t.iter().map(|x| x.abs()).fold(1.0, f64::max);
        worst = worst.max((t[0] + t[1] + t[2]).abs() / scale);
    }
    Ok(worst)
}

/// Checks `B_pv = −B_vp^T` entry by entry on the Galerkin part.
pub fn skew_coupling(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    p: &PhysParams,
    data: &ProblemData,
    opts: &AssemblyOptions,
) -> Result<bool> {
    let o = AssemblyOptions { terms: Terms { galerkin: true, convection: false, pressure_stab: false, stab_laplacian: false }, ..*opts };
    let a = assemble_stabilized_raw(v, q, p, data, &o)?.matrix;
    let nv = v.num_dofs();
    for i in 0..nv {
        let (c, vals) = a.row(i);
        for (&j, &x) in c.iter().zip(vals) {
            if j >= nv && a.get(j, i) != -x {
                return Ok(false);
            }
        }
    }
    for i in nv..a.nrows() {
        let (c, vals) = a.row(i);
        for (&j, &x) in c.iter().zip(vals) {
            if j < nv && a.get(j, i) != -x {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest entry difference between the stabilization assembled with and
/// without its Laplacian terms.
pub fn laplacian_term_difference(
    v: &Arc<FeSpace>,
    q: &Arc<FeSpace>,
    p: &PhysParams,
    data: &ProblemData,
    opts: &AssemblyOptions,
) -> Result<f64> {
    let with = assemble_stabilized_raw(v, q, p, data, opts)?;
    let o = AssemblyOptions { terms: Terms { stab_laplacian: false, ..opts.terms }, ..*opts };
    let without = assemble_stabilized_raw(v, q, p, data, &o)?;
    if with.matrix.indices() != without.matrix.indices() {
        return Ok(f64::INFINITY);
    }
    let dm = with
        .matrix
        .values()
        .iter()
        .zip(without.matrix.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let dr = with.rhs.iter().zip(&without.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(dm.max(dr))
}

/// Observed `(L², H¹)` interpolation rates of a smooth field on the unit
/// square over the finest of `levels` refinements starting from `n0`.
pub fn interpolation_rates(k: usize, field: &dyn VectorField, n0: usize, levels: usize) -> Result<(f64, f64)> {
    let mut errs = Vec::new();
    for l in 0..levels {
        let n = n0 << l;
        let mesh = Arc::new(build_rect_tri_mesh([0.0, 1.0, 0.0, 1.0], n, n, Pattern::Right, false)?);
        let v = build_space(mesh.clone(), k, 2)?;
        let ih = interpolate_vector(field, &v)?;
        let rule = quadrature_rule((2 * k + 4).min(crate::elements::MAX_QUADRATURE_DEGREE))?;
        let (mut e0, mut e1) = (0.0, 0.0);
        for c in 0..mesh.num_cells() {
            let g = v.geometry(c);
            for (&xi, &wq) in rule.points().iter().zip(rule.weights()) {
                let x = g.map(xi);
                let e = ih.evaluate(c, xi);
                let w = field.value(x);
                let gw = field.gradient(x);
                for i in 0..2 {
                    e0 += wq * g.det * (w[i] - e.value[i]).powi(2);
                    for j in 0..2 {
                        e1 += wq * g.det * (gw[i][j] - e.grad[i][j]).powi(2);
                    }
                }
            }
        }
        errs.push((mesh.h_max(), e0.sqrt(), e1.sqrt()));
    }
    let (a, b) = (errs[levels - 2], errs[levels - 1]);
    let r = |x: f64, y: f64| (x / y).ln() / (a.0 / b.0).ln();
    Ok((r(a.1, b.1), r(a.2, b.2)))
}

/// Whether `δ` is below the coercivity bound for the mesh's `C_inv`.
pub fn delta_certified(mesh: &TriMesh, k: usize, p: &PhysParams) -> Result<(bool, f64)> {
    let bound = PhysParams::delta_bound(c_inv_mesh(mesh, k)?);
    Ok((p.delta < bound, bound))
}

/// Runs every check on one mesh and degree.
pub fn property_suite(
    mesh: &Arc<TriMesh>,
    k: usize,
    p: &PhysParams,
    data: &ProblemData,
    opts: &AssemblyOptions,
    seed: u64,
) -> Result<PropertyLedger> {
    let tag = format!("k={k} cells={}", mesh.num_cells());
    let mut led = PropertyLedger::default();
    let v = build_space(mesh.clone(), k, 2)?;
    let q = build_space(mesh.clone(), k, 1)?;
    let mut tau = tau_bounds(mesh, p);
    tau.detail = tag.clone();
    led.push(tau);

    let sig = check_sigma_condition(p, &data.u_m, &v, opts.quad_degree)?;
    let (delta_ok, bound) = delta_certified(mesh, k, p)?;
    let constrained = 2 * v.num_scalar_dofs() - 2 * v.all_boundary_dofs().len() + q.num_dofs();
    let (ratio, how) = if constrained <= 700 {
        (coercivity_dense(&v, &q, p, data, opts)?, "dense")
    } else {
        (coercivity_random(&v, &q, p, data, opts, 200, seed)?, "random200")
    };
    led.push(PropertyResult {
        name: "coercivity".into(),
        passed: ratio >= 0.25,
        certified: Some(sig.satisfied && delta_ok),
        value: ratio,
        threshold: 0.25,
        detail: format!("{tag} method={how} delta_bound={bound:.4e} sigma_margin={:.4e}", sig.margin),
    });

    let alpha = crate::fields::VectorFn::new(
        |x| [1.0 + x[0] * x[1], x[0] * x[0] - x[1]],
        |x| [[x[1], x[0]], [2.0 * x[0], -1.0]],
        |_| [0.0, 2.0],
    );
    let tri = trilinear_residual(&v, &alpha, 50, seed)?;
    led.push(PropertyResult {
        name: "trilinear_identity".into(),
        passed: tri < 1e-10,
        certified: None,
        value: tri,
        threshold: 1e-10,
        detail: tag.clone(),
    });

    let skew = skew_coupling(&v, &q, p, data, opts)?;
    led.push(PropertyResult {
        name: "skew_coupling".into(),
        passed: skew,
        certified: None,
        value: if skew { 0.0 } else { 1.0 },
        threshold: 0.0,
        detail: tag.clone(),
    });

    if k == 1 {
        let d = laplacian_term_difference(&v, &q, p, data, opts)?;
        led.push(PropertyResult {
            name: "p1_laplacian_degeneracy".into(),
            passed: d == 0.0,
            certified: None,
            value: d,
            threshold: 0.0,
            detail: tag.clone(),
        });
    }

    let w = crate::analysis::make_trig_case(*p).w;
    let (r0, r1) = interpolation_rates(k, &*w, 4, 3)?;
    let dev = (r0 - (k as f64 + 1.0)).abs().max((r1 - k as f64).abs());
    led.push(PropertyResult {
        name: "interpolation_rates".into(),
        passed: dev <= 0.2,
        certified: None,
        value: dev,
        threshold: 0.2,
        detail: format!("k={k} l2_rate={r0:.3} h1_rate={r1:.3}"),
    });

    let pm = pressure_mass(&q, &quadrature_rule(crate::elements::default_quad_degree(k))?);
    let area: f64 = pm.iter().sum();
    led.push(PropertyResult {
        name: "pressure_mass_area".into(),
        passed: (area - mesh.total_area()).abs() <= 1e-12 * mesh.total_area(),
        certified: None,
        value: area,
        threshold: mesh.total_area(),
        detail: tag,
    });
    Ok(led)
}
