use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oseen_stab::analysis::{laplacian_term_difference, skew_coupling};
use oseen_stab::elements::{interpolate_scalar, interpolate_vector, FeFunction, FeSpace};
use oseen_stab::fields::{ScalarFn, VectorFn};
use oseen_stab::forms::{
    assemble_stabilized_raw, assemble_triple_norm_gram, tau_stab, triple_norm_sq, AssemblyOptions, PhysParams,
    ProblemData, ScalarCoef, Terms, VectorCoef,
};
use oseen_stab::mesh::{build_rect_tri_mesh, Pattern, TriMesh};
use oseen_stab::par::ExecMode;
use oseen_stab::solve::build_spaces;

const UNIT: [f64; 4] = [0.0, 1.0, 0.0, 1.0];

fn unit(n: usize, pattern: Pattern) -> Arc<TriMesh> {
    Arc::new(build_rect_tri_mesh(UNIT, n, n, pattern, false).unwrap())
}

fn params() -> PhysParams {
    PhysParams::new(0.3, 1.5, 2.0, 0.7, 0.01).unwrap()
}

fn only(galerkin: bool, convection: bool, pressure_stab: bool) -> AssemblyOptions {
    AssemblyOptions { terms: Terms { galerkin, convection, pressure_stab, stab_laplacian: true }, ..Default::default() }
}

/// Full unknown vector `[w | p]`.
fn pack(w: &FeFunction, p: &FeFunction) -> Vec<f64> {
    let mut x = w.coeffs().to_vec();
    x.extend_from_slice(p.coeffs());
    x
}

fn vfield(f: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static, v: &Arc<FeSpace>) -> FeFunction {
    interpolate_vector(&VectorFn::value_only(f), v).unwrap()
}

fn sfield(f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static, q: &Arc<FeSpace>) -> FeFunction {
    interpolate_scalar(&ScalarFn::value_only(f), q).unwrap()
}

fn energy(v: &Arc<FeSpace>, q: &Arc<FeSpace>, p: &PhysParams, data: &ProblemData, o: &AssemblyOptions, x: &[f64]) -> f64 {
    assemble_stabilized_raw(v, q, p, data, o).unwrap().matrix.bilinear(x, x)
}

#[test]
fn galerkin_energy_of_linear_field() {
    let p = params();
    let (v, q) = build_spaces(&unit(3, Pattern::Right), 1).unwrap();
    let x = pack(&vfield(|x| x, &v), &FeFunction::zeros(q.clone()));
    let e = energy(&v, &q, &p, &ProblemData::default(), &only(true, false, false), &x);
    // σ∫|x|² + μ|∇w|² + λ(∇·w)² with ∫(x²+y²) = 2/3, |∇w|² = 2, ∇·w = 2
    let want = p.sigma * 2.0 / 3.0 + 2.0 * p.mu + 4.0 * p.lambda;
    assert!((e - want).abs() < 1e-12, "{e} vs {want}");
}

#[test]
fn galerkin_energy_of_quadratic_field() {
    let p = params();
    let (v, q) = build_spaces(&unit(2, Pattern::CrissCross), 2).unwrap();
    let x = pack(&vfield(|x| [x[1] * x[1], -x[0] * x[0]], &v), &FeFunction::zeros(q.clone()));
    let e = energy(&v, &q, &p, &ProblemData::default(), &only(true, false, false), &x);
    let want = p.sigma * 2.0 / 5.0 + p.mu * 8.0 / 3.0;
    assert!((e - want).abs() < 1e-12, "{e} vs {want}");
}

#[test]
fn pressure_coupling_integrates_divergence() {
    let p = params();
    let (v, q) = build_spaces(&unit(3, Pattern::Right), 1).unwrap();
    let a = assemble_stabilized_raw(&v, &q, &p, &ProblemData::default(), &only(true, false, false)).unwrap().matrix;
    let w = pack(&vfield(|x| x, &v), &FeFunction::zeros(q.clone()));
    let one = pack(&FeFunction::zeros(v.clone()), &sfield(|_| 1.0, &q));
    // −(1, ∇·v) and (∇·w, 1) with ∇·(x, y) = 2
    assert!((a.bilinear(&w, &one) + 2.0).abs() < 1e-12);
    assert!((a.bilinear(&one, &w) - 2.0).abs() < 1e-12);
}

#[test]
fn measured_gradient_coupling() {
    let p = params();
    let (v, q) = build_spaces(&unit(2, Pattern::Right), 1).unwrap();
    let u_m = VectorCoef::Analytic(Arc::new(VectorFn::affine([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])));
    let data = ProblemData { u_m, ..Default::default() };
    let o = only(true, false, false);
    let e1 = pack(&vfield(|_| [1.0, 0.0], &v), &FeFunction::zeros(q.clone()));
    let e2 = pack(&vfield(|_| [0.0, 1.0], &v), &FeFunction::zeros(q.clone()));
    // σ|Ω| ± ρ|Ω| from (∇u_m) = diag(1, −1)
    assert!((energy(&v, &q, &p, &data, &o, &e1) - (p.sigma + p.rho)).abs() < 1e-12);
    assert!((energy(&v, &q, &p, &data, &o, &e2) - (p.sigma - p.rho)).abs() < 1e-12);
}

#[test]
fn convection_of_constant_field() {
    let p = params();
    let (v, q) = build_spaces(&unit(3, Pattern::CrissCross), 1).unwrap();
    let data = ProblemData { a_h: VectorCoef::Discrete(vfield(|_| [1.0, 0.0], &v)), ..Default::default() };
    let a = assemble_stabilized_raw(&v, &q, &p, &data, &only(false, true, false)).unwrap().matrix;
    let trial = pack(&vfield(|x| [x[0], 0.0], &v), &FeFunction::zeros(q.clone()));
    let test = pack(&vfield(|_| [1.0, 0.0], &v), &FeFunction::zeros(q.clone()));
    // ρ((∇w)a, v) = ρ∫∂ₓ(x)·1
    assert!((a.bilinear(&test, &trial) - p.rho).abs() < 1e-12);
    assert!(a.bilinear(&trial, &test).abs() < 1e-12);
}

#[test]
fn load_vector_of_constant_data() {
    let p = params();
    let (v, q) = build_spaces(&unit(2, Pattern::Right), 2).unwrap();
    let data = ProblemData {
        f: VectorCoef::Analytic(Arc::new(VectorFn::constant([1.0, 2.0]))),
        g: ScalarCoef::Analytic(Arc::new(ScalarFn::constant(3.0))),
        ..Default::default()
    };
    let sys = assemble_stabilized_raw(&v, &q, &p, &data, &only(true, false, false)).unwrap();
    let ones_v = pack(&vfield(|_| [1.0, 1.0], &v), &FeFunction::zeros(q.clone()));
    let ones_q = pack(&FeFunction::zeros(v.clone()), &sfield(|_| 1.0, &q));
    let dot = |x: &[f64]| x.iter().zip(&sys.rhs).map(|(a, b)| a * b).sum::<f64>();
    // (f, 1) = 3 (grad-div load vanishes for constant v), (g, 1) = 3
    assert!((dot(&ones_v) - 3.0).abs() < 1e-12);
    assert!((dot(&ones_q) - 3.0).abs() < 1e-12);
}

#[test]
fn pressure_stabilization_of_linear_pressure() {
    let p = params();
    let mesh = unit(4, Pattern::CrissCross);
    let (v, q) = build_spaces(&mesh, 1).unwrap();
    let x = pack(&FeFunction::zeros(v.clone()), &sfield(|x| x[0], &q));
    let e = energy(&v, &q, &p, &ProblemData::default(), &only(false, false, true), &x);
    let want: f64 = (0..mesh.num_cells()).map(|c| tau_stab(mesh.cell_diameters()[c], &p) * mesh.cell_area(c)).sum();
    assert!((e - want).abs() < 1e-14, "{e} vs {want}");
}

#[test]
fn skew_coupling_for_all_degrees() {
    let p = params();
    for k in 1..=3 {
        let (v, q) = build_spaces(&unit(2, Pattern::CrissCross), k).unwrap();
        assert!(skew_coupling(&v, &q, &p, &ProblemData::default(), &AssemblyOptions::default()).unwrap());
    }
}

#[test]
fn laplacian_terms_vanish_only_for_p1() {
    let p = params();
    let data = |v: &Arc<FeSpace>| ProblemData { a_h: VectorCoef::Discrete(vfield(|x| [x[1], -x[0]], v)), ..Default::default() };
    let (v, q) = build_spaces(&unit(3, Pattern::Right), 1).unwrap();
    assert_eq!(laplacian_term_difference(&v, &q, &p, &data(&v), &AssemblyOptions::default()).unwrap(), 0.0);
    let (v, q) = build_spaces(&unit(3, Pattern::Right), 2).unwrap();
    assert!(laplacian_term_difference(&v, &q, &p, &data(&v), &AssemblyOptions::default()).unwrap() > 0.0);
}

#[test]
fn parallel_and_sequential_assembly_agree() {
    let p = params();
    let (v, q) = build_spaces(&unit(6, Pattern::CrissCross), 2).unwrap();
    let data = ProblemData { a_h: VectorCoef::Discrete(vfield(|x| [x[1], x[0] * x[0]], &v)), ..Default::default() };
    let seq = AssemblyOptions { mode: ExecMode::Sequential, ..Default::default() };
    let par = AssemblyOptions { mode: ExecMode::Parallel, ..Default::default() };
    let a = assemble_stabilized_raw(&v, &q, &p, &data, &seq).unwrap();
    let b = assemble_stabilized_raw(&v, &q, &p, &data, &par).unwrap();
    assert_eq!(a.matrix, b.matrix);
    assert_eq!(a.rhs, b.rhs);
}

fn random_pair(v: &Arc<FeSpace>, q: &Arc<FeSpace>, seed: u64) -> (FeFunction, FeFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = (0..v.num_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let pr = (0..q.num_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
    (FeFunction::from_coeffs(v.clone(), w).unwrap(), FeFunction::from_coeffs(q.clone(), pr).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gram_matches_triple_norm(seed in any::<u64>(), k in 1usize..=3) {
        let p = params();
        let (v, q) = build_spaces(&unit(2, Pattern::CrissCross), k).unwrap();
        let u_m = VectorCoef::Analytic(Arc::new(VectorFn::affine([[0.5, 0.2], [0.1, -0.5]], [1.0, 0.0])));
        let a_h = VectorCoef::Discrete(vfield(|x| [x[1], -x[0]], &v));
        let data = ProblemData { u_m: u_m.clone(), a_h: a_h.clone(), ..Default::default() };
        let g = assemble_triple_norm_gram(&v, &q, &p, &data, &AssemblyOptions::default()).unwrap();
        let (w, pr) = random_pair(&v, &q, seed);
        let x = pack(&w, &pr);
        let direct = triple_norm_sq(&w, &pr, &p, &u_m, &a_h, None).unwrap();
        prop_assert!((g.bilinear(&x, &x) - direct).abs() <= 1e-10 * direct.max(1.0));
        prop_assert!(direct > 0.0);
    }

    #[test]
    fn galerkin_part_is_skew_in_pressure(seed in any::<u64>()) {
        let p = params();
        let (v, q) = build_spaces(&unit(2, Pattern::Right), 2).unwrap();
        let a = assemble_stabilized_raw(&v, &q, &p, &ProblemData::default(), &only(true, false, false)).unwrap().matrix;
        let (w, pr) = random_pair(&v, &q, seed);
        let (zw, zp) = (FeFunction::zeros(v.clone()), FeFunction::zeros(q.clone()));
        let xv = pack(&w, &zp);
        let xp = pack(&zw, &pr);
        prop_assert!((a.bilinear(&xv, &xp) + a.bilinear(&xp, &xv)).abs() < 1e-12);
    }
}
