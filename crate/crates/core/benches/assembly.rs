use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use oseen_stab::analysis::{make_kovasznay_case, ZetaVariant};
use oseen_stab::forms::{assemble_stabilized, AssemblyOptions};
use oseen_stab::mesh::{build_rect_tri_mesh, Pattern};
use oseen_stab::par::ExecMode;
use oseen_stab::solve::build_spaces;

fn assembly(c: &mut Criterion) {
    let case = make_kovasznay_case(0.01, 1.0, 1.0, ZetaVariant::Standard).unwrap();
    let mut group = c.benchmark_group("stabilized_assembly");
    for (k, n) in [(1, 64), (2, 32), (3, 16)] {
        let mesh = Arc::new(build_rect_tri_mesh(case.domain.unwrap(), n, n, Pattern::Right, false).unwrap());
        let (v, q) = build_spaces(&mesh, k).unwrap();
        let data = case.linear_data(&v).unwrap();
        for mode in [ExecMode::Sequential, ExecMode::Parallel] {
            let opts = AssemblyOptions { mode, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), format!("k{k}_n{n}")), &opts, |b, o| {
                b.iter(|| black_box(assemble_stabilized(&v, &q, &case.params, &data, o).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = assembly
);
criterion_main!(benches);
