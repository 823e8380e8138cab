use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use vstatic_core::battery::{CheckContext, CheckId};
use vstatic_core::fd::DerivativePlan;
use vstatic_core::model::{cosh_warped_model, WarpedFiberSpec};
use vstatic_core::sampling::DEFAULT_SEED;
use vstatic_core::sweep::map_sequential;

fn sweep(c: &mut Criterion) {
    let model = cosh_warped_model(5, 1.0, 1.0, &WarpedFiberSpec::hyperbolic_plane_pair(-3.0)).unwrap();
    let plan = DerivativePlan::default();
    let ctx = CheckContext::new(&model, &plan, DEFAULT_SEED);
    let mut group = c.benchmark_group("cotton_identity_sweep");
    group.sample_size(10);
    for count in [8usize, 32] {
        let pts = ctx.points(count);
        group.bench_with_input(BenchmarkId::new("sequential", count), &pts, |b, pts| {
            b.iter(|| map_sequential(pts, |x| ctx.value(CheckId::CottonIdentity, x)))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", count), &pts, |b, pts| {
            b.iter(|| vstatic_core::sweep::map_parallel(pts, |x| ctx.value(CheckId::CottonIdentity, x)))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
