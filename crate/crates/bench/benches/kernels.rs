use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frameflow_bench::{flow_models, starts};
use frameflow_core::algebra::{exterior_rep, isotypic_projections, restrict_to_stabilizer};
use frameflow_core::flows::frame_flow;
use frameflow_core::geometry::ManifoldModel;
use frameflow_core::spectral::{hodge_projections, quantize, SpectralModel, Bundle, TorusSymbol};

fn flow(c: &mut Criterion) {
    let mut g = c.benchmark_group("frame_flow_1000_steps");
    for (name, m) in flow_models().unwrap() {
        let x0 = starts(&m, 1).unwrap().remove(0);
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut x = x0.clone();
                for _ in 0..1000 {
                    x = frame_flow(&m, &x, 0.01).unwrap();
                }
                black_box(x)
            })
        });
    }
    g.finish();
}

fn quantization(c: &mut Criterion) {
    let m = ManifoldModel::flat_torus(2).unwrap();
    let a = TorusSymbol::direction_monomial(2, 1, &[2, 0]);
    let mut g = c.benchmark_group("quantize_direction_symbol");
    for k in [8, 16, 32] {
        let space = SpectralModel::new(&m, Bundle::Functions, k).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(k), &space, |b, s| b.iter(|| quantize(s, &a).unwrap()));
    }
    g.finish();
}

fn hodge(c: &mut Criterion) {
    let mut g = c.benchmark_group("hodge_projections");
    g.sample_size(20);
    for (name, m, k) in [
        ("torus2_K8", ManifoldModel::flat_torus(2).unwrap(), 8),
        ("torus3_K4", ManifoldModel::flat_torus(3).unwrap(), 4),
        ("sphere_L16", ManifoldModel::round_sphere(), 16),
    ] {
        g.bench_function(name, |b| b.iter(|| hodge_projections(&m, 1, k).unwrap()));
    }
    g.finish();
}

fn branching(c: &mut Criterion) {
    let mut g = c.benchmark_group("isotypic_projections");
    g.sample_size(10);
    for (n, p) in [(3, 1), (4, 2), (5, 2)] {
        let rep = restrict_to_stabilizer(&exterior_rep(n, p).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(format!("n{n}_p{p}")), &rep, |b, r| {
            b.iter(|| isotypic_projections(r).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, flow, quantization, hodge, branching);
criterion_main!(benches);
