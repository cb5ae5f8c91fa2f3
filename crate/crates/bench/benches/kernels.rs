use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qal_core::component_ops::mu_from;
use qal_core::fixtures;
use qal_core::sample::Sampler;
use qal_core::spectral_lab::{sigma_min, truncate, DEFAULT_TOL};
use std::hint::black_box;

fn products(c: &mut Criterion) {
    let mut s = Sampler::new(1);
    let pairs: Vec<_> = (0..32).map(|_| s.pair()).collect();
    c.bench_function("algebra_mul_32_pairs", |b| {
        b.iter(|| {
            for (x, y) in &pairs {
                black_box(x.mul(y));
            }
        })
    });
}

fn sections(c: &mut Criterion) {
    let op = fixtures::option1_component().with_n(3);
    let mut g = c.benchmark_group("sigma_min");
    for n_half in [50i64, 100, 200] {
        let t = truncate(&op, n_half);
        g.bench_with_input(BenchmarkId::from_parameter(2 * n_half + 1), &t, |b, t| {
            b.iter(|| sigma_min(black_box(t), DEFAULT_TOL))
        });
    }
    g.finish();
}

fn mu(c: &mut Criterion) {
    let spec = fixtures::option2_nogo();
    c.bench_function("mu_from_window_512", |b| {
        b.iter(|| mu_from(black_box(&spec.alpha), &spec.beta, -256, 256).unwrap())
    });
}

criterion_group!(benches, products, sections, mu);
criterion_main!(benches);
