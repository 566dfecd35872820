use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinembed_bench::{sample_bivector, sample_multivector};
use spinembed_core::algebra::exp_bivector;
use spinembed_core::Signature;

fn geometric_product(c: &mut Criterion) {
    let mut group = c.benchmark_group("geometric_product");
    for n in [2usize, 3, 4, 6, 8, 10] {
        let sig = Signature::euclidean(n).unwrap();
        let a = sample_multivector(sig, 1);
        let b = sample_multivector(sig, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| a.geometric_product(&b).unwrap())
        });
    }
    group.finish();
}

fn exponential(c: &mut Criterion) {
    let mut group = c.benchmark_group("exp_bivector");
    let simple = sample_bivector(Signature::new(3, 0).unwrap(), 3, 2.0);
    group.bench_function("closed_form_cl30", |bench| bench.iter(|| exp_bivector(&simple).unwrap()));
    let general = sample_bivector(Signature::new(4, 0).unwrap(), 3, 2.0);
    group.bench_function("series_cl40", |bench| bench.iter(|| exp_bivector(&general).unwrap()));
    let mixed = sample_bivector(Signature::new(1, 3).unwrap(), 3, 2.0);
    group.bench_function("series_cl13", |bench| bench.iter(|| exp_bivector(&mixed).unwrap()));
    group.finish();
}

criterion_group!(benches, geometric_product, exponential);
criterion_main!(benches);
