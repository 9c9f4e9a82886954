use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use krrlab::estimators::{exact_errors, DesignFactorization};
use krrlab::features::{sample_whitened, FeatureFamily};
use krrlab::numerics::{sym_eigendecompose, Matrix, RngStream};
use krrlab::spectral::{make_spectrum, SpectralFamily, Variant};
use std::hint::black_box;

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("sym_eigen");
    for n in [32usize, 128, 400] {
        let mut rng = RngStream::new(1);
        let a = Matrix::from_fn(n, n, |_, _| rng.standard_normal());
        let m = a.gram_rows();
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| black_box(sym_eigendecompose(m).unwrap())));
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_errors");
    group.sample_size(20);
    for (n, p) in [(100usize, 400usize), (400, 2000)] {
        let m = make_spectrum(SpectralFamily::Poly, 1.0, 1.0, p, Variant::MinKernel).unwrap();
        let fs = sample_whitened(FeatureFamily::Gaussian, n, p, &mut RngStream::new(2)).unwrap().materialize(&m).unwrap();
        group.bench_function(format!("factorize n={n} p={p}"), |b| b.iter(|| black_box(DesignFactorization::new(&fs).unwrap())));
        group.bench_function(format!("errors n={n} p={p}"), |b| {
            b.iter(|| black_box(exact_errors(&m, &fs, 1.0 / (n * n) as f64, 1.0).unwrap()))
        });
    }
    group.finish();
}

fn rng(c: &mut Criterion) {
    c.bench_function("normal x 10^5", |b| {
        b.iter(|| {
            let mut r = RngStream::new(3);
            black_box((0..100_000).map(|_| r.standard_normal()).sum::<f64>())
        })
    });
}

criterion_group!(benches, eigen, exact, rng);
criterion_main!(benches);
