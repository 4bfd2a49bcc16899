//! Norm evaluation throughput: the SVD dominates, so these pin the cost of
//! the values-only path against the full factorization.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use schatten_widths::norms::{mixed_norm, schatten_norm};
use schatten_widths::rng::{salt, GaussianStream};
use schatten_widths::svd::{singular_values, svd_factorize};
use schatten_widths::SpectrumExponent;

fn gaussian(order: usize) -> schatten_widths::SquareMatrix {
    GaussianStream::new(0, salt::GAUSSIAN_MATRIX, 0).gaussian_matrix(order)
}

fn bench_schatten_norm(c: &mut Criterion) {
    let exponents = [
        SpectrumExponent::finite(0.5).unwrap(),
        SpectrumExponent::finite(1.0).unwrap(),
        SpectrumExponent::finite(2.0).unwrap(),
        SpectrumExponent::Infinite,
    ];
    for order in [8usize, 32] {
        let a = gaussian(order);
        c.bench_function(&format!("schatten_norm/N={order}/p=1"), |b| {
            b.iter(|| schatten_norm(black_box(&a), exponents[1]).unwrap())
        });
        c.bench_function(&format!("schatten_norm/N={order}/all_exponents"), |b| {
            b.iter(|| {
                exponents
                    .iter()
                    .map(|p| schatten_norm(black_box(&a), *p).unwrap())
                    .sum::<f64>()
            })
        });
    }
}

fn bench_mixed_norm(c: &mut Criterion) {
    let a = gaussian(32);
    let two = SpectrumExponent::finite(2.0).unwrap();
    let one = SpectrumExponent::finite(1.0).unwrap();
    c.bench_function("mixed_norm/N=32/(2,1)", |b| {
        b.iter(|| mixed_norm(black_box(&a), two, one))
    });
}

fn bench_svd_paths(c: &mut Criterion) {
    let a = gaussian(32);
    c.bench_function("svd/N=32/values_only", |b| {
        b.iter(|| singular_values(black_box(&a)).unwrap())
    });
    c.bench_function("svd/N=32/full_factors", |b| {
        b.iter(|| svd_factorize(black_box(&a)).unwrap())
    });
}

criterion_group!(benches, bench_schatten_norm, bench_mixed_norm, bench_svd_paths);
criterion_main!(benches);
