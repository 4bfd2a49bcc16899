//! Constructive-path costs: flat-top certificates and the multistart ratio
//! ascent, the two inner loops behind every width estimate.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use schatten_widths::multiplicity::{construct_flat_top, kappa};
use schatten_widths::restriction::restriction_norm;
use schatten_widths::subspace::MatrixSubspace;
use schatten_widths::SpectrumExponent;

fn bench_flat_top(c: &mut Criterion) {
    for (order, flat_count) in [(4usize, 2usize), (6, 3)] {
        let dim = kappa(flat_count, order).unwrap();
        let subspace = MatrixSubspace::random(order, dim, 7).unwrap();
        let name = format!("construct_flat_top/N={order}/k={flat_count}");
        c.bench_function(&name, |b| {
            b.iter(|| construct_flat_top(black_box(&subspace), flat_count, 1e-8, 7).unwrap())
        });
    }
}

fn bench_restriction_norm(c: &mut Criterion) {
    let p = SpectrumExponent::Infinite;
    let q = SpectrumExponent::finite(1.0).unwrap();
    let subspace = MatrixSubspace::random(3, 5, 3).unwrap();
    c.bench_function("restriction_norm/N=3/dim=5/restarts=8", |b| {
        b.iter(|| restriction_norm(black_box(&subspace), p, q, 8, 3).unwrap())
    });
    let full = MatrixSubspace::random(4, 16, 3).unwrap();
    c.bench_function("restriction_norm/N=4/full_space/restarts=4", |b| {
        b.iter(|| restriction_norm(black_box(&full), p, q, 4, 3).unwrap())
    });
}

criterion_group!(benches, bench_flat_top, bench_restriction_norm);
criterion_main!(benches);
