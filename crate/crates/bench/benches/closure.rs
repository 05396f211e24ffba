use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use slab_mn::closure::{ansatz_samples, kinetic_flux, solve_dual, solve_dual_warm};
use slab_mn::realizability::{lp_realizability_oracle, random_realizable};
use slab_mn::{ClosureConfig, Multipliers, Quadrature};

fn closure_benchmarks(c: &mut Criterion) {
    let q = Quadrature::gauss_legendre_split(20).unwrap();
    let cfg = ClosureConfig::default();

    let alpha = Multipliers::new(vec![-0.4, 1.3, 0.2, -0.6]);
    let samples = ansatz_samples(&alpha, &q).unwrap();
    let u = q.moments_of_samples(3, &samples);

    c.bench_function("solve_dual m3 cold", |b| {
        b.iter(|| solve_dual(black_box(&u), &q, &cfg).unwrap())
    });

    let warm = solve_dual(&u, &q, &cfg).unwrap().alpha;
    c.bench_function("solve_dual m3 warm", |b| {
        b.iter(|| solve_dual_warm(black_box(&u), &q, &cfg, Some(&warm)).unwrap())
    });

    let left = Multipliers::new(vec![0.1, 0.8, -0.2, 0.3]);
    let right = Multipliers::new(vec![-0.3, 1.1, 0.0, -0.1]);
    c.bench_function("kinetic_flux m3", |b| {
        b.iter(|| kinetic_flux(black_box(&left), black_box(&right), &q, 3).unwrap())
    });

    let oracle_q = Quadrature::gauss_legendre_split(60).unwrap();
    let sample = random_realizable(3, 5, &oracle_q);
    c.bench_function("lp_oracle m3 (60/half)", |b| {
        b.iter(|| lp_realizability_oracle(black_box(&sample), &oracle_q).unwrap())
    });
}

criterion_group!(benches, closure_benchmarks);
criterion_main!(benches);
