use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ep3_optomech::numkernel::{char_poly, eigvals_small, poly_from_roots, solve_cubic_cardano, solve_poly_aberth};
use ep3_optomech::{solve_steady_state, transfer_matrix, SystemParams, C64};

fn cubic(c: &mut Criterion) {
    let (l1, l2, l3) = (C64::new(-3.0, 0.2), C64::new(2.5, -0.1), C64::new(-0.4, 0.05));
    c.bench_function("cardano", |b| b.iter(|| solve_cubic_cardano(black_box(l1), black_box(l2), black_box(l3))));
}

fn aberth(c: &mut Criterion) {
    let roots: Vec<C64> = (0..6).map(|k| C64::new(k as f64 - 2.5, 0.3 * k as f64)).collect();
    let coeffs = poly_from_roots(&roots);
    c.bench_function("aberth_degree6", |b| b.iter(|| solve_poly_aberth(black_box(&coeffs))));
}

fn matrices(c: &mut Criterion) {
    let p = SystemParams::default();
    let state = solve_steady_state(&p).expect("default steady state");
    let tm = transfer_matrix(&p, &state);
    let a = tm.scaled_complex().clone();
    c.bench_function("char_poly_6x6", |b| b.iter(|| char_poly(black_box(&a))));
    c.bench_function("eigvals_6x6", |b| b.iter(|| eigvals_small(black_box(&a))));
}

criterion_group!(benches, cubic, aberth, matrices);
criterion_main!(benches);
