use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use orthoint::integrals::{two_row_j, Method};
use orthoint::spheremodel::integrate_so3;
use orthoint::{i_value, weingarten, ExponentMatrix};

fn class_tables(c: &mut Criterion) {
    weingarten::set_cache_enabled(false);
    let mut g = c.benchmark_group("weingarten-table");
    for k in 2..=4 {
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| {
                let t = weingarten::table(k, black_box(8)).unwrap();
                t.class_values().unwrap().len()
            })
        });
    }
    g.finish();
    weingarten::set_cache_enabled(true);
}

fn weingarten_integral(c: &mut Criterion) {
    let a = ExponentMatrix::new(&[[2, 2], [2, 2]]);
    c.bench_function("weingarten-2x2-degree-8", |b| {
        b.iter(|| i_value(black_box(&a), 6, Method::Weingarten).unwrap())
    });
}

fn two_row(c: &mut Criterion) {
    let mut g = c.benchmark_group("two-row");
    for e in [2u64, 4, 8] {
        let a = ExponentMatrix::new(&[[e, e, e], [e, e, e]]);
        g.bench_with_input(BenchmarkId::from_parameter(e), &a, |b, a| {
            b.iter(|| two_row_j(black_box(a), 10).unwrap())
        });
    }
    g.finish();
}

fn so3(c: &mut Criterion) {
    let a = ExponentMatrix::new(&[[2, 0, 0], [0, 2, 0], [0, 0, 2]]);
    c.bench_function("so3-diag-222", |b| b.iter(|| integrate_so3(black_box(&a)).unwrap()));
}

criterion_group!(benches, class_tables, weingarten_integral, two_row, so3);
criterion_main!(benches);
