use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use atinf::halphen::{build_triangle_group, geodesic_ray, poincare_series, OrbifoldOrder, RaySelector};
use atinf::infinity_form::numeric_residue;
use atinf::polyfield::{gcd_default, identity_matrix, rotate_chart, to_infinity_chart};
use atinf::trajectory::{trace, TraceOptions};
use atinf_bench::{dense_poly, e1_field};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn bench_poly(cr: &mut Criterion) {
    let a = dense_poly(2, 6, 3);
    let b = dense_poly(2, 6, 11);
    cr.bench_function("poly_mul_deg6", |bch| bch.iter(|| black_box(&a) * black_box(&b)));
    let p = dense_poly(2, 3, 5);
    let pa = &p * &a;
    let pb = &p * &b;
    cr.bench_function("poly_gcd_exact_lift", |bch| {
        bch.iter(|| gcd_default(black_box(&pa), black_box(&pb)))
    });
}

fn bench_chart(cr: &mut Criterion) {
    let x = e1_field();
    cr.bench_function("rotate_chart_e1", |bch| {
        bch.iter(|| rotate_chart(black_box(&x), 1).unwrap())
    });
}

fn bench_trace(cr: &mut Criterion) {
    let chart = to_infinity_chart(&e1_field(), 2, &identity_matrix(3)).unwrap();
    let opts = TraceOptions {
        t_max: 10.0,
        ..Default::default()
    };
    cr.bench_function("trace_e1_t10", |bch| {
        bch.iter(|| trace(black_box(&chart), &[c(-1.0), c(-1.0)], c(1.0), 0.0, &opts).unwrap())
    });
}

fn bench_residue(cr: &mut Criterion) {
    let chart = to_infinity_chart(&e1_field(), 2, &identity_matrix(3)).unwrap();
    cr.bench_function("numeric_residue_e1", |bch| {
        bch.iter(|| numeric_residue(black_box(&chart), &[c(0.3), c(0.0)], c(0.0), 0.3, None).unwrap())
    });
}

fn bench_halphen(cr: &mut Criterion) {
    let orders = [
        OrbifoldOrder::Finite(2),
        OrbifoldOrder::Finite(3),
        OrbifoldOrder::Finite(7),
    ];
    cr.bench_function("build_triangle_group_237", |bch| {
        bch.iter(|| build_triangle_group(black_box(&orders)).unwrap())
    });
    let g = build_triangle_group(&orders).unwrap();
    cr.bench_function("poincare_series_j200", |bch| {
        bch.iter(|| {
            let ray = geodesic_ray(&g, &RaySelector::default(), 200, c(0.0)).unwrap();
            poincare_series(&g, &ray)
        })
    });
}

criterion_group!(
    benches,
    bench_poly,
    bench_chart,
    bench_trace,
    bench_residue,
    bench_halphen
);
criterion_main!(benches);
