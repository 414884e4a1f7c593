use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::{Matrix3, Vector3, Vector4};
use num_complex::Complex64 as C64;
use pseudocurve::congruence::perturbed_with;
use pseudocurve::darboux::case4_samples;
use pseudocurve::invariants::microlocal_samples;
use pseudocurve::{
    builtin_chart, case4_coframe, cauchy_transform, incidence, plucker_of_plane, solve_curve, structure_fit, DiskGrid,
    Expr, HolomorphicData, TwoPlane,
};

fn cauchy(c: &mut Criterion) {
    let mut g = c.benchmark_group("cauchy_transform");
    for n in [32, 64, 128] {
        let grid = DiskGrid::new(1.0, n).unwrap();
        let f: Vec<C64> = grid.nodes().iter().map(|z| z.conj() * z.exp()).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| cauchy_transform(&grid, black_box(&f)).unwrap())
        });
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let q = builtin_chart("darboux2").unwrap();
    let s = |z: C64| z + z.conj() + 4.0;
    let data = HolomorphicData::from_boundary_trace(|z| z, move |z| s(z).powi(-2), C64::new(-0.25, 0.0), 0.2, 40);
    let mut g = c.benchmark_group("solve_darboux2");
    g.sample_size(10);
    for n in [32, 64] {
        let grid = DiskGrid::new(0.2, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_curve(&q, &data, &grid).unwrap())
        });
    }
    g.finish();
}

fn fit(c: &mut Criterion) {
    let cf = case4_coframe(&Expr::zero()).unwrap();
    let samples = case4_samples(20, 0);
    c.bench_function("structure_fit", |b| b.iter(|| structure_fit(black_box(&cf), &samples).unwrap()));
}

fn microlocal(c: &mut Criterion) {
    let m = Matrix3::new(0.3, -0.2, 0.5, 0.1, 0.4, -0.6, -0.7, 0.2, 0.1);
    let x = perturbed_with(Vector3::new(0.0, 0.0, 1.0), 0.05, m, Vector3::new(0.2, -0.1, 0.3));
    let mut g = c.benchmark_group("microlocal");
    g.sample_size(10);
    for level in [1, 2] {
        g.bench_with_input(BenchmarkId::from_parameter(level), &level, |b, &l| {
            b.iter(|| microlocal_samples(&x, l).unwrap())
        });
    }
    g.finish();
}

fn incidence_kernel(c: &mut Criterion) {
    let p0 = TwoPlane::new(Vector4::new(1.0, 0.0, 0.2, 0.0), Vector4::new(0.0, 1.0, 0.0, -0.3)).unwrap();
    let p1 = TwoPlane::new(Vector4::new(1.0, 0.3, 0.1, 0.0), Vector4::new(0.0, 0.2, 1.0, 0.5)).unwrap();
    let (a, b) = (plucker_of_plane(&p0).unwrap(), plucker_of_plane(&p1).unwrap());
    c.bench_function("incidence", |bch| bch.iter(|| incidence(black_box(&a), black_box(&b))));
}

criterion_group!(benches, cauchy, solve, fit, microlocal, incidence_kernel);
criterion_main!(benches);
