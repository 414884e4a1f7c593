//! Acceptance suite: one PASS/FAIL line per criterion, failing at the end if
//! any criterion failed. Run with `cargo test --release --test acceptance -- --nocapture`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use pseudocurve::chart::{chart_linearization, fiber_elliptic_near_zero, random_chart, Term};
use pseudocurve::congruence::{perturbed_constant, random_elliptic, random_gl_plus, taming_two_form};
use pseudocurve::darboux::{case3_integrate, case3_residuals, case3_symmetry, case4_coframe, case4_samples, duality_check};
use pseudocurve::grassmann::{incidence_with_tol, intersection_dimension, klein_join, wedge, wedge_top, TwoForm, Vec4};
use pseudocurve::invariants::{balance_integrals_at_level, is_almost_complex, microlocal_samples};
use pseudocurve::sphere::{random_unit, Vec3};
use pseudocurve::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec4(rng: &mut ChaCha8Rng) -> Vec4 {
    Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

fn random_plane(rng: &mut ChaCha8Rng) -> TwoPlane {
    loop {
        if let Ok(p) = TwoPlane::new(random_vec4(rng), random_vec4(rng)) {
            if p.bivector().iter().map(|c| c * c).sum::<f64>() > 1e-3 {
                return p;
            }
        }
    }
}

fn rel_err(got: f64, expect: f64) -> f64 {
    (got - expect).abs() / expect.abs().max(1e-3)
}

fn klein_suite() -> Outcome {
    // Gram matrix of the bilinear form on the basis E_ij of 2 x 2 matrices
    let basis: Vec<TangentMatrix> = (0..4)
        .map(|k| {
            let mut m = Matrix2::zeros();
            m[(k / 2, k % 2)] = 1.0;
            TangentMatrix(m)
        })
        .collect();
    let gram = Matrix4::from_fn(|i, j| bilinear(&basis[i], &basis[j]));
    let mut eig: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let expect = [1.0, 1.0, -1.0, -1.0];
    ensure!(eig.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12), "eigenvalues {eig:?}");

    let mut r = rng(101);
    let (mut gamma_worst, mut fd_worst, mut exact_worst) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let x = Vec3::from_fn(|_, _| r.gen_range(-1.0..1.0));
        let y = Vec3::from_fn(|_, _| r.gen_range(-1.0..1.0));
        let g = klein_join(&x, &y);
        let expect = 2.0 * (x.norm_squared() - y.norm_squared());
        gamma_worst = gamma_worst.max((wedge_top(&g, &g) - expect).abs() / expect.abs().max(1e-3));

        let pd = Matrix2::from_fn(|_, _| r.gen_range(-1.0..1.0));
        let basis_at = |t: f64| {
            (
                Vec4::new(1.0, 0.0, -t * pd[(0, 0)], -t * pd[(1, 0)]),
                Vec4::new(0.0, 1.0, -t * pd[(0, 1)], -t * pd[(1, 1)]),
            )
        };
        let family = |t: f64| {
            let (u, v) = basis_at(t);
            wedge(&u, &v)
        };
        let expect = -2.0 * pd.determinant();
        let h = 1e-5;
        let (a, b) = (family(h), family(-h));
        let d: [f64; 6] = std::array::from_fn(|k| (a[k] - b[k]) / (2.0 * h));
        fd_worst = fd_worst.max(rel_err(wedge_top(&d, &d), expect));
        // exact velocity u' ^ v + u ^ v' at t = 0
        let (u, v) = basis_at(0.0);
        let (du, dv) = (basis_at(1.0).0 - u, basis_at(1.0).1 - v);
        let (a, b) = (wedge(&du, &v), wedge(&u, &dv));
        let d: [f64; 6] = std::array::from_fn(|k| a[k] + b[k]);
        exact_worst = exact_worst.max(rel_err(wedge_top(&d, &d), expect));
    }
    ensure!(gamma_worst < 1e-12, "gamma^2 identity {gamma_worst:e}");
    ensure!(fd_worst < 1e-6, "velocity identity, differences {fd_worst:e}");
    ensure!(exact_worst < 1e-12, "velocity identity, exact {exact_worst:e}");
    Ok(format!("signature (2,2); gamma^2 {gamma_worst:.1e}, velocity {fd_worst:.1e} / {exact_worst:.1e}"))
}

fn ellipticity_equivalence() -> Outcome {
    let mut r = rng(102);
    let mut disagree = 0;
    for _ in 0..100 {
        let q = random_chart(&mut r, 3, 4, 0.1);
        let z0 = c(r.gen_range(-0.3..0.3), r.gen_range(-0.3..0.3));
        let w0 = c(r.gen_range(-0.3..0.3), r.gen_range(-0.3..0.3));
        let pde = pde_pair_elliptic(&chart_linearization(&q, &ChartPoint::new(z0, w0, c(0.0, 0.0)))).map_err(|e| e.to_string())?;
        let (fib, _) = fiber_elliptic_near_zero(&q, z0, w0, 0.1).map_err(|e| e.to_string())?;
        disagree += usize::from(pde != fib);
    }
    ensure!(disagree == 0, "{disagree} disagreements");
    Ok("100 charts, 0 disagreements".into())
}

fn incidence_oracle() -> Outcome {
    let mut r = rng(103);
    let mut disagree = 0;
    for k in 0..10_000 {
        let p0 = random_plane(&mut r);
        let p1 = match k % 3 {
            0 => random_plane(&mut r),
            1 => TwoPlane::new(p0.basis().0, random_vec4(&mut r)).unwrap(),
            _ => {
                let (u, v) = p0.basis();
                TwoPlane::new(u * 0.7 + v * 0.2, v * 1.3 - u * 0.4).unwrap()
            }
        };
        let expect = match intersection_dimension(&p0, &p1, 1e-9) {
            0 => Incidence::Transverse,
            1 => Incidence::MeetInLine,
            _ => Incidence::SamePlane,
        };
        let got = incidence(&plucker_of_plane(&p0).unwrap(), &plucker_of_plane(&p1).unwrap());
        disagree += usize::from(got != expect);
    }
    ensure!(disagree == 0, "{disagree} disagreements");
    Ok("10^4 pairs, 0 disagreements".into())
}

fn taming_suite() -> Outcome {
    let mut r = rng(104);
    let mut congruences = Vec::new();
    for _ in 0..50 {
        let x = random_elliptic(&mut r);
        let omega = taming_two_form(&taming_form(&x).map_err(|e| e.to_string())?);
        ensure!(is_tamed(&x, &omega), "constructed form fails to tame {}", x.label());
        congruences.push((x, omega));
    }
    let mut pairs = 0;
    let mut tries = 0;
    while pairs < 100 {
        tries += 1;
        ensure!(tries < 10_000, "could not build 100 taming pairs");
        let (x, omega) = &congruences[r.gen_range(0..congruences.len())];
        let noise: [f64; 6] = std::array::from_fn(|_| r.gen_range(-0.05..0.05));
        let other = omega.combine(1.0, &TwoForm(noise), 1.0);
        if !is_tamed(x, &other) {
            continue;
        }
        let (a, b) = (r.gen_range(0.01..3.0), r.gen_range(0.01..3.0));
        ensure!(is_tamed(x, &omega.combine(a, &other, b)), "combination leaves the cone");
        pairs += 1;
    }
    Ok("50 congruences tamed, 100 convex combinations".into())
}

fn dbar_error(n: usize) -> f64 {
    let grid = DiskGrid::new(1.0, n).unwrap();
    let g: Vec<C64> = grid.nodes().iter().map(|s| s + s.conj() * s * 0.5).collect();
    let t = cauchy_transform(&grid, &g).unwrap();
    grid.interior()
        .into_iter()
        .filter(|&k| grid.nodes()[k].norm() < 0.8)
        .map(|k| (grid.wirtinger(&t, k).unwrap().1 - g[k]).norm())
        .fold(0.0, f64::max)
}

fn cauchy_convergence() -> Outcome {
    let errs: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| dbar_error(n)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let mean = orders.iter().sum::<f64>() / orders.len() as f64;
    ensure!(mean >= 1.0, "order {mean:.2}, errors {errs:?}");
    let grid = DiskGrid::new(1.0, 128).unwrap();
    let t1 = cauchy_transform(&grid, &vec![c(1.0, 0.0); grid.len()]).map_err(|e| e.to_string())?;
    let err = grid.nodes().iter().zip(&t1).map(|(s, v)| (v - s.conj()).norm()).fold(0.0, f64::max);
    ensure!(err < 1e-3, "T[1] error {err:e}");
    Ok(format!("order {mean:.2}, T[1] error {err:.1e}"))
}

fn flat_exactness() -> Outcome {
    let flat = Chart::builtin("flat").unwrap();
    let mut r = rng(106);
    let grid = DiskGrid::new(0.5, 64).unwrap();
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for _ in 0..3 {
        let mut poly = |scale: f64| -> Vec<C64> { (0..=5).map(|_| c(r.gen_range(-scale..scale), r.gen_range(-scale..scale))).collect() };
        let mut zc = poly(0.2);
        zc[1] = c(1.0, 0.0);
        let pc = poly(0.3);
        let w0 = c(0.05, -0.02);
        let start = Instant::now();
        let rep = solve_curve(&flat, &HolomorphicData::new(zc.clone(), pc.clone(), w0), &grid).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        // w = w0 + int P Z'
        let mut prod = vec![c(0.0, 0.0); zc.len() + pc.len()];
        for (i, a) in pc.iter().enumerate() {
            for (j, b) in zc.iter().enumerate().skip(1) {
                prod[i + j - 1] += a * b * j as f64;
            }
        }
        let ev = |cs: &[C64], s: C64| cs.iter().enumerate().map(|(k, a)| a * s.powu(k as u32)).sum::<C64>();
        for (k, &s) in grid.nodes().iter().enumerate() {
            let w = w0 + prod.iter().enumerate().map(|(j, a)| a * s.powu(j as u32 + 1) / (j as f64 + 1.0)).sum::<C64>();
            worst = worst
                .max((rep.field.z[k] - ev(&zc, s)).norm())
                .max((rep.field.p[k] - ev(&pc, s)).norm())
                .max((rep.field.w[k] - w).norm());
        }
    }
    ensure!(worst < 1e-8, "max error {worst:e}");
    ensure!(slowest < 10.0, "runtime {slowest:.1} s");
    Ok(format!("max error {worst:.1e}, {slowest:.2} s"))
}

fn darboux_case2() -> Outcome {
    let q = Chart::builtin("darboux2").unwrap();
    let mut worst = 0.0f64;
    for cst in [3.0, 4.0, 10.0] {
        let field = CurveField::from_graph(
            DiskGrid::new(1.0, 1024).unwrap(),
            move |z| -(z + z.conj() + cst).inv(),
            move |z| (z + z.conj() + cst).powi(-2),
        );
        worst = worst.max(residual(&q, &field).map_err(|e| e.to_string())?);
    }
    ensure!(worst < 1e-8, "explicit residual {worst:e}");
    let radius = 0.2;
    let s = |z: C64| z + z.conj() + 4.0;
    let data = HolomorphicData::from_boundary_trace(|z| z, move |z| s(z).powi(-2), c(-0.25, 0.0), radius, 40);
    let grid = DiskGrid::new(radius, 64).unwrap();
    let rep = solve_curve(&q, &data, &grid).map_err(|e| e.to_string())?;
    let err = grid
        .nodes()
        .iter()
        .zip(&rep.field.w)
        .map(|(&z, w)| (w + s(z).inv()).norm())
        .fold(0.0, f64::max);
    ensure!(err < 1e-5, "solver error {err:e}");
    Ok(format!("explicit residual {worst:.1e}, solver error {err:.1e}"))
}

fn darboux_case3() -> Outcome {
    let grid = DiskGrid::new(0.5, 128).unwrap();
    let cur = case3_integrate(&[c(0.1, 0.0), c(0.5, 0.2)], c(0.05, 0.1), &grid).map_err(|e| e.to_string())?;
    ensure!(cur.equation < 1e-7, "equation residual {:e}", cur.equation);
    let mut ratio = 0.0f64;
    for f in [vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 1.0)]] {
        let out = case3_symmetry(&f, &cur.field).map_err(|e| e.to_string())?;
        let (eq, _, _) = case3_residuals(&out).map_err(|e| e.to_string())?;
        ratio = ratio.max(eq / cur.equation.max(1e-10));
    }
    ensure!(ratio < 10.0, "shear inflates residual by {ratio:.1}");
    let mut r = rng(108);
    let mut additivity = 0.0f64;
    for _ in 0..5 {
        let mut series = || -> Vec<C64> { (0..4).map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect() };
        let (f1, f2) = (series(), series());
        let sum: Vec<C64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
        let twice = case3_symmetry(&f2, &case3_symmetry(&f1, &cur.field).unwrap()).unwrap();
        let once = case3_symmetry(&sum, &cur.field).unwrap();
        for k in 0..grid.len() {
            additivity = additivity.max((twice.w[k] - once.w[k]).norm()).max((twice.p[k] - once.p[k]).norm());
        }
    }
    ensure!(additivity < 1e-8, "additivity {additivity:e}");
    Ok(format!("residual {:.1e}, shear ratio {ratio:.2}, additivity {additivity:.1e}", cur.equation))
}

fn duality() -> Outcome {
    let misfit = duality_check(&Expr::zero()).map_err(|e| e.to_string())?;
    ensure!(misfit < 1e-8, "misfit {misfit:e}");
    let cf = case4_coframe(&Expr::zero()).map_err(|e| e.to_string())?;
    let fit = structure_fit(&cf, &case4_samples(30, 109)).map_err(|e| e.to_string())?;
    ensure!(fit.residual < 1e-7, "fit residual {:e}", fit.residual);
    let uv = fit.max_torsion()[4..].iter().cloned().fold(0.0, f64::max);
    ensure!(uv < 1e-8, "U, V torsion {uv:e}");
    Ok(format!("misfit {misfit:.1e}, fit residual {:.1e}, U/V {uv:.1e}", fit.residual))
}

fn microlocal_balance() -> Outcome {
    let mut r = rng(110);
    let mut worst_rel = 0.0f64;
    for _ in 0..20 {
        let eps = r.gen_range(0.02..0.1);
        let x0 = random_unit(&mut r);
        let x = perturbed_constant(&mut r, x0, eps);
        let (a, b) = balance_integrals_at_level(&x, 3).map_err(|e| e.to_string())?;
        worst_rel = worst_rel.max((a - b).abs() / a.max(b).max(1e-300));
    }
    ensure!(worst_rel < 0.05, "balance relative error {worst_rel:e}");
    let mut worst_fg = 0.0f64;
    for _ in 0..20 {
        let g = random_gl_plus(&mut r, 0.3);
        let x = riemann_sphere(&ComplexStructureJ::standard().conjugated(&g).unwrap()).unwrap();
        for m in microlocal_samples(&x, 1).map_err(|e| e.to_string())? {
            worst_fg = worst_fg.max(m.fval.norm()).max(m.gval.norm());
        }
    }
    ensure!(worst_fg < 1e-6, "sphere |f|, |g| up to {worst_fg:e}");
    Ok(format!("balance {worst_rel:.1e}, spheres {worst_fg:.1e}"))
}

fn almost_complex() -> Outcome {
    let pts = [(c(0.0, 0.0), c(0.0, 0.0)), (c(0.1, 0.0), c(0.2, 0.1)), (c(-0.3, 0.2), c(0.0, -0.4))];
    let flat = is_almost_complex(&Chart::builtin("flat").unwrap(), &pts).map_err(|e| e.to_string())?;
    let d2 = is_almost_complex(&Chart::builtin("darboux2").unwrap(), &pts).map_err(|e| e.to_string())?;
    let pbar2 = Chart::from_terms(vec![Term { exp: [0, 0, 0, 0, 0, 2], coef: c(0.1, 0.0) }], 2, 1.0).map_err(|e| e.to_string())?;
    let q = is_almost_complex(&pbar2, &pts).map_err(|e| e.to_string())?;
    ensure!(flat && d2 && !q, "flat {flat}, darboux2 {d2}, 0.1 pbar^2 {q}");
    Ok("flat, darboux2 true; 0.1 pbar^2 false".into())
}

fn real_point_loops() -> Outcome {
    let mut r = rng(112);
    let mut worst = 0;
    for _ in 0..50 {
        let x = random_elliptic(&mut r);
        let (plane, lp) = loop {
            let p = TwoPlane::new(random_vec4(&mut r), random_vec4(&mut r)).unwrap();
            if let Ok(lp) = real_points_curve(&x, &p) {
                break (p, lp);
            }
        };
        ensure!(lp.closed, "open loop for {}", x.label());
        let rp = plucker_of_plane(&plane).unwrap();
        let bad = lp.params.iter().filter(|s| incidence_with_tol(&x.point(s), &rp, 1e-8) != Incidence::MeetInLine).count();
        worst = worst.max(bad);
    }
    ensure!(worst == 0, "{worst} samples fail incidence");
    Ok("50 closed loops, all samples incident".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Klein and quadratic form", klein_suite),
        ("ellipticity equivalence", ellipticity_equivalence),
        ("incidence oracle", incidence_oracle),
        ("taming", taming_suite),
        ("Cauchy transform convergence", cauchy_convergence),
        ("flat solver exactness", flat_exactness),
        ("Darboux case (2)", darboux_case2),
        ("Darboux case (3)", darboux_case3),
        ("duality", duality),
        ("microlocal balance", microlocal_balance),
        ("almost-complex detection", almost_complex),
        ("real-point loops", real_point_loops),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("criterion {:>2} PASS {name}: {msg} ({secs:.1} s)", k + 1),
            Err(msg) => {
                println!("criterion {:>2} FAIL {name}: {msg} ({secs:.1} s)", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria {failed:?}");
}
