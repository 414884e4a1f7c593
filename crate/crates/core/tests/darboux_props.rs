use num_complex::Complex64 as C64;
use pseudocurve::darboux::*;
use pseudocurve::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn darboux2_builtin_has_one_term() {
    let q = builtin_chart("darboux2").unwrap();
    assert_eq!(q.terms().len(), 1);
    assert_eq!(q.terms()[0].exp, [0, 0, 1, 1, 0, 0]);
    assert_eq!(q.terms()[0].coef, c(1.0, 0.0));
    assert!(builtin_chart("flat").unwrap().terms().is_empty());
    assert!(matches!(builtin_chart("case5"), Err(Error::UnknownName(_))));
}

#[test]
fn case3_curves_satisfy_the_defining_equation() {
    let grid = DiskGrid::new(0.5, 128).unwrap();
    let cur = case3_integrate(&[], c(0.1, 0.0), &grid).unwrap();
    assert!(cur.equation < 1e-7, "{}", cur.equation);
    let cur = case3_integrate(&[c(0.0, 0.0), c(1.0, 0.0)], c(0.0, 0.0), &grid).unwrap();
    assert!(cur.equation < 1e-7, "{}", cur.equation);
    assert!(cur.closure < 1e-5, "{}", cur.closure);
    assert!(cur.field.w.iter().any(|w| w.norm() > 1e-3));
}

fn exp_series() -> Vec<C64> {
    let mut fact = 1.0;
    (0..12)
        .map(|k| {
            fact *= k.max(1) as f64;
            c(1.0 / fact, 0.3)
        })
        .collect()
}

/// Reference: the same integration with 32 times as many steps.
#[test]
fn case3_integrator_is_fourth_order() {
    let grid = DiskGrid::new(0.9, 16).unwrap();
    let pf = exp_series();
    let w0 = c(0.3, -0.2);
    let run = |steps| {
        case3_integrate_with(&pf, w0, &grid, Case3Options { steps, path_tol: 1.0 })
            .unwrap()
            .field
            .w
    };
    let reference = run(256);
    let err = |steps| {
        run(steps)
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(4), err(8));
    assert!(e1 / e2 >= 8.0, "{e1} {e2}");
}

#[test]
fn inconsistent_paths_are_reported() {
    let grid = DiskGrid::new(0.9, 16).unwrap();
    let pf = exp_series();
    let err = case3_integrate_with(&pf, c(0.5, 0.0), &grid, Case3Options { steps: 1, path_tol: 1e-6 }).unwrap_err();
    assert!(matches!(err, Error::PathInconsistency { .. }));
}

#[test]
fn shears_preserve_the_curve_equation() {
    let grid = DiskGrid::new(0.5, 64).unwrap();
    let cur = case3_integrate(&[c(0.1, 0.0), c(0.5, 0.2)], c(0.05, 0.1), &grid).unwrap();
    assert!(cur.field.w.iter().all(|w| w.is_finite()));
    let zero = case3_symmetry(&[], &cur.field).unwrap();
    assert_eq!(zero.w, cur.field.w);
    for f in [vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 1.0)]] {
        let out = case3_symmetry(&f, &cur.field).unwrap();
        let (eq, ideal, _) = case3_residuals(&out).unwrap();
        let bound = 10.0 * cur.equation.max(1e-10);
        assert!(eq < bound && ideal < bound, "{eq} {ideal} vs {}", cur.equation);
        assert!(out.w.iter().zip(&cur.field.w).any(|(a, b)| (a - b).norm() > 1e-3));
    }
}

#[test]
fn shears_compose_additively() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let grid = DiskGrid::new(0.6, 32).unwrap();
    let cur = case3_integrate(&[c(0.0, 0.3)], c(0.1, 0.0), &grid).unwrap();
    for _ in 0..5 {
        let mut rand_series = || -> Vec<C64> { (0..4).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect() };
        let (f1, f2) = (rand_series(), rand_series());
        let sum: Vec<C64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
        let twice = case3_symmetry(&f2, &case3_symmetry(&f1, &cur.field).unwrap()).unwrap();
        let once = case3_symmetry(&sum, &cur.field).unwrap();
        for k in 0..grid.len() {
            assert!((twice.w[k] - once.w[k]).norm() < 1e-8);
            assert!((twice.p[k] - once.p[k]).norm() < 1e-8);
        }
    }
}

use pseudocurve::expr::Expr;
use proptest::prelude::*;

fn coords(z: C64, w: C64, p: C64) -> [f64; 6] {
    [z.re, z.im, w.re, w.im, p.re, p.im]
}

#[test]
fn zero_f_gives_a_nondegenerate_coframe() {
    assert!(case4_constraint(&Expr::zero()).is_zero());
    let cf = case4_coframe(&Expr::zero()).unwrap();
    let x = coframe::slots_of(&coords(c(0.1, 0.0), c(0.2, 0.0), c(0.0, 0.3)));
    assert!(cf.volume(&x).norm() > 1e-3);
}

#[test]
fn zbar_violates_the_constraint() {
    // the constraint reduces to conj(F) F_zbar = z, so the residual is |z|
    match case4_coframe(&Expr::zbar()) {
        Err(Error::ConstraintViolated { sample, residual }) => {
            let z = c(sample[0], sample[1]);
            assert!((residual - z.norm()).abs() < 1e-12, "{residual} vs {}", z.norm());
        }
        other => panic!("{other:?}"),
    }
    let samples = [coords(c(0.6, 0.8), c(0.1, 0.0), c(0.2, 0.0))];
    match case4_coframe_at(&Expr::zbar(), &samples) {
        Err(Error::ConstraintViolated { residual, .. }) => assert!((residual - 1.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    assert!(matches!(duality_check(&Expr::zbar()), Err(Error::ConstraintViolated { .. })));
}

#[test]
fn duality_is_exact_for_zero_f() {
    let m = duality_check(&Expr::zero()).unwrap();
    assert!(m < 1e-8, "{m}");
    let origin = duality_check_at(&Expr::zero(), &[[0.0; 6]]).unwrap();
    assert!(origin < 1e-14, "{origin}");
}

#[test]
fn flat_coframe_has_no_torsion() {
    let samples = case4_samples(20, 41);
    let fit = structure_fit(&flat_coframe(), &samples).unwrap();
    assert!(fit.residual < 1e-10, "{}", fit.residual);
    assert!(fit.max_torsion().iter().all(|&t| t < 1e-10), "{:?}", fit.max_torsion());
}

#[test]
fn case4_coframe_is_darboux_integrable() {
    let samples = case4_samples(20, 42);
    let fit = structure_fit(&case4_coframe(&Expr::zero()).unwrap(), &samples).unwrap();
    assert!(fit.residual < 1e-8, "{}", fit.residual);
    let t = fit.max_torsion();
    assert!(t[4..].iter().all(|&x| x < 1e-8), "{t:?}");
}

#[test]
fn perturbed_flat_coframe_is_flagged() {
    let mut cf = flat_coframe();
    let mut extra: [Expr; 6] = std::array::from_fn(|_| Expr::zero());
    extra[0] = Expr::re(0.1) * Expr::zbar();
    let add = OneForm::from_complex(extra);
    cf.theta = OneForm {
        coef: std::array::from_fn(|r| cf.theta.coef[r].clone() + add.coef[r].clone()),
    };
    let fit = structure_fit(&cf, &case4_samples(10, 43)).unwrap();
    let worst_t = fit.max_torsion().iter().cloned().fold(0.0, f64::max);
    assert!(fit.residual > 1e-3 || worst_t > 1e-3, "{} {worst_t}", fit.residual);
}

#[test]
fn swap_preserves_the_fit_residual() {
    let samples = case4_samples(20, 44);
    let cf = case4_coframe(&Expr::zero()).unwrap();
    let a = structure_fit(&cf, &samples).unwrap().residual;
    let b = structure_fit(&cf.swapped(), &samples).unwrap().residual;
    assert!((a - b).abs() < 1e-7, "{a} {b}");
}

#[test]
fn degenerate_coframe_is_reported() {
    let mut cf = flat_coframe();
    cf.pi = cf.omega.clone();
    assert!(matches!(structure_fit(&cf, &[[0.1; 6]]), Err(Error::Degenerate { .. })));
}

fn holomorphic_zp(coefs: &[(f64, f64)]) -> Expr {
    // sum over monomials z^i p^j, i + j <= 2
    let mono = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
    Expr::sum(mono.iter().zip(coefs).map(|(&(i, j), &(re, im))| {
        Expr::c(c(re, im)) * Expr::z().pow(i) * Expr::p().pow(j)
    }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn fits_of_valid_case4_coframes_are_sound(coefs in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 6)) {
        let f = holomorphic_zp(&coefs);
        let cf = case4_coframe(&f).unwrap();
        let fit = structure_fit(&cf, &case4_samples(10, 45)).unwrap();
        prop_assert!(fit.residual < 1e-7, "{}", fit.residual);
    }
}
