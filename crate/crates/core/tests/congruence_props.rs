use nalgebra::{Matrix2, Matrix4, Vector4};
use pseudocurve::congruence::{
    contract_toward, is_elliptic_at_level, osculating_at_param, pencil_isometry, perturbed_with,
    random_elliptic, random_gl_plus, sign_change_points, tangent_gram, tangent_matrices_in, taming_two_form,
};
use pseudocurve::grassmann::{incidence_with_tol, plane_of_plucker, TwoForm, Vec4};
use pseudocurve::sphere::{distance, random_unit, Icosphere, Vec3};
use pseudocurve::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn conjugated_sphere(rng: &mut ChaCha8Rng) -> (ComplexStructureJ, LineCongruence) {
    let g = random_gl_plus(rng, 0.4);
    let j = ComplexStructureJ::standard().conjugated(&g).unwrap();
    (j, riemann_sphere(&j).unwrap())
}

fn random_vec4(rng: &mut ChaCha8Rng) -> Vec4 {
    Vec4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

#[test]
fn conjugated_sphere_osculates_its_own_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..10 {
        let (j, x) = conjugated_sphere(&mut rng);
        for _ in 0..5 {
            let y = random_unit(&mut rng);
            let o = osculating_structure(&x, &y).unwrap();
            let col = |k: usize| -> Vec4 { o.frame.column(k).into() };
            // P is J-invariant, so J restricted to P and its orthogonal projection to P^perp
            assert!((o.j_p - j.restricted(&col(0), &col(1))).abs().max() < 1e-6);
            assert!((o.j_q - j.restricted(&col(2), &col(3))).abs().max() < 1e-6);
        }
    }
}

#[test]
fn perturbation_moves_structure_by_order_epsilon() {
    let m = nalgebra::Matrix3::new(0.3, -0.2, 0.5, 0.1, 0.4, -0.3, 0.2, 0.1, 0.2);
    let c = Vec3::new(0.2, -0.1, 0.3);
    let y = Vec3::new(0.4, 0.1, -0.6).normalize();
    let base = osculating_structure(&LineCongruence::constant(Vec3::x()), &y).unwrap();
    let mut prev = None;
    for eps in [1e-2, 5e-3, 2.5e-3] {
        let x = perturbed_with(Vec3::x(), eps, m, c);
        let o = osculating_structure(&x, &y).unwrap();
        // the frame of P moves with eps too; compare the frame-free data J_P^2 and trace
        let d = (o.j_p - base.j_p).abs().max();
        assert!(d < 20.0 * eps, "{d} at {eps}");
        if let Some(p) = prev {
            assert!(d < 0.75 * p, "{d} vs {p}");
        }
        prev = Some(d);
    }
}

#[test]
fn osculating_extension_is_tangent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let x = random_elliptic(&mut rng);
        let s = random_unit(&mut rng);
        let o = osculating_at_param(&x, &s).unwrap();
        let mut block = Matrix4::zeros();
        block.fixed_view_mut::<2, 2>(0, 0).copy_from(&o.j_p);
        block.fixed_view_mut::<2, 2>(2, 2).copy_from(&o.j_q);
        let jfull = ComplexStructureJ::new(o.frame * block * o.frame.transpose()).unwrap();
        let sphere = riemann_sphere(&jfull).unwrap();
        // the sphere passes through P
        let y = o.point.y;
        let through = sphere.plane_at(&y).unwrap();
        assert!(through.distance(&o.point) < 1e-9);
        // A is complex linear for (J_P, J_Q), i.e. tangent to the sphere at P
        assert!((o.a * o.j_p - o.j_q * o.a).abs().max() < 1e-9);
        let sp = sphere.param_of_y(&y).unwrap();
        let (ta, tb) = tangent_matrices_in(&sphere, &sp, &o.frame).unwrap();
        // A lies in the sphere's tangent plane written in the same frame
        let basis = nalgebra::Matrix4x2::from_columns(&[
            Vector4::new(ta[(0, 0)], ta[(0, 1)], ta[(1, 0)], ta[(1, 1)]),
            Vector4::new(tb[(0, 0)], tb[(0, 1)], tb[(1, 0)], tb[(1, 1)]),
        ]);
        let a = Vector4::new(o.a[(0, 0)], o.a[(0, 1)], o.a[(1, 0)], o.a[(1, 1)]);
        let qr = basis.qr();
        let q = qr.q();
        let resid = a - q * (q.transpose() * a);
        assert!(resid.norm() < 1e-5 * a.norm(), "{}", resid.norm());
    }
}

#[test]
fn image_lies_in_open_hemisphere_and_planes_are_transverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..6 {
        let x = random_elliptic(&mut rng);
        let omega = taming_form(&x).unwrap();
        let samples = x.samples(4);
        let min = samples.iter().map(|s| omega.dot(&s.point.x)).fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
        for _ in 0..170 {
            let a = &samples[rng.gen_range(0..samples.len())];
            let b = &samples[rng.gen_range(0..samples.len())];
            if distance(&a.param, &b.param) < 1e-9 {
                continue;
            }
            let pa = plane_of_plucker(&a.point).unwrap();
            let pb = plane_of_plucker(&b.point).unwrap();
            assert_eq!(pseudocurve::grassmann::intersection_dimension(&pa, &pb, 1e-9), 0);
            assert_eq!(incidence(&a.point, &b.point), Incidence::Transverse);
        }
    }
}

#[test]
fn nonlinear_structure_squares_to_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let congruences: Vec<LineCongruence> = (0..4).map(|_| random_elliptic(&mut rng)).collect();
    for k in 0..1000 {
        let x = &congruences[k % congruences.len()];
        let v = random_vec4(&mut rng);
        let r = plane_through_vector(x, &v).unwrap();
        let plane = plane_of_plucker(&r.point).unwrap();
        assert!(plane.distance_to_vector(&v) < 1e-8);
        let r2 = plane_through_vector(x, &r.jv).unwrap();
        assert!((r2.jv + v).norm() < 1e-7 * v.norm(), "{}", (r2.jv + v).norm());
        let t = rng.gen_range(0.1..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let rt = plane_through_vector(x, &(v * t)).unwrap();
        assert!(rt.point.distance(&r.point) < 1e-9);
        assert!((rt.jv - r.jv * t).norm() < 1e-9 * t.abs() * v.norm());
    }
}

#[test]
fn pencil_solution_is_unique_on_a_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let x = random_elliptic(&mut rng);
        let v = random_vec4(&mut rng);
        let r = pencil_isometry(&v);
        let (n_lon, n_lat) = (200usize, 100usize);
        let node = |i: usize, j: usize| {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / n_lat as f64;
            let ph = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_lon as f64;
            Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos())
        };
        let mut g = vec![0.0; n_lat * n_lon];
        for i in 0..n_lat {
            for j in 0..n_lon {
                let p = x.point(&node(i, j));
                g[i * n_lon + j] = (p.x - r * p.y).norm();
            }
        }
        // cells that are local minima of |G| with a value below the grid resolution
        let mut minima = Vec::new();
        for i in 0..n_lat {
            for j in 0..n_lon {
                let c = g[i * n_lon + j];
                let mut is_min = c < 0.1;
                for di in [-1i64, 0, 1] {
                    for dj in [-1i64, 0, 1] {
                        let ii = i as i64 + di;
                        if ii < 0 || ii >= n_lat as i64 || (di == 0 && dj == 0) {
                            continue;
                        }
                        let jj = (j as i64 + dj).rem_euclid(n_lon as i64) as usize;
                        if g[ii as usize * n_lon + jj] < c {
                            is_min = false;
                        }
                    }
                }
                if is_min {
                    minima.push(node(i, j));
                }
            }
        }
        assert_eq!(minima.len(), 1, "{} candidate cells", minima.len());
        let found = plane_through_vector(&x, &v).unwrap();
        assert!(distance(&minima[0], &found.param) < 0.1);
    }
}

#[test]
fn ellipticity_agrees_with_definiteness() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let axis = LineCongruence::graph("axis", |y: &Vec3| Vec3::new(y[0], y[1], -y[2]));
    let blown = perturbed_with(
        Vec3::x(),
        1.5,
        nalgebra::Matrix3::new(1.0, 0.4, 0.0, -0.3, 1.0, 0.2, 0.1, 0.0, 1.0),
        Vec3::new(0.3, 0.2, -0.4),
    );
    let mut list = vec![blown];
    for _ in 0..4 {
        list.push(random_elliptic(&mut rng));
    }
    for x in &list {
        for s in Icosphere::new(2).vertices {
            let jac = x.graph_jacobian(&s).unwrap();
            let norm = pseudocurve::congruence::operator_norm(&jac);
            let g = tangent_gram(x, &s).unwrap();
            let definite = g[(0, 0)] > 0.0 && g.determinant() > 0.0;
            if (norm - 1.0).abs() > 1e-4 {
                assert_eq!(norm < 1.0, definite, "norm {norm}");
            }
        }
    }
    // the isometry graph is degenerate: the form vanishes on one tangent direction
    let g = tangent_gram(&axis, &Vec3::new(0.3, 0.5, 0.4).normalize()).unwrap();
    assert!(g.determinant().abs() < 1e-6);
}

#[test]
fn contraction_by_half_keeps_margin_above_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..5 {
        let x = random_elliptic(&mut rng);
        let (_, m0) = is_elliptic_at_level(&x, 3);
        let omega = taming_form(&x).unwrap();
        let y = contract_toward(&x, omega, 0.5);
        let (ok, m1) = is_elliptic_at_level(&y, 3);
        assert!(ok && m1 >= 0.5, "{m1}");
        assert!(m1 >= m0);
    }
}

#[test]
fn deformation_margin_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..4 {
        let x = random_elliptic(&mut rng);
        let mut prev = -1.0;
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (ok, m) = is_elliptic_at_level(&deform(&x, t).unwrap(), 3);
            assert!(ok);
            assert!(m >= prev - 1e-9, "{m} < {prev} at {t}");
            prev = m;
        }
        assert_eq!(prev, 1.0);
    }
}

#[test]
fn taming_cone_is_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let x = random_elliptic(&mut rng);
    let omega = taming_two_form(&taming_form(&x).unwrap());
    assert!(is_tamed(&x, &omega));
    for _ in 0..20 {
        // another taming form: a small generic perturbation of the centre form
        let noise: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.05..0.05));
        let other = omega.combine(1.0, &TwoForm(noise), 1.0);
        if !is_tamed(&x, &other) {
            continue;
        }
        let (a, b) = (rng.gen_range(0.01..3.0), rng.gen_range(0.01..3.0));
        assert!(is_tamed(&x, &omega.combine(a, &other, b)));
    }
}

#[test]
fn real_point_loops_are_single_circles() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..5 {
        let x = random_elliptic(&mut rng);
        let r = loop {
            let p = pseudocurve::grassmann::TwoPlane::new(random_vec4(&mut rng), random_vec4(&mut rng)).unwrap();
            if real_points_curve(&x, &p).is_ok() {
                break p;
            }
        };
        let lp = real_points_curve(&x, &r).unwrap();
        assert!(lp.closed);
        let rp = plucker_of_plane(&r).unwrap();
        for s in &lp.params {
            assert_eq!(incidence_with_tol(&x.point(s), &rp, 1e-8), Incidence::MeetInLine);
        }
        // every sign change of the defining function lies near the traced loop
        for c in sign_change_points(&x, &r, 4).unwrap() {
            let d = lp.params.iter().map(|s| distance(s, &c)).fold(f64::INFINITY, f64::min);
            assert!(d < 0.1, "stray zero at distance {d}");
        }
    }
}

#[test]
fn jacobian_of_identity_like_graph() {
    let x = LineCongruence::graph("identity", |y: &Vec3| *y);
    let j = x.graph_jacobian(&Vec3::new(0.2, 0.3, 0.9).normalize()).unwrap();
    assert!((j.transpose() * j - Matrix2::identity()).abs().max() < 1e-7);
}
