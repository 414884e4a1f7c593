//! Osculating complex structures and the nonlinear structure `J_X` on `V \ 0`.

use super::{LineCongruence, FD_STEP};
use crate::error::{Error, Result};
use crate::grassmann::{klein_split, plane_of_plucker, wedge, PluckerPoint, TwoPlane, Vec4};
use crate::sphere::{exp_map, tangent_frame, Vec3};
use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2};

/// Restrictions of the osculating complex structure at one plane `P`.
///
/// `frame` has columns `(u, v, n1, n2)`: an oriented orthonormal basis of `P`
/// followed by one of `P^perp` (standing in for `V/P`), positively oriented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Osculating {
    pub param: Vec3,
    pub point: PluckerPoint,
    pub frame: Matrix4<f64>,
    pub j_p: Matrix2<f64>,
    pub j_q: Matrix2<f64>,
    /// Det-orthonormal basis of the tangent plane, as maps `P -> V/P`.
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
}

impl Osculating {
    /// `J_P` applied to the `P`-component of `w`, as a vector of `V`.
    pub fn apply_on_plane(&self, w: &Vec4) -> Vec4 {
        let u: Vec4 = self.frame.column(0).into();
        let v: Vec4 = self.frame.column(1).into();
        let c = Vector2::new(u.dot(w), v.dot(w));
        let jc = self.j_p * c;
        u * jc[0] + v * jc[1]
    }
}

pub fn oriented_frame(plane: &TwoPlane) -> Matrix4<f64> {
    let (u, v) = plane.orthonormal_basis();
    let (n1, n2) = plane.complement_basis();
    Matrix4::from_columns(&[u, v, n1, n2])
}

/// The nearby plane `q` as the graph of a map `P -> P^perp` in `frame`.
pub(crate) fn graph_matrix(frame: &Matrix4<f64>, q: &TwoPlane) -> Option<Matrix2<f64>> {
    let (q1, q2) = q.orthonormal_basis();
    let coords = |w: &Vec4| frame.transpose() * w;
    let (c1, c2) = (coords(&q1), coords(&q2));
    let mp = Matrix2::new(c1[0], c2[0], c1[1], c2[1]);
    let mn = Matrix2::new(c1[2], c2[2], c1[3], c2[3]);
    Some(mn * mp.try_inverse()?)
}

/// Tangent vectors `dC/ds_k` at parameter `s` in the frame at `s`.
pub(crate) fn tangent_matrices(x: &LineCongruence, s: &Vec3) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let frame = oriented_frame(&x.plane(s)?);
    tangent_matrices_in(x, s, &frame)
}

pub fn tangent_matrices_in(
    x: &LineCongruence,
    s: &Vec3,
    frame: &Matrix4<f64>,
) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let (e1, e2) = tangent_frame(s);
    let h = FD_STEP;
    let mut out = [Matrix2::zeros(); 2];
    for (k, e) in [e1, e2].iter().enumerate() {
        let plus = x.plane(&exp_map(s, &(e * h)))?;
        let minus = x.plane(&exp_map(s, &(-e * h)))?;
        let cp = graph_matrix(frame, &plus).ok_or(Error::NotGraph)?;
        let cm = graph_matrix(frame, &minus).ok_or(Error::NotGraph)?;
        out[k] = (cp - cm) / (2.0 * h);
    }
    Ok((out[0], out[1]))
}

fn pairing(a: &Matrix2<f64>, b: &Matrix2<f64>) -> f64 {
    0.5 * (a[(0, 0)] * b[(1, 1)] + b[(0, 0)] * a[(1, 1)] - a[(0, 1)] * b[(1, 0)] - b[(0, 1)] * a[(1, 0)])
}

/// Osculating structure at parameter `s`.
pub fn osculating_at_param(x: &LineCongruence, s: &Vec3) -> Result<Osculating> {
    let point = x.point(s);
    let frame = oriented_frame(&plane_of_plucker(&point)?);
    let (c1, c2) = tangent_matrices_in(x, s, &frame)?;
    let (g11, g12, g22) = (pairing(&c1, &c1), pairing(&c1, &c2), pairing(&c2, &c2));
    let det = g11 * g22 - g12 * g12;
    if !(g11 > 0.0 && det > 0.0) {
        let tr = g11 + g22;
        let disc = ((g11 - g22).powi(2) + 4.0 * g12 * g12).sqrt();
        let (lo, hi) = (0.5 * (tr - disc), 0.5 * (tr + disc));
        return Err(Error::NotElliptic {
            margin: lo / hi.abs().max(f64::MIN_POSITIVE),
        });
    }
    let a = c1 / g11.sqrt();
    let b_raw = c2 - c1 * (g12 / g11);
    let mut b = b_raw / (det / g11).sqrt();
    let a_inv = a.try_inverse().ok_or(Error::NotElliptic { margin: 0.0 })?;
    let mut j_p = a_inv * b;
    if j_p[(1, 0)] < 0.0 {
        b = -b;
        j_p = -j_p;
    }
    let j_q = b * a_inv;
    Ok(Osculating {
        param: *s,
        point,
        frame,
        j_p,
        j_q,
        a,
        b,
    })
}

/// Osculating structure at the plane over `y`.
pub fn osculating_structure(x: &LineCongruence, y: &Vec3) -> Result<Osculating> {
    let s = x.param_of_y(y)?;
    osculating_at_param(x, &s)
}

/// Result of [`plane_through_vector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorPlane {
    pub point: PluckerPoint,
    pub param: Vec3,
    pub jv: Vec4,
    pub residual: f64,
}

/// The orientation-reversing isometry `R` with `X = R Y` on the planes containing `v`.
pub fn pencil_isometry(v: &Vec4) -> Matrix3<f64> {
    let vh = v.normalize();
    let mut basis: Vec<Vec4> = Vec::with_capacity(3);
    for k in 0..4 {
        let mut e = Vec4::ith(k, 1.0);
        e -= vh * vh.dot(&e);
        for b in &basis {
            e -= b * b.dot(&e);
        }
        if e.norm() > 0.3 {
            basis.push(e.normalize());
        }
        if basis.len() == 3 {
            break;
        }
    }
    let mut lp = Matrix3::zeros();
    let mut lm = Matrix3::zeros();
    for (k, b) in basis.iter().enumerate() {
        let (x, y) = klein_split(&wedge(&vh, b));
        lp.set_column(k, &(x * 2.0));
        lm.set_column(k, &(y * 2.0));
    }
    lp * lm.transpose()
}

fn pencil_residual(x: &LineCongruence, r: &Matrix3<f64>, s: &Vec3) -> Vec3 {
    let p = x.point(s);
    p.x - r * p.y
}

fn newton_pencil(x: &LineCongruence, r: &Matrix3<f64>, start: Vec3) -> (Vec3, f64) {
    let mut s = start;
    let mut res = pencil_residual(x, r, &s).norm();
    for _ in 0..50 {
        if res < 1e-14 {
            break;
        }
        let (e1, e2) = tangent_frame(&s);
        let h = FD_STEP;
        let d = |e: &Vec3| {
            (pencil_residual(x, r, &exp_map(&s, &(e * h))) - pencil_residual(x, r, &exp_map(&s, &(-e * h))))
                / (2.0 * h)
        };
        let (d1, d2) = (d(&e1), d(&e2));
        let g = pencil_residual(x, r, &s);
        let m = Matrix2::new(d1.dot(&d1), d1.dot(&d2), d2.dot(&d1), d2.dot(&d2));
        let Some(inv) = m.try_inverse() else { break };
        let delta = inv * Vector2::new(-d1.dot(&g), -d2.dot(&g));
        // damped step
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-3 {
            let next = exp_map(&s, &((e1 * delta[0] + e2 * delta[1]) * t));
            let next_res = pencil_residual(x, r, &next).norm();
            if next_res < res {
                s = next;
                res = next_res;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (s, res)
}

/// Parameter minimizing `|X(s) - R Y(s)|` over a `n_lon x n_lat` cell-centred grid.
pub fn pencil_grid_scan(x: &LineCongruence, r: &Matrix3<f64>, n_lon: usize, n_lat: usize) -> Vec3 {
    let mut best = (f64::INFINITY, Vec3::z());
    for i in 0..n_lat {
        let th = std::f64::consts::PI * (i as f64 + 0.5) / n_lat as f64;
        for j in 0..n_lon {
            let ph = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_lon as f64;
            let s = Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
            let g = pencil_residual(x, r, &s).norm();
            if g < best.0 {
                best = (g, s);
            }
        }
    }
    best.1
}

/// The unique plane of `x` containing `v`, and `J_X v` for the osculating structure there.
pub fn plane_through_vector(x: &LineCongruence, v: &Vec4) -> Result<VectorPlane> {
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Invalid("vector must be nonzero".into()));
    }
    let r = pencil_isometry(v);
    let start = if x.is_graph_parametrized() {
        // Y -> R^T psi(Y) is a contraction for elliptic graphs
        let mut y = Vec3::z();
        for _ in 0..40 {
            let next = r.transpose() * x.point(&y).x;
            if (next - y).norm() < 1e-6 {
                y = next;
                break;
            }
            y = next;
        }
        y.normalize()
    } else {
        crate::sphere::Icosphere::new(3)
            .vertices
            .into_iter()
            .min_by(|a, b| {
                pencil_residual(x, &r, a)
                    .norm()
                    .total_cmp(&pencil_residual(x, &r, b).norm())
            })
            .unwrap_or(Vec3::z())
    };
    let (mut s, mut res) = newton_pencil(x, &r, start);
    if res > 1e-10 {
        let fallback = pencil_grid_scan(x, &r, 200, 100);
        let (s2, res2) = newton_pencil(x, &r, fallback);
        if res2 < res {
            s = s2;
            res = res2;
        }
    }
    if res > 1e-10 {
        return Err(Error::NoConvergence { residual: res });
    }
    let osc = osculating_at_param(x, &s)?;
    Ok(VectorPlane {
        point: osc.point,
        param: s,
        jv: osc.apply_on_plane(v),
        residual: res,
    })
}
