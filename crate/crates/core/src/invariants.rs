//! Microlocal invariants `f`, `g` of elliptic line congruences, the balance
//! integrals and almost-complex detection for charts.
//!
//! A frame `lambda: V -> C^2` over a plane `P` sends `P` to `C + 0`
//! complex-linearly for the osculating structure on `P`, and `V/P` to the
//! second factor complex-linearly for the one on `V/P`. Along the congruence
//! the Maurer-Cartan form `mu = d lambda lambda^{-1}` splits into
//! complex-linear blocks `(xi, eta; vartheta, zeta)` and conjugate-linear
//! blocks `(xi', eta'; vartheta', zeta')`, with
//!
//! `xi' = f vartheta + h conj(vartheta)`, `zeta' = -h vartheta + g conj(vartheta)`.
//!
//! `f` and `g` change under the frame group, `i |f|^2 vartheta ^ conj(vartheta)`
//! does not. Reported values use the gauge in which `i vartheta ^ conj(vartheta)`
//! equals the round area form of `S2-`.

use crate::chart::{fiber_congruence, fiber_param_of_p, Chart};
use crate::congruence::{osculating_at_param, LineCongruence, SAMPLE_LEVEL};
use crate::error::{Error, Result};
use crate::sphere::{exp_map, tangent_frame, Vec3};
use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Geodesic step of the frame stencil.
pub const STENCIL_STEP: f64 = 1e-4;
/// Largest accepted condition estimate of the `(vartheta, conj vartheta)` system.
pub const MAX_CONDITION: f64 = 1e3;
pub const ALMOST_COMPLEX_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrolocalSample {
    pub y: Vec3,
    pub fval: C64,
    pub gval: C64,
    /// Round area weight on `S2-` carried by this sample.
    pub area_weight: f64,
}

impl MicrolocalSample {
    pub fn f_density(&self) -> f64 {
        self.fval.norm_sqr() * self.area_weight
    }

    pub fn g_density(&self) -> f64 {
        self.gval.norm_sqr() * self.area_weight
    }
}

/// `(complex-linear, conjugate-linear)` parts of the real 2x2 block at `(i, j)`.
fn split_block(m: &Matrix4<f64>, i: usize, j: usize) -> (C64, C64) {
    let (p, q) = (m[(2 * i, 2 * j)], m[(2 * i, 2 * j + 1)]);
    let (r, s) = (m[(2 * i + 1, 2 * j)], m[(2 * i + 1, 2 * j + 1)]);
    (C64::new(p + s, r - q) * 0.5, C64::new(p - s, r + q) * 0.5)
}

/// Frame group element `((a, b), (0, c))` with `a`, `c` complex scalars and
/// `b` real-linear.
pub fn h2_element(a: C64, b: Matrix2<f64>, c: C64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    let scalar = |m: &mut Matrix4<f64>, k: usize, z: C64| {
        m[(k, k)] = z.re;
        m[(k, k + 1)] = -z.im;
        m[(k + 1, k)] = z.im;
        m[(k + 1, k + 1)] = z.re;
    };
    scalar(&mut m, 0, a);
    scalar(&mut m, 2, c);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
    m
}

/// Splits `m = H N` with `H` in the frame group and
/// `N = ((1 + A', 0), (L, 1 + C'))`, `A'`, `C'` conjugate-linear, and returns
/// `N`. Differences of `N` along the stencil do not see the frame gauge.
fn slice_part(m: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let j = Matrix2::new(0.0, -1.0, 1.0, 0.0);
    let lin = |t: &Matrix2<f64>| (t - j * t * j) * 0.5;
    let block = |i: usize, k: usize| -> Matrix2<f64> { m.fixed_view::<2, 2>(2 * i, 2 * k).into() };
    let degenerate = || Error::StencilDegenerate { condition: f64::INFINITY };
    let m22 = block(1, 1);
    let c = lin(&m22);
    let c_inv = c.try_inverse().ok_or_else(degenerate)?;
    let one_c = c_inv * m22;
    let l = c_inv * block(1, 0);
    let b = block(0, 1) * one_c.try_inverse().ok_or_else(degenerate)?;
    let top = block(0, 0) - b * l;
    let a_inv = lin(&top).try_inverse().ok_or_else(degenerate)?;
    let mut n = Matrix4::zeros();
    n.fixed_view_mut::<2, 2>(0, 0).copy_from(&(a_inv * top));
    n.fixed_view_mut::<2, 2>(2, 0).copy_from(&l);
    n.fixed_view_mut::<2, 2>(2, 2).copy_from(&one_c);
    Ok(n)
}

/// Inverse frame `lambda^{-1}` (columns `u1, J u1, n, J n`) at parameter `s`,
/// with `u1`, `n` the projections of the reference vectors.
fn frame_inverse(x: &LineCongruence, s: &Vec3, u_ref: &Vector4<f64>, n_ref: &Vector4<f64>) -> Result<Matrix4<f64>> {
    let o = osculating_at_param(x, s)?;
    let cols: Vec<Vector4<f64>> = (0..4).map(|k| o.frame.column(k).into()).collect();
    let on_plane = |w: &Vector4<f64>| cols[0] * cols[0].dot(w) + cols[1] * cols[1].dot(w);
    let u1 = on_plane(u_ref);
    let n = n_ref - on_plane(n_ref);
    let u2 = o.apply_on_plane(&u1);
    let nc = nalgebra::Vector2::new(cols[2].dot(&n), cols[3].dot(&n));
    let jn = o.j_q * nc;
    let n2 = cols[2] * jn[0] + cols[3] * jn[1];
    Ok(Matrix4::from_columns(&[u1, u2, n, n2]))
}

/// Microlocal sample at parameter `s` with parameter-sphere weight
/// `weight` and stencil step `step`; `gauge(k)` multiplies the frame at
/// stencil point `k` (0 is the centre) on the left.
pub fn microlocal_with(
    x: &LineCongruence,
    s: &Vec3,
    weight: f64,
    step: f64,
    gauge: &(dyn Fn(usize) -> Matrix4<f64> + Sync),
) -> Result<MicrolocalSample> {
    let centre = osculating_at_param(x, s)?;
    let u_ref: Vector4<f64> = centre.frame.column(0).into();
    let n_ref: Vector4<f64> = centre.frame.column(2).into();
    let lam = |k: usize, q: &Vec3| -> Result<Matrix4<f64>> {
        let inv = frame_inverse(x, q, &u_ref, &n_ref)?;
        let l = inv.try_inverse().ok_or(Error::StencilDegenerate { condition: f64::INFINITY })?;
        Ok(gauge(k) * l)
    };
    let l0 = lam(0, s)?;
    let l0_inv = l0.try_inverse().ok_or(Error::StencilDegenerate { condition: f64::INFINITY })?;
    let (e1, e2) = tangent_frame(s);
    let h = step;
    let mut theta = [C64::new(0.0, 0.0); 2];
    let mut xi_p = [C64::new(0.0, 0.0); 2];
    let mut zeta_p = [C64::new(0.0, 0.0); 2];
    for (k, e) in [e1, e2].iter().enumerate() {
        let plus = slice_part(&(lam(1 + 2 * k, &exp_map(s, &(e * h)))? * l0_inv))?;
        let minus = slice_part(&(lam(2 + 2 * k, &exp_map(s, &(-e * h)))? * l0_inv))?;
        let mu = (plus - minus) / (2.0 * h);
        theta[k] = split_block(&mu, 1, 0).0;
        xi_p[k] = split_block(&mu, 0, 0).1;
        zeta_p[k] = split_block(&mu, 1, 1).1;
    }
    // [theta_k, conj theta_k] (u, v)^T = rhs_k
    let det = theta[0] * theta[1].conj() - theta[0].conj() * theta[1];
    let scale = theta[0].norm_sqr() + theta[1].norm_sqr();
    let condition = if det.norm() > 0.0 { scale / det.norm() } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::StencilDegenerate { condition });
    }
    let solve = |r: [C64; 2]| -> (C64, C64) {
        let u = (r[0] * theta[1].conj() - theta[0].conj() * r[1]) / det;
        let v = (theta[0] * r[1] - theta[1] * r[0]) / det;
        (u, v)
    };
    let (f, _) = solve(xi_p);
    let (_, g) = solve(zeta_p);
    // i vartheta ^ conj(vartheta) per unit parameter area
    let rho = det.norm();
    let (_, dy, point) = x.differentials(s);
    let jy = dy.determinant().abs();
    if !(jy > 0.0) {
        return Err(Error::StencilDegenerate { condition: f64::INFINITY });
    }
    let k = (rho / jy).sqrt();
    Ok(MicrolocalSample {
        y: point.y,
        fval: f * k,
        gval: g * k,
        area_weight: jy * weight,
    })
}

pub fn microlocal_at_param(x: &LineCongruence, s: &Vec3, weight: f64) -> Result<MicrolocalSample> {
    microlocal_with(x, s, weight, STENCIL_STEP, &|_| Matrix4::identity())
}

/// `f`, `g` at the plane over `y`, with unit parameter weight.
pub fn microlocal_fg(x: &LineCongruence, y: &Vec3) -> Result<MicrolocalSample> {
    let s = x.param_of_y(y)?;
    microlocal_at_param(x, &s, 1.0)
}

/// Samples over the icosphere of the given level.
pub fn microlocal_samples(x: &LineCongruence, level: u32) -> Result<Vec<MicrolocalSample>> {
    x.samples(level)
        .par_iter()
        .map(|s| microlocal_at_param(x, &s.param, s.weight))
        .collect()
}

pub fn balance_integrals(x: &LineCongruence) -> Result<(f64, f64)> {
    balance_integrals_at_level(x, SAMPLE_LEVEL)
}

pub fn balance_integrals_at_level(x: &LineCongruence, level: u32) -> Result<(f64, f64)> {
    if x.constant_value().is_some() {
        return Ok((0.0, 0.0));
    }
    let samples = microlocal_samples(x, level)?;
    Ok(samples
        .iter()
        .fold((0.0, 0.0), |(a, b), s| (a + s.f_density(), b + s.g_density())))
}

/// Whether `f` and `g` vanish within [`ALMOST_COMPLEX_TOL`] at every sample.
pub fn is_riemann_sphere(x: &LineCongruence, level: u32) -> Result<bool> {
    Ok(microlocal_samples(x, level)?
        .iter()
        .all(|m| m.fval.norm() < ALMOST_COMPLEX_TOL && m.gval.norm() < ALMOST_COMPLEX_TOL))
}

pub fn samples_csv(samples: &[MicrolocalSample]) -> String {
    let mut out = String::from("y1,y2,y3,re_f,im_f,re_g,im_g,weight\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            s.y[0], s.y[1], s.y[2], s.fval.re, s.fval.im, s.gval.re, s.gval.im, s.area_weight
        );
    }
    out
}

/// Fiber points `|p| <= 0.3` used by [`is_almost_complex`].
pub fn fiber_probe_points() -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    for r in [0.15, 0.3] {
        for k in 0..6 {
            out.push(C64::from_polar(r, std::f64::consts::TAU * k as f64 / 6.0));
        }
    }
    out
}

/// Largest `max(|f|, |g|)` over the fiber probes at each base point.
pub fn fiber_invariant_size(c: &Chart, samples: &[(C64, C64)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(z0, w0) in samples {
        let fiber = fiber_congruence(c, z0, w0)?;
        for p in fiber_probe_points() {
            let m = microlocal_at_param(&fiber.congruence, &fiber_param_of_p(p), 1.0)?;
            worst = worst.max(m.fval.norm()).max(m.gval.norm());
        }
    }
    Ok(worst)
}

/// Whether every sampled fiber congruence is a Riemann sphere near `p = 0`.
pub fn is_almost_complex(c: &Chart, samples: &[(C64, C64)]) -> Result<bool> {
    Ok(fiber_invariant_size(c, samples)? < ALMOST_COMPLEX_TOL)
}
