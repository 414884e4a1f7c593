//! The almost complex structure on `(Z, W)` for which `dZ` and
//! `dW - W Zbar / (1 - |Z|^2) dZ - Wbar / (1 - |Z|^2) dZbar` are of type (1,0).
//!
//! A curve is a graph `W(Z)`; the defining equation for the curve with
//! holomorphic data `P` is
//! `W_Z = W Zbar / D + P(Z)`, `W_Zbar = Wbar / D`, `D = 1 - |Z|^2`,
//! which is a compatible total differential system.

use crate::chart::CurveField;
use crate::error::{Error, Result};
use crate::grid::DiskGrid;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

const EDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case3Options {
    /// RK4 steps per path leg.
    pub steps: usize,
    /// Largest allowed gap between radial and two-leg integration.
    pub path_tol: f64,
}

impl Default for Case3Options {
    fn default() -> Self {
        Case3Options {
            steps: 64,
            path_tol: 1e-6,
        }
    }
}

/// A case-(3) curve with its residuals.
///
/// `equation` is the full defining equation, `ideal` only its `dZbar` part
/// (the ideal restricting to type (1,0)), and `closure` the `Zbar`-derivative
/// of the restricted `dZ` coefficient.
#[derive(Debug, Clone)]
pub struct Case3Curve {
    pub field: CurveField,
    pub equation: f64,
    pub ideal: f64,
    pub closure: f64,
}

pub(crate) fn series(c: &[C64], s: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * s + a)
}

fn series_derivative(c: &[C64]) -> Vec<C64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

fn series_integral(c: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    out.extend(c.iter().enumerate().map(|(k, a)| a / (k + 1) as f64));
    out
}

fn slope(pfun: &[C64], z: C64, w: C64, dir: C64) -> C64 {
    let d = 1.0 - z.norm_sqr();
    (w * z.conj() / d + series(pfun, z)) * dir + w.conj() / d * dir.conj()
}

fn integrate_leg(pfun: &[C64], a: C64, b: C64, w: C64, steps: usize) -> C64 {
    let dir = b - a;
    let dt = 1.0 / steps as f64;
    let mut w = w;
    for k in 0..steps {
        let t = k as f64 * dt;
        let z0 = a + dir * t;
        let zh = a + dir * (t + 0.5 * dt);
        let z1 = a + dir * (t + dt);
        let k1 = slope(pfun, z0, w, dir);
        let k2 = slope(pfun, zh, w + k1 * (0.5 * dt), dir);
        let k3 = slope(pfun, zh, w + k2 * (0.5 * dt), dir);
        let k4 = slope(pfun, z1, w + k3 * dt, dir);
        w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    w
}

fn check_disk(radius: f64) -> Result<()> {
    if radius >= 1.0 - EDGE {
        return Err(Error::DomainEscape { value: radius });
    }
    Ok(())
}

pub fn case3_integrate(pfun: &[C64], w0: C64, grid: &DiskGrid) -> Result<Case3Curve> {
    case3_integrate_with(pfun, w0, grid, Case3Options::default())
}

/// Integrates `W` along rays from `Z = 0` and cross-checks each node against
/// the path through `Re Z`.
pub fn case3_integrate_with(pfun: &[C64], w0: C64, grid: &DiskGrid, opts: Case3Options) -> Result<Case3Curve> {
    check_disk(grid.radius())?;
    let zero = C64::new(0.0, 0.0);
    let vals: Vec<(C64, f64)> = grid
        .nodes()
        .par_iter()
        .map(|&s| {
            let radial = integrate_leg(pfun, zero, s, w0, opts.steps);
            let mid = integrate_leg(pfun, zero, C64::new(s.re, 0.0), w0, opts.steps);
            let bent = integrate_leg(pfun, C64::new(s.re, 0.0), s, mid, opts.steps);
            (radial, (radial - bent).norm())
        })
        .collect();
    if let Some(&(w, _)) = vals.iter().find(|(w, _)| !w.is_finite()) {
        return Err(Error::DomainEscape { value: w.norm() });
    }
    let gap = vals.iter().map(|v| v.1).fold(0.0, crate::nan_max);
    if gap > opts.path_tol {
        return Err(Error::PathInconsistency { gap });
    }
    let z = grid.nodes().to_vec();
    let field = CurveField {
        grid: grid.clone(),
        p: z.iter().map(|&s| series(pfun, s)).collect(),
        w: vals.into_iter().map(|v| v.0).collect(),
        z,
    };
    let (equation, ideal, closure) = case3_residuals(&field)?;
    Ok(Case3Curve {
        field,
        equation,
        ideal,
        closure,
    })
}

/// `(equation, ideal, closure)` residuals of a graph `W(Z)` whose `p` slot
/// carries `P(Z)`.
pub fn case3_residuals(field: &CurveField) -> Result<(f64, f64, f64)> {
    let grid = &field.grid;
    check_disk(field.z.iter().map(|z| z.norm()).fold(0.0, crate::nan_max))?;
    let nan = C64::new(f64::NAN, f64::NAN);
    let mut coef = vec![nan; grid.len()];
    let (mut eq, mut ideal) = (0.0f64, 0.0f64);
    for k in grid.interior() {
        let (ws, wb) = grid.wirtinger(&field.w, k).expect("interior node");
        let (z, w) = (field.z[k], field.w[k]);
        let d = 1.0 - z.norm_sqr();
        coef[k] = ws - w * z.conj() / d;
        let r_ideal = (wb - w.conj() / d).norm();
        ideal = ideal.max(r_ideal);
        eq = eq.max(r_ideal).max((coef[k] - field.p[k]).norm());
    }
    let mut closure = 0.0f64;
    for k in grid.interior() {
        if let Some((_, cb)) = grid.wirtinger(&coef, k) {
            if cb.is_finite() {
                closure = closure.max(cb.norm());
            }
        }
    }
    Ok((eq, ideal, closure))
}

/// `r = Z^2 f - conj(Z f + int_0^Z f)` for the shear generated by `f`.
pub fn shear_r(f: &[C64], z: C64) -> C64 {
    let b = z * series(f, z) + series(&series_integral(f), z);
    z * z * series(f, z) - b.conj()
}

/// Shear `a = (conj(r) + r Zbar) / (1 - |Z|^2)` and its `Z`-derivative.
fn shear_with_derivative(f: &[C64], z: C64) -> (C64, C64) {
    let fz = series(f, z);
    let df = series(&series_derivative(f), z);
    let d = 1.0 - z.norm_sqr();
    let r = shear_r(f, z);
    let r_z = z * 2.0 * fz + z * z * df;
    // d/dZ conj(r) = conj(r_Zbar) = -(2 f + Z f')
    let rbar_z = -(fz * 2.0 + z * df);
    let num = r.conj() + r * z.conj();
    let num_z = rbar_z + r_z * z.conj();
    (num / d, num_z / d + num * z.conj() / (d * d))
}

pub fn shear(f: &[C64], z: C64) -> C64 {
    shear_with_derivative(f, z).0
}

/// Applies `W -> W + a(Z, Zbar)`. The `p` slot is updated to the data of the
/// sheared curve, `P + a_Z - a Zbar / D`.
pub fn case3_symmetry(f: &[C64], field: &CurveField) -> Result<CurveField> {
    check_disk(field.z.iter().map(|z| z.norm()).fold(0.0, crate::nan_max))?;
    let mut out = field.clone();
    for k in 0..field.grid.len() {
        let z = field.z[k];
        let (a, a_z) = shear_with_derivative(f, z);
        out.w[k] += a;
        out.p[k] += a_z - a * z.conj() / (1.0 - z.norm_sqr());
    }
    Ok(out)
}
