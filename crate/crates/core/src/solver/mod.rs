//! Local E-curves from holomorphic data by Picard iteration on Cauchy transforms.
//!
//! A curve `sigma -> (z, w, p)` is an E-curve when `dw = p dz + Q dzbar` on it.
//! Cross-differentiating the two Wirtinger components gives one complex
//! compatibility condition
//!
//! `p_sbar z_s + Q_sbar conj(z_sbar) = p_s z_sbar + Q_s conj(z_s)`,
//!
//! with `Q_s`, `Q_sbar` expanded by the chain rule. Writing `alpha = Q_p`,
//! `beta = Q_pbar` and `A = Q_z + Q_w p + Q_wbar conj(Q)`, let `k` be the root
//! of smaller modulus of `conj(beta) k^2 + (1 + |beta|^2 - |alpha|^2) k + beta = 0`
//! (real roots of the discriminant are exactly the elliptic points). With
//! `d = 1 + k conj(beta)` the parametrization `sigma` is fixed by
//!
//! `z_sbar = -c conj(z_s)`, `p_sbar = -r conj(p_s) - e conj(z_s)`,
//!
//! where `c = alpha / d`, `r = k conj(alpha) / d`, `e = -(A - k conj(A)) / d`.
//! Both are of the form `f_sbar = rhs`, so `f = F + T[rhs]` with `F`
//! holomorphic. The iteration evaluates `rhs` on the current iterate, updates
//! `z = Z + T[rhs_z]`, `p = P + T[rhs_p]`, and recovers `w` by integrating
//! `dw = p dz + Q dzbar` along rays from the origin.

pub mod cauchy;

pub use cauchy::{boundary_cauchy, cauchy_transform, circle_nodes, SolidQuadrature};

use crate::chart::{Chart, ChartPoint, CurveField};
use crate::error::{Error, Result};
use crate::grid::DiskGrid;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const MAX_TERM: f64 = 1e6;

/// Holomorphic data `Z(sigma)`, `P(sigma)` as power series, and `w(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DataJson", into = "DataJson")]
pub struct HolomorphicData {
    pub z: Vec<C64>,
    pub p: Vec<C64>,
    pub w0: C64,
}

#[derive(Serialize, Deserialize)]
struct DataJson {
    #[serde(rename = "Z")]
    z: Vec<[f64; 2]>,
    #[serde(rename = "P")]
    p: Vec<[f64; 2]>,
    w0: [f64; 2],
}

impl TryFrom<DataJson> for HolomorphicData {
    type Error = Error;
    fn try_from(d: DataJson) -> Result<Self> {
        let conv = |v: Vec<[f64; 2]>| v.into_iter().map(|[a, b]| C64::new(a, b)).collect::<Vec<_>>();
        let out = HolomorphicData {
            z: conv(d.z),
            p: conv(d.p),
            w0: C64::new(d.w0[0], d.w0[1]),
        };
        if out.z.iter().chain(&out.p).any(|c| !c.is_finite()) || !out.w0.is_finite() {
            return Err(Error::Invalid("holomorphic data must be finite".into()));
        }
        Ok(out)
    }
}

impl From<HolomorphicData> for DataJson {
    fn from(d: HolomorphicData) -> Self {
        let conv = |v: Vec<C64>| v.into_iter().map(|c| [c.re, c.im]).collect();
        DataJson {
            z: conv(d.z),
            p: conv(d.p),
            w0: [d.w0.re, d.w0.im],
        }
    }
}

fn horner(c: &[C64], s: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * s + a)
}

fn horner_derivative(c: &[C64], s: C64) -> C64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, (k, a)| acc * s + a * k as f64)
}

impl HolomorphicData {
    pub fn new(z: Vec<C64>, p: Vec<C64>, w0: C64) -> Self {
        HolomorphicData { z, p, w0 }
    }

    /// `Z(sigma) = sigma`, `P` given.
    pub fn graph(p: Vec<C64>, w0: C64) -> Self {
        HolomorphicData::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], p, w0)
    }

    /// Power series of the Cauchy integral of `f` over the circle of radius `r`,
    /// truncated to `degree`, from `m` trapezoid nodes.
    pub fn series_from_boundary<F: Fn(C64) -> C64>(f: F, r: f64, m: usize, degree: usize) -> Vec<C64> {
        let nodes = circle_nodes(r, m);
        let vals: Vec<C64> = nodes.iter().map(|&s| f(s)).collect();
        (0..=degree)
            .map(|k| {
                let sum: C64 = nodes
                    .iter()
                    .zip(&vals)
                    .map(|(s, v)| v * (s / r).powi(-(k as i32)))
                    .sum();
                sum / m as f64 / r.powi(k as i32)
            })
            .collect()
    }

    /// Holomorphic parts of given `z` and `p` on the circle of radius `r`.
    pub fn from_boundary_trace<F, G>(z: F, p: G, w0: C64, r: f64, degree: usize) -> Self
    where
        F: Fn(C64) -> C64,
        G: Fn(C64) -> C64,
    {
        let m = (4 * degree).max(128);
        HolomorphicData::new(
            Self::series_from_boundary(z, r, m, degree),
            Self::series_from_boundary(p, r, m, degree),
            w0,
        )
    }

    pub fn z_at(&self, s: C64) -> C64 {
        horner(&self.z, s)
    }

    pub fn dz_at(&self, s: C64) -> C64 {
        horner_derivative(&self.z, s)
    }

    pub fn p_at(&self, s: C64) -> C64 {
        horner(&self.p, s)
    }

    pub fn dp_at(&self, s: C64) -> C64 {
        horner_derivative(&self.p, s)
    }

    /// Largest `|c_k| r^k` over both series.
    pub fn max_term(&self, r: f64) -> f64 {
        let term = |(k, c): (usize, &C64)| c.norm() * r.powi(k as i32);
        self.z
            .iter()
            .enumerate()
            .map(term)
            .chain(self.p.iter().enumerate().map(term))
            .fold(0.0, crate::nan_max)
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        let m = self.max_term(r);
        if !(m <= MAX_TERM) {
            return Err(Error::Invalid(format!(
                "series terms reach {m:e} on radius {r}; data does not converge on the grid"
            )));
        }
        Ok(())
    }
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub substeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 200,
            substeps: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub delta: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: CurveField,
    pub history: Vec<IterationRecord>,
    pub residual: f64,
    pub converged: bool,
}

impl SolveReport {
    /// Ratios of successive iterate distances.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.history
            .windows(2)
            .filter(|w| w[0].delta > 0.0)
            .map(|w| w[1].delta / w[0].delta)
            .collect()
    }

    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,delta,residual\n");
        for r in &self.history {
            out.push_str(&format!("{},{:.6e},{:.6e}\n", r.iteration, r.delta, r.residual));
        }
        out
    }
}

/// Coefficients `(c, r, e)` of the first-order system at a point.
pub fn system_coefficients(chart: &Chart, pt: &ChartPoint) -> Result<(C64, C64, C64)> {
    let d = chart.dq(pt);
    let q = chart.q(pt);
    let (alpha, beta) = (d[4], d[5]);
    let a = d[0] + d[2] * pt.p + d[3] * q.conj();
    let b = 1.0 + beta.norm_sqr() - alpha.norm_sqr();
    let disc = b * b - 4.0 * beta.norm_sqr();
    // the component containing Q = 0: |alpha| + |beta| < 1
    if !(disc > 0.0 && b > 0.0 && beta.norm() < 1.0) {
        return Err(Error::NotElliptic {
            margin: 1.0 - alpha.norm() - beta.norm(),
        });
    }
    let k = -2.0 * beta / (b + disc.sqrt());
    let den = 1.0 + k * beta.conj();
    Ok((alpha / den, k * alpha.conj() / den, -(a - k * a.conj()) / den))
}

/// Cell-centred lattice extended a few cells past the disk, for differences
/// and interpolation up to the boundary.
struct ExtLattice {
    radius: f64,
    h: f64,
    pad: i64,
    m: i64,
    points: Vec<C64>,
    index: Vec<Option<usize>>,
    node_ext: Vec<usize>,
    /// Points outside the disk with weights of a local cubic fit of node values.
    outside: Vec<(usize, Vec<(usize, f64)>)>,
}

const PAD: i64 = 6;

impl ExtLattice {
    fn new(grid: &DiskGrid) -> Self {
        let (r, h, n) = (grid.radius(), grid.spacing(), grid.n() as i64);
        let m = n + 2 * PAD;
        let mut points = Vec::new();
        let mut index = vec![None; (m * m) as usize];
        for i in -PAD..n + PAD {
            for j in -PAD..n + PAD {
                let s = C64::new(grid.coordinate(i), grid.coordinate(j));
                if s.norm() <= r + (PAD - 1) as f64 * h {
                    index[((i + PAD) * m + j + PAD) as usize] = Some(points.len());
                    points.push(s);
                }
            }
        }
        let mut ext = ExtLattice {
            radius: r,
            h,
            pad: PAD,
            m,
            points,
            index,
            node_ext: vec![],
            outside: vec![],
        };
        ext.node_ext = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.lattice_index(k);
                ext.at(i as i64, j as i64).expect("grid nodes are in the extension")
            })
            .collect();
        let pts = ext.points.clone();
        ext.outside = (0..pts.len())
            .into_par_iter()
            .filter(|&k| pts[k].norm() > r)
            .map(|k| (k, cubic_fit_weights(grid.nodes(), pts[k], h)))
            .collect();
        ext
    }

    /// Node values extended to the whole lattice.
    fn extend(&self, f: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.points.len()];
        for (k, &e) in self.node_ext.iter().enumerate() {
            out[e] = f[k];
        }
        for (e, wts) in &self.outside {
            out[*e] = wts.iter().map(|&(k, w)| f[k] * w).sum();
        }
        out
    }

    fn at(&self, i: i64, j: i64) -> Option<usize> {
        let (a, b) = (i + self.pad, j + self.pad);
        if a < 0 || b < 0 || a >= self.m || b >= self.m {
            return None;
        }
        self.index[(a * self.m + b) as usize]
    }

    fn lattice_of(&self, s: C64) -> (f64, f64) {
        ((s.re + self.radius) / self.h - 0.5, (s.im + self.radius) / self.h - 0.5)
    }

    /// Fourth-order `(f_s, f_sbar)`; NaN where the stencil is incomplete.
    fn wirtinger(&self, f: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let nan = C64::new(f64::NAN, f64::NAN);
        let out: Vec<(C64, C64)> = (0..self.points.len())
            .into_par_iter()
            .map(|k| {
                let (x, y) = self.lattice_of(self.points[k]);
                let (i, j) = (x.round() as i64, y.round() as i64);
                let mut fx = C64::new(0.0, 0.0);
                let mut fy = C64::new(0.0, 0.0);
                for (d, wgt) in [(-2i64, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)] {
                    match (self.at(i + d, j), self.at(i, j + d)) {
                        (Some(a), Some(b)) => {
                            fx += f[a] * wgt;
                            fy += f[b] * wgt;
                        }
                        _ => return (nan, nan),
                    }
                }
                fx /= 12.0 * self.h;
                fy /= 12.0 * self.h;
                let i_ = C64::i();
                ((fx - i_ * fy) * 0.5, (fx + i_ * fy) * 0.5)
            })
            .collect();
        out.into_iter().unzip()
    }

    /// Tensor-product cubic Lagrange interpolation.
    fn interp(&self, fields: &[&[C64]], s: C64, out: &mut [C64]) {
        let (x, y) = self.lattice_of(s);
        let (i0, j0) = (x.floor() as i64, y.floor() as i64);
        let wx = cubic_weights(x - i0 as f64);
        let wy = cubic_weights(y - j0 as f64);
        for o in out.iter_mut() {
            *o = C64::new(0.0, 0.0);
        }
        for (a, wa) in wx.iter().enumerate() {
            for (b, wb) in wy.iter().enumerate() {
                let idx = self.at(i0 - 1 + a as i64, j0 - 1 + b as i64);
                let wgt = wa * wb;
                for (o, f) in out.iter_mut().zip(fields) {
                    *o += match idx {
                        Some(k) => f[k] * wgt,
                        None => C64::new(f64::NAN, f64::NAN),
                    };
                }
            }
        }
    }
}

const EXTRAP_POINTS: usize = 40;

/// Weights giving the value at `s` of the least-squares cubic through the
/// nearest nodes.
fn cubic_fit_weights(nodes: &[C64], s: C64, h: f64) -> Vec<(usize, f64)> {
    let mut near: Vec<(f64, usize)> = nodes.iter().enumerate().map(|(k, z)| ((z - s).norm_sqr(), k)).collect();
    near.select_nth_unstable_by(EXTRAP_POINTS, |a, b| a.0.total_cmp(&b.0));
    near.truncate(EXTRAP_POINTS);
    let a = nalgebra::DMatrix::from_fn(EXTRAP_POINTS, 10, |r, c| {
        let d = (nodes[near[r].1] - s) / h;
        let (x, y) = (d.re, d.im);
        [1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y][c]
    });
    let pinv = a.pseudo_inverse(1e-12).expect("svd of a small matrix");
    near.iter().enumerate().map(|(r, &(_, k))| (k, pinv[(0, r)])).collect()
}

fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Per-node quantities of one iterate.
struct State {
    z: Vec<C64>,
    p: Vec<C64>,
    w: Vec<C64>,
    zs: Vec<C64>,
    ps: Vec<C64>,
}

struct Workspace<'a> {
    chart: &'a Chart,
    data: &'a HolomorphicData,
    grid: &'a DiskGrid,
    ext: ExtLattice,
    quad: SolidQuadrature,
    opts: SolverOptions,
}

impl Workspace<'_> {
    fn transform(&self, g: &[C64]) -> Vec<C64> {
        self.quad.transform_at(g, self.grid.nodes())
    }

    fn state(&self, corr_z: &[C64], corr_p: &[C64]) -> Result<State> {
        let corr_z = &self.ext.extend(corr_z);
        let corr_p = &self.ext.extend(corr_p);
        let (dz, dbz) = self.ext.wirtinger(corr_z);
        let (dp, _) = self.ext.wirtinger(corr_p);
        let nodes = self.grid.nodes();
        let ne = &self.ext.node_ext;
        let z: Vec<C64> = (0..nodes.len()).map(|k| self.data.z_at(nodes[k]) + corr_z[ne[k]]).collect();
        let p: Vec<C64> = (0..nodes.len()).map(|k| self.data.p_at(nodes[k]) + corr_p[ne[k]]).collect();
        let zs: Vec<C64> = (0..nodes.len()).map(|k| self.data.dz_at(nodes[k]) + dz[ne[k]]).collect();
        let ps: Vec<C64> = (0..nodes.len()).map(|k| self.data.dp_at(nodes[k]) + dp[ne[k]]).collect();
        let fields: [&[C64]; 4] = [corr_z, corr_p, &dz, &dbz];
        let w: Vec<C64> = nodes.par_iter().map(|&s| self.integrate_w(&fields, s)).collect();
        let state = State { z, p, w, zs, ps };
        let worst = state
            .z
            .iter()
            .chain(&state.w)
            .chain(&state.p)
            .map(|c| c.norm())
            .fold(0.0, crate::nan_max);
        if !worst.is_finite() || worst > self.chart.radius() {
            return Err(Error::DomainEscape { value: worst });
        }
        Ok(state)
    }

    /// `w` at `target` by RK4 along the segment from the origin.
    fn integrate_w(&self, fields: &[&[C64]; 4], target: C64) -> C64 {
        let n = self.opts.substeps;
        let dt = 1.0 / n as f64;
        let mut buf = [C64::new(0.0, 0.0); 4];
        let mut rate = |t: f64, w: C64| {
            let s = target * t;
            self.ext.interp(fields, s, &mut buf);
            let z = self.data.z_at(s) + buf[0];
            let p = self.data.p_at(s) + buf[1];
            let zs = self.data.dz_at(s) + buf[2];
            let zt = zs * target + buf[3] * target.conj();
            let q = self.chart.q(&ChartPoint::new(z, w, p));
            p * zt + q * zt.conj()
        };
        let mut w = self.data.w0;
        for k in 0..n {
            let t = k as f64 * dt;
            let k1 = rate(t, w);
            let k2 = rate(t + 0.5 * dt, w + k1 * (0.5 * dt));
            let k3 = rate(t + 0.5 * dt, w + k2 * (0.5 * dt));
            let k4 = rate(t + dt, w + k3 * dt);
            w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        w
    }

    fn rhs(&self, st: &State) -> Result<(Vec<C64>, Vec<C64>)> {
        let mut rz = Vec::with_capacity(st.z.len());
        let mut rp = Vec::with_capacity(st.z.len());
        for k in 0..st.z.len() {
            let (c, r, e) = system_coefficients(self.chart, &ChartPoint::new(st.z[k], st.w[k], st.p[k]))?;
            rz.push(-c * st.zs[k].conj());
            rp.push(-r * st.ps[k].conj() - e * st.zs[k].conj());
        }
        Ok((rz, rp))
    }

    fn field(&self, st: State) -> CurveField {
        CurveField {
            grid: self.grid.clone(),
            z: st.z,
            w: st.w,
            p: st.p,
        }
    }
}

/// Runs the iteration and reports the last iterate whether or not it converged.
pub fn solve_curve_report(
    chart: &Chart,
    data: &HolomorphicData,
    grid: &DiskGrid,
    opts: SolverOptions,
) -> Result<SolveReport> {
    data.check_radius(grid.radius())?;
    let ws = Workspace {
        chart,
        data,
        grid,
        ext: ExtLattice::new(grid),
        quad: SolidQuadrature::new(grid),
        opts,
    };
    let zero = vec![C64::new(0.0, 0.0); grid.len()];
    let (mut corr_z, mut corr_p) = (zero.clone(), zero);
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let st = ws.state(&corr_z, &corr_p)?;
        let res = crate::chart::residual(chart, &ws.field(State {
            z: st.z.clone(),
            p: st.p.clone(),
            w: st.w.clone(),
            zs: vec![],
            ps: vec![],
        }))?;
        let (rz, rp) = ws.rhs(&st)?;
        let (nz, np) = if chart.is_flat() {
            (corr_z.clone(), corr_p.clone())
        } else {
            (ws.transform(&rz), ws.transform(&rp))
        };
        let delta = (0..grid.len())
            .map(|k| (nz[k] - corr_z[k]).norm().max((np[k] - corr_p[k]).norm()))
            .fold(0.0, crate::nan_max);
        corr_z = nz;
        corr_p = np;
        history.push(IterationRecord {
            iteration: it,
            delta,
            residual: res,
        });
        if delta < opts.tol {
            let st = ws.state(&corr_z, &corr_p)?;
            let field = ws.field(st);
            let residual = crate::chart::residual(chart, &field)?;
            if let Some(last) = history.last_mut() {
                last.residual = residual;
            }
            return Ok(SolveReport {
                field,
                history,
                residual,
                converged: true,
            });
        }
    }
    let st = ws.state(&corr_z, &corr_p)?;
    let field = ws.field(st);
    let residual = crate::chart::residual(chart, &field)?;
    Ok(SolveReport {
        field,
        history,
        residual,
        converged: false,
    })
}

/// Solves with default options; non-convergence is an error.
pub fn solve_curve(chart: &Chart, data: &HolomorphicData, grid: &DiskGrid) -> Result<SolveReport> {
    solve_with(chart, data, grid, SolverOptions::default())
}

pub fn solve_with(chart: &Chart, data: &HolomorphicData, grid: &DiskGrid, opts: SolverOptions) -> Result<SolveReport> {
    let rep = solve_curve_report(chart, data, grid, opts)?;
    if !rep.converged {
        return Err(Error::SolverNoConvergence {
            iterations: rep.history.len(),
            delta: rep.history.last().map_or(f64::NAN, |r| r.delta),
        });
    }
    Ok(rep)
}

/// `w_z` from finite differences of `w` and `z` at an interior node.
pub fn w_z(field: &CurveField, node: usize) -> Option<C64> {
    let (ws, wb) = field.grid.wirtinger(&field.w, node)?;
    let (zs, zb) = field.grid.wirtinger(&field.z, node)?;
    // w_s = w_z z_s + w_zbar conj(z_sbar), w_sbar = w_z z_sbar + w_zbar conj(z_s)
    let (a, b, c, d) = (zs, zb.conj(), zb, zs.conj());
    let det = a * d - b * c;
    if det.norm() < 1e-14 {
        return None;
    }
    Some((ws * d - b * wb) / det)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn flat_quadratic_example() {
        let chart = Chart::builtin("flat").unwrap();
        let data = HolomorphicData::graph(vec![c(0.0, 0.0), c(2.0, 0.0)], c(0.0, 0.0));
        let grid = DiskGrid::new(0.5, 32).unwrap();
        let rep = solve_curve(&chart, &data, &grid).unwrap();
        for (k, s) in grid.nodes().iter().enumerate() {
            assert!((rep.field.w[k] - s * s).norm() < 1e-12);
            assert!((rep.field.p[k] - s * 2.0).norm() < 1e-15);
        }
        assert!(rep.residual < 1e-9);
    }

    #[test]
    fn constant_solution() {
        let chart = Chart::builtin("flat").unwrap();
        let data = HolomorphicData::graph(vec![], c(0.3, -0.1));
        let rep = solve_curve(&chart, &data, &DiskGrid::new(0.2, 16).unwrap()).unwrap();
        assert!(rep.field.w.iter().all(|w| (w - c(0.3, -0.1)).norm() < 1e-15));
    }

    #[test]
    fn data_json_layout() {
        let d: HolomorphicData = serde_json::from_str(r#"{"Z":[[0,0],[1,0]],"P":[[0,0]],"w0":[-0.25,0]}"#).unwrap();
        assert_eq!(d.w0, c(-0.25, 0.0));
        assert_eq!(d.z_at(c(0.1, 0.2)), c(0.1, 0.2));
        let back: HolomorphicData = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn boundary_series_of_a_polynomial() {
        let s = HolomorphicData::series_from_boundary(|z| z * z * 3.0 + z.conj(), 0.2, 128, 4);
        assert!((s[2] - 3.0).norm() < 1e-10);
        assert!(s.iter().enumerate().all(|(k, v)| k == 2 || v.norm() < 1e-10));
    }

    #[test]
    fn darboux2_coefficients_match_explicit_derivative() {
        let q = Chart::builtin("darboux2").unwrap();
        let (z, cst) = (c(0.05, 0.1), 4.0);
        let s = z + z.conj() + cst;
        let (w, p) = (-s.inv(), s.powi(-2));
        let (cc, r, e) = system_coefficients(&q, &ChartPoint::new(z, w, p)).unwrap();
        assert_eq!((cc, r), (c(0.0, 0.0), c(0.0, 0.0)));
        // p_zbar = -2 / s^3
        assert!((-e - (-2.0 * s.powi(-3))).norm() < 1e-14);
    }
}
