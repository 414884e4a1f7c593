//! Local pseudocomplex structures `w_zbar = Q(z, zbar, w, wbar, p, pbar)` in
//! adapted coordinates, with `p = w_z`.
//!
//! Real coordinates are `(x1, x2, x3, x4) = (Re z, Im z, Re w, Im w)` and the
//! first derivatives of a graph `w(z)` are `p^j_k = d u^j / d x^k` with
//! `w = u^1 + i u^2`.

use crate::congruence::{Cap, LineCongruence};
use crate::error::{Error, Result};
use crate::grassmann::{plucker_of_plane, PluckerPoint, TwoPlane, Vec4};
use crate::grid::DiskGrid;
use crate::sphere::Vec3;
use nalgebra::{Matrix2, SMatrix};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Tolerance on `Q(0)` and `dQ(0)`.
pub const NORMAL_FORM_TOL: f64 = 1e-12;
pub const DEFAULT_DEGREE: u32 = 6;

/// Point `(z, w, p)` of the chart; conjugates are implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub z: C64,
    pub w: C64,
    pub p: C64,
}

impl ChartPoint {
    pub fn new(z: C64, w: C64, p: C64) -> Self {
        ChartPoint { z, w, p }
    }

    /// Values of `(z, zbar, w, wbar, p, pbar)`.
    pub fn slots(&self) -> [C64; 6] {
        [self.z, self.z.conj(), self.w, self.w.conj(), self.p, self.p.conj()]
    }
}

/// Monomial `coef * z^a zbar^b w^c wbar^d p^e pbar^f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub exp: [u32; 6],
    pub coef: C64,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: [u32; 6],
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ChartJson {
    Builtin {
        builtin: String,
    },
    Table {
        #[serde(default = "default_degree")]
        degree: u32,
        terms: Vec<TermJson>,
        #[serde(default = "default_radius")]
        radius: f64,
    },
}

fn default_degree() -> u32 {
    DEFAULT_DEGREE
}

fn default_radius() -> f64 {
    1.0
}

/// A polynomial right-hand side `Q` in normal form (`Q = dQ = 0` at the origin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartJson", into = "ChartJson")]
pub struct Chart {
    terms: Vec<Term>,
    degree: u32,
    radius: f64,
    builtin: Option<String>,
}

impl TryFrom<ChartJson> for Chart {
    type Error = Error;
    fn try_from(j: ChartJson) -> Result<Self> {
        match j {
            ChartJson::Builtin { builtin } => Chart::builtin(&builtin),
            ChartJson::Table {
                degree,
                terms,
                radius,
            } => Chart::from_terms(
                terms
                    .into_iter()
                    .map(|t| Term {
                        exp: t.exp,
                        coef: C64::new(t.re, t.im),
                    })
                    .collect(),
                degree,
                radius,
            ),
        }
    }
}

impl From<Chart> for ChartJson {
    fn from(c: Chart) -> Self {
        if let Some(name) = c.builtin {
            return ChartJson::Builtin { builtin: name };
        }
        ChartJson::Table {
            degree: c.degree,
            terms: c
                .terms
                .iter()
                .map(|t| TermJson {
                    exp: t.exp,
                    re: t.coef.re,
                    im: t.coef.im,
                })
                .collect(),
            radius: c.radius,
        }
    }
}

pub const BUILTIN_CHARTS: [&str; 2] = ["flat", "darboux2"];

impl Chart {
    pub fn from_terms(terms: Vec<Term>, degree: u32, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Invalid(format!("chart radius must be positive, got {radius}")));
        }
        let mut merged: Vec<Term> = Vec::new();
        for t in terms {
            let total: u32 = t.exp.iter().sum();
            if total > degree {
                return Err(Error::Invalid(format!(
                    "term {:?} exceeds declared degree {degree}",
                    t.exp
                )));
            }
            match merged.iter_mut().find(|m| m.exp == t.exp) {
                Some(m) => m.coef += t.coef,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != C64::new(0.0, 0.0));
        let chart = Chart {
            terms: merged,
            degree,
            radius,
            builtin: None,
        };
        chart.check_normal_form()?;
        Ok(chart)
    }

    /// `flat` (`Q = 0`) or `darboux2` (`Q = w wbar`).
    pub fn builtin(name: &str) -> Result<Self> {
        let terms = match name {
            "flat" => vec![],
            "darboux2" => vec![Term {
                exp: [0, 0, 1, 1, 0, 0],
                coef: C64::new(1.0, 0.0),
            }],
            other => return Err(Error::UnknownName(other.into())),
        };
        let mut c = Chart::from_terms(terms, DEFAULT_DEGREE, 1.0)?;
        c.builtin = Some(name.into());
        Ok(c)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn name(&self) -> Option<&str> {
        self.builtin.as_deref()
    }

    pub fn is_flat(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether `Q` involves `p` or `pbar`.
    pub fn depends_on_p(&self) -> bool {
        self.terms.iter().any(|t| t.exp[4] + t.exp[5] > 0)
    }

    fn check_normal_form(&self) -> Result<()> {
        let origin = ChartPoint::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let v = self.q(&origin).norm();
        let d = self.dq(&origin).iter().map(|c| c.norm()).fold(0.0, crate::nan_max);
        if v > NORMAL_FORM_TOL || d > NORMAL_FORM_TOL {
            return Err(Error::Invalid(format!(
                "chart is not in normal form: |Q(0)| = {v:e}, max |dQ(0)| = {d:e}"
            )));
        }
        Ok(())
    }

    pub fn q(&self, pt: &ChartPoint) -> C64 {
        let s = pt.slots();
        self.terms.iter().map(|t| t.coef * monomial(&s, &t.exp, None)).sum()
    }

    /// Wirtinger derivatives with respect to `(z, zbar, w, wbar, p, pbar)`.
    pub fn dq(&self, pt: &ChartPoint) -> [C64; 6] {
        let s = pt.slots();
        let mut out = [C64::new(0.0, 0.0); 6];
        for t in &self.terms {
            for (k, o) in out.iter_mut().enumerate() {
                if t.exp[k] > 0 {
                    *o += t.coef * monomial(&s, &t.exp, Some(k));
                }
            }
        }
        out
    }
}

fn monomial(s: &[C64; 6], exp: &[u32; 6], diff: Option<usize>) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for k in 0..6 {
        let mut e = exp[k];
        if diff == Some(k) {
            v *= e as f64;
            e -= 1;
        }
        if e > 0 {
            v *= s[k].powu(e);
        }
    }
    v
}

/// Linearization of a real PDE pair `F^i(x, u, p) = 0` in the first derivatives.
///
/// `df1[j][k] = dF^1 / dp^j_k`, likewise `df2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdePairLinearization {
    pub df1: [[f64; 2]; 2],
    pub df2: [[f64; 2]; 2],
}

impl PdePairLinearization {
    /// Rows `F^1, F^2`, columns `p11, p12, p21, p22`.
    pub fn matrix(&self) -> SMatrix<f64, 2, 4> {
        let row = |d: &[[f64; 2]; 2]| [d[0][0], d[0][1], d[1][0], d[1][1]];
        let (r1, r2) = (row(&self.df1), row(&self.df2));
        SMatrix::<f64, 2, 4>::from_row_slice(&[r1[0], r1[1], r1[2], r1[3], r2[0], r2[1], r2[2], r2[3]])
    }

    /// Coefficients `(a, b, c)` of `det(sum_k dF^i/dp^j_k xi_k) = a xi1^2 + b xi1 xi2 + c xi2^2`.
    pub fn symbol(&self) -> (f64, f64, f64) {
        let m = |xi1: f64, xi2: f64| {
            Matrix2::new(
                self.df1[0][0] * xi1 + self.df1[0][1] * xi2,
                self.df1[1][0] * xi1 + self.df1[1][1] * xi2,
                self.df2[0][0] * xi1 + self.df2[0][1] * xi2,
                self.df2[1][0] * xi1 + self.df2[1][1] * xi2,
            )
            .determinant()
        };
        let a = m(1.0, 0.0);
        let c = m(0.0, 1.0);
        let b = m(1.0, 1.0) - a - c;
        (a, b, c)
    }
}

/// Rank tolerance for the linearization.
const RANK_TOL: f64 = 1e-10;

/// Whether the characteristic form has no nonzero real roots.
pub fn pde_pair_elliptic(lin: &PdePairLinearization) -> Result<bool> {
    let m = lin.matrix();
    let sv = m.singular_values();
    let scale = sv.max().max(f64::MIN_POSITIVE);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * scale).count();
    if rank < 2 || sv.max() == 0.0 {
        return Err(Error::RankDeficient { rank });
    }
    let (a, b, c) = lin.symbol();
    let disc = b * b - 4.0 * a * c;
    Ok(disc < -1e-14 * (a.abs() + b.abs() + c.abs()).powi(2))
}

/// Realified linearization of `w_zbar - Q(z, w, w_z) = 0` at `pt` (with `p = w_z`).
pub fn chart_linearization(c: &Chart, pt: &ChartPoint) -> PdePairLinearization {
    let dq = c.dq(pt);
    let (qp, qpb) = (dq[4], dq[5]);
    let i = C64::i();
    let half = |a: C64, b: C64, c: C64, d: C64| [a * 0.5, b * 0.5, c * 0.5, d * 0.5];
    let one = C64::new(1.0, 0.0);
    let dwzb = half(one, i, i, -one);
    let dwz = half(one, -i, i, one);
    let dwz_conj = half(one, i, -i, one);
    let mut g = [C64::new(0.0, 0.0); 4];
    for k in 0..4 {
        g[k] = dwzb[k] - qp * dwz[k] - qpb * dwz_conj[k];
    }
    PdePairLinearization {
        df1: [[g[0].re, g[1].re], [g[2].re, g[3].re]],
        df2: [[g[0].im, g[1].im], [g[2].im, g[3].im]],
    }
}

/// `p` as a function of the parameter sphere: `p(s) = (-s3 + i s2) / (1 + s1)`.
pub fn fiber_p_of_param(s: &Vec3) -> Option<C64> {
    let d = 1.0 + s[0];
    if d < 1e-300 {
        return None;
    }
    Some(C64::new(-s[2], s[1]) / d)
}

/// Inverse of [`fiber_p_of_param`].
pub fn fiber_param_of_p(p: C64) -> Vec3 {
    let r2 = p.norm_sqr();
    Vec3::new((1.0 - r2) / (1.0 + r2), 2.0 * p.im / (1.0 + r2), -2.0 * p.re / (1.0 + r2))
}

/// The oriented plane `dw = p dz + q dzbar` in real coordinates.
pub fn graph_plane(p: C64, q: C64) -> TwoPlane {
    let a = p + q;
    let b = C64::i() * (p - q);
    let u = Vec4::new(1.0, 0.0, a.re, a.im);
    let v = Vec4::new(0.0, 1.0, b.re, b.im);
    TwoPlane::new(u, v).expect("graph planes are nondegenerate")
}

/// The fiber congruence and whether it covers the whole sphere.
#[derive(Debug, Clone)]
pub struct FiberCongruence {
    pub congruence: LineCongruence,
    /// `true` when the fiber was restricted to `|p| <= radius`.
    pub is_patch: bool,
    /// `false` when the sampled patch fails to be a graph over `S2-`.
    pub is_graph: bool,
}

/// Planes `dw = p dz + Q(z0, w0, p) dzbar` for `p` over the Riemann sphere.
pub fn fiber_congruence(c: &Chart, z0: C64, w0: C64) -> Result<FiberCongruence> {
    if z0.norm() > c.radius() || w0.norm() > c.radius() {
        return Err(Error::DomainEscape {
            value: z0.norm().max(w0.norm()),
        });
    }
    let chart = c.clone();
    let map = move |s: &Vec3| -> PluckerPoint {
        match fiber_p_of_param(s) {
            Some(p) if p.norm() < 1e8 => {
                let q = chart.q(&ChartPoint::new(z0, w0, p));
                plucker_of_plane(&graph_plane(p, q)).expect("graph planes are nondegenerate")
            }
            // the vertical plane span(e3, e4)
            _ => PluckerPoint {
                x: Vec3::x(),
                y: -Vec3::x(),
            },
        }
    };
    let base = LineCongruence::parametrized("fiber", map);
    if !c.depends_on_p() {
        return Ok(FiberCongruence {
            congruence: base,
            is_patch: false,
            is_graph: true,
        });
    }
    let rho = c.radius();
    // |p| = tan(angle / 2) from +e1
    let cap = Cap {
        center: Vec3::x(),
        cos_radius: (2.0 * rho.atan()).cos(),
    };
    let congruence = base.with_domain(cap);
    let is_graph = congruence
        .samples(3)
        .par_iter()
        .all(|s| congruence.differentials(&s.param).1.determinant() > 0.0);
    Ok(FiberCongruence {
        congruence,
        is_patch: true,
        is_graph,
    })
}

/// Restriction of the fiber at `(z0, w0)` to `|p| <= p_radius`, with its
/// ellipticity verdict and margin.
pub fn fiber_elliptic_near_zero(c: &Chart, z0: C64, w0: C64, p_radius: f64) -> Result<(bool, f64)> {
    let fiber = fiber_congruence(c, z0, w0)?;
    let cap = Cap {
        center: Vec3::x(),
        cos_radius: (2.0 * p_radius.atan()).cos(),
    };
    Ok(crate::congruence::is_elliptic(&fiber.congruence.with_domain(cap)))
}

/// A random normal-form polynomial of degree 2..=`degree` with coefficients
/// uniform in the disk of radius `scale`.
pub fn random_chart<R: rand::Rng>(rng: &mut R, degree: u32, n_terms: usize, scale: f64) -> Chart {
    let mut terms = Vec::with_capacity(n_terms);
    while terms.len() < n_terms {
        let exp: [u32; 6] = std::array::from_fn(|_| rng.gen_range(0..=degree));
        let total: u32 = exp.iter().sum();
        if !(2..=degree).contains(&total) {
            continue;
        }
        let r = scale * rng.gen::<f64>().sqrt();
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        terms.push(Term {
            exp,
            coef: C64::from_polar(r, a),
        });
    }
    Chart::from_terms(terms, degree, 1.0).expect("degree >= 2 terms are in normal form")
}

/// Sampled curve `sigma -> (z, w, p)` on a disk grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveField {
    pub grid: DiskGrid,
    pub z: Vec<C64>,
    pub w: Vec<C64>,
    pub p: Vec<C64>,
}

impl CurveField {
    /// Graph gauge `z = sigma` with the given `w` and `p = w_z`.
    pub fn from_graph<W, P>(grid: DiskGrid, w: W, p: P) -> Self
    where
        W: Fn(C64) -> C64,
        P: Fn(C64) -> C64,
    {
        let z = grid.nodes().to_vec();
        let wv = z.iter().map(|&s| w(s)).collect();
        let pv = z.iter().map(|&s| p(s)).collect();
        CurveField {
            grid,
            z,
            w: wv,
            p: pv,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_sigma,im_sigma,re_z,im_z,re_w,im_w,re_p,im_p\n");
        for (k, s) in self.grid.nodes().iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                s.re, s.im, self.z[k].re, self.z[k].im, self.w[k].re, self.w[k].im, self.p[k].re, self.p[k].im
            );
        }
        out
    }

    /// Parses the output of [`CurveField::to_csv`]; the `sigma` columns must
    /// match the nodes of `grid`.
    pub fn from_csv(grid: DiskGrid, text: &str) -> Result<Self> {
        let mut rows = Vec::with_capacity(grid.len());
        for (k, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Invalid(format!("line {}: {e}", k + 1)))?;
            if vals.len() != 8 {
                return Err(Error::Invalid(format!("line {}: expected 8 columns, got {}", k + 1, vals.len())));
            }
            rows.push((k + 1, vals));
        }
        if rows.len() != grid.len() {
            return Err(Error::Invalid(format!("expected {} rows for the grid, got {}", grid.len(), rows.len())));
        }
        let c = |a: f64, b: f64| C64::new(a, b);
        for ((line, v), s) in rows.iter().zip(grid.nodes()) {
            if (c(v[0], v[1]) - s).norm() > 1e-9 * grid.radius().max(1.0) {
                return Err(Error::Invalid(format!("line {line}: sigma does not match grid node {s}")));
            }
        }
        Ok(CurveField {
            z: rows.iter().map(|(_, v)| c(v[2], v[3])).collect(),
            w: rows.iter().map(|(_, v)| c(v[4], v[5])).collect(),
            p: rows.iter().map(|(_, v)| c(v[6], v[7])).collect(),
            grid,
        })
    }

    /// Pointwise residuals of `dw = p dz + Q dzbar` at interior nodes.
    pub fn residuals(&self, c: &Chart) -> Vec<(usize, f64)> {
        self.grid
            .interior()
            .into_par_iter()
            .map(|k| {
                let (zs, zb) = self.grid.wirtinger(&self.z, k).expect("interior node");
                let (ws, wb) = self.grid.wirtinger(&self.w, k).expect("interior node");
                let q = c.q(&ChartPoint::new(self.z[k], self.w[k], self.p[k]));
                let p = self.p[k];
                let r1 = ws - p * zs - q * zb.conj();
                let r2 = wb - p * zb - q * zs.conj();
                (k, r1.norm().max(r2.norm()))
            })
            .collect()
    }
}

/// Max residual of the curve equation over interior grid nodes.
pub fn residual(c: &Chart, field: &CurveField) -> Result<f64> {
    if field.grid.n() < crate::grid::MIN_POINTS {
        return Err(Error::GridTooCoarse {
            n: field.grid.n(),
            min: crate::grid::MIN_POINTS,
        });
    }
    let n = field.grid.len();
    if field.z.len() != n || field.w.len() != n || field.p.len() != n {
        return Err(Error::Invalid("field arrays do not match the grid".into()));
    }
    Ok(field.residuals(c).into_iter().map(|(_, r)| r).fold(0.0, crate::nan_max))
}
