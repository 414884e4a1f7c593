//! Discrete solid and boundary Cauchy transforms on a disk grid.
//!
//! `T[g](s) = (1/pi) int_U g(z) / (s - z) dA(z)` satisfies `dbar T[g] = g`.
//! On each full lattice cell the integrand is its node value plus a linear
//! term from central differences, integrated exactly against the kernel with
//! closed forms that only depend on the lattice offset. Cells cut by the
//! circle are clipped to polygons (the arc finely chorded) and carry the
//! value and gradient of a local quadratic fit at their centroid; near the
//! target their kernel integrals are exact for the polygon, further away a
//! moment expansion about the centroid is used.

use crate::error::{Error, Result};
use crate::grid::DiskGrid;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

const ARC_CHORDS: usize = 48;
const NEAR_CELLS: f64 = 8.0;
const FIT_POINTS: usize = 12;

#[derive(Debug, Clone)]
struct CutPiece {
    cell: (i64, i64),
    centre: C64,
    centroid: C64,
    area: f64,
    m2: C64,
    m3: C64,
    /// `int |z - m|^2` and `int conj(z - m) (z - m)^2`.
    j11: C64,
    j12: C64,
    boundary: Vec<C64>,
    /// Node weights for value, x and y derivative (per unit `h`) at the centroid.
    fit: Vec<(usize, [f64; 3])>,
}

/// Quadrature data for [`cauchy_transform`] on one grid.
#[derive(Debug, Clone)]
pub struct SolidQuadrature {
    radius: f64,
    h: f64,
    full: Vec<(i64, i64, usize)>,
    cut: Vec<CutPiece>,
    span: i64,
    /// Per offset: `int 1/u`, `int (ζ - m)/u`, `int conj(ζ - m)/u` over the unit cell, `u = s - ζ`.
    table: Vec<[C64; 3]>,
    /// Lattice neighbours `(-x, +x, -y, +y)` of each node.
    neighbours: Vec<[Option<usize>; 4]>,
}

/// Kernel moments over the unit cell whose centre sits at offset `(a, b)`
/// from the target, with `u = x + i y` running over the cell:
/// `int 1/u`, `int (ζ - m)/u` and `int conj(ζ - m)/u`, using `ζ - m = (a + ib) - u`.
fn unit_cell_integral(a: f64, b: f64) -> [C64; 3] {
    let gx = |x: f64, y: f64| {
        let r2 = x * x + y * y;
        0.5 * (y * r2.ln() - 2.0 * y + 2.0 * x * (y / x).atan())
    };
    let gy = |x: f64, y: f64| {
        let r2 = x * x + y * y;
        0.5 * (x * r2.ln() - 2.0 * x + 2.0 * y * (x / y).atan())
    };
    let rect = |g: &dyn Fn(f64, f64) -> f64| {
        let (x0, x1, y0, y1) = (a - 0.5, a + 0.5, b - 0.5, b + 0.5);
        g(x1, y1) - g(x0, y1) - g(x1, y0) + g(x0, y0)
    };
    let f = C64::new(rect(&gx), -rect(&gy));
    // (x^2 - y^2) / r^2 and x y / r^2
    let kd = |x: f64, y: f64| x * x * (y / x).atan() - y * y * (x / y).atan();
    let kxy = |x: f64, y: f64| 0.25 * (x * x + y * y) * (x * x + y * y).ln();
    let ubar_over_u = C64::new(rect(&kd), -2.0 * rect(&kxy));
    let off = C64::new(a, b);
    [f, off * f - 1.0, off.conj() * f - ubar_over_u]
}

impl SolidQuadrature {
    pub fn new(grid: &DiskGrid) -> Self {
        let (r, h, n) = (grid.radius(), grid.spacing(), grid.n() as i64);
        let inside_nodes: Vec<C64> = grid.nodes().to_vec();
        let mut full = Vec::new();
        let mut cut = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let c = C64::new(grid.coordinate(i), grid.coordinate(j));
                let corners = [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)]
                    .map(|(a, b)| C64::new(c.re + a * h, c.im + b * h).norm() <= r);
                if corners.iter().all(|&x| x) {
                    full.push((i, j, grid.node_at(i, j).expect("full cells have a node")));
                } else if c.norm() - r <= h {
                    if let Some(piece) = cut_piece((i, j), c, h, r, &inside_nodes) {
                        cut.push(piece);
                    }
                }
            }
        }
        let span = n + 2 * 8;
        let width = 2 * span + 1;
        let table = (0..width * width)
            .into_par_iter()
            .map(|k| unit_cell_integral((k / width - span) as f64, (k % width - span) as f64))
            .collect();
        let neighbours = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, _)| {
                let (i, j) = grid.lattice_index(k);
                let (i, j) = (i as i64, j as i64);
                [grid.node_at(i - 1, j), grid.node_at(i + 1, j), grid.node_at(i, j - 1), grid.node_at(i, j + 1)]
            })
            .collect();
        SolidQuadrature {
            radius: r,
            h,
            full,
            cut,
            span,
            table,
            neighbours,
        }
    }

    pub fn total_area(&self) -> f64 {
        self.full.len() as f64 * self.h * self.h + self.cut.iter().map(|c| c.area).sum::<f64>()
    }

    fn lattice_cell(&self, s: C64) -> (i64, i64) {
        let f = |x: f64| ((x + self.radius) / self.h).floor() as i64;
        (f(s.re), f(s.im))
    }

    /// `T[g]` at lattice cell centres (inside or outside the disk).
    pub fn transform_at(&self, g: &[C64], targets: &[C64]) -> Vec<C64> {
        let gq: Vec<[C64; 3]> = self
            .cut
            .iter()
            .map(|c| {
                let mut out = [C64::new(0.0, 0.0); 3];
                for &(k, w) in &c.fit {
                    for (o, wi) in out.iter_mut().zip(w) {
                        *o += g[k] * wi;
                    }
                }
                let (gx, gy) = (out[1] / self.h, out[2] / self.h);
                let i = C64::i();
                [out[0], (gx - i * gy) * 0.5, (gx + i * gy) * 0.5]
            })
            .collect();
        let grad = self.gradients(g);
        targets.par_iter().map(|&s| self.eval_at_cell_centre(g, &grad, &gq, s)).collect()
    }

    /// `(g_z, g_zbar)` at nodes times `h`, by central differences where possible.
    fn gradients(&self, g: &[C64]) -> Vec<(C64, C64)> {
        self.neighbours
            .iter()
            .enumerate()
            .map(|(k, nb)| {
                let diff = |lo: Option<usize>, hi: Option<usize>| match (lo, hi) {
                    (Some(a), Some(b)) => (g[b] - g[a]) * 0.5,
                    (None, Some(b)) => g[b] - g[k],
                    (Some(a), None) => g[k] - g[a],
                    (None, None) => C64::new(0.0, 0.0),
                };
                let gx = diff(nb[0], nb[1]);
                let gy = diff(nb[2], nb[3]);
                let i = C64::i();
                ((gx - i * gy) * 0.5, (gx + i * gy) * 0.5)
            })
            .collect()
    }

    fn eval_at_cell_centre(&self, g: &[C64], grad: &[(C64, C64)], gq: &[[C64; 3]], s: C64) -> C64 {
        let (is, js) = self.lattice_cell(s);
        let width = 2 * self.span + 1;
        let mut acc = C64::new(0.0, 0.0);
        for &(i, j, k) in &self.full {
            let (a, b) = (is - i + self.span, js - j + self.span);
            let t = &self.table[(a * width + b) as usize];
            let (gz, gb) = grad[k];
            acc += g[k] * t[0] + gz * t[1] + gb * t[2];
        }
        acc *= self.h;
        for (piece, v) in self.cut.iter().zip(gq) {
            let near = piece.cell == (is, js) || (piece.centre - s).norm() <= NEAR_CELLS * self.h;
            let (k0, k1, k1b) = if near {
                let (k, ubar) = polygon_kernels(&piece.boundary, s);
                let off = s - piece.centroid;
                (k, off * k - piece.area, off.conj() * k - ubar)
            } else {
                let d = (s - piece.centroid).inv();
                let d2 = d * d;
                (
                    d * piece.area + piece.m2 * d2 * d + piece.m3 * d2 * d2,
                    piece.m2 * d2 + piece.m3 * d2 * d,
                    piece.j11 * d2 + piece.j12 * d2 * d,
                )
            };
            acc += v[0] * k0 + v[1] * k1 + v[2] * k1b;
        }
        acc / std::f64::consts::PI
    }
}

/// Weights reproducing the value and the `h`-scaled gradient at `m` of the
/// least-squares quadratic through the nearest nodes.
fn fit_weights(nodes: &[C64], m: C64, h: f64) -> Vec<(usize, [f64; 3])> {
    let mut near: Vec<(f64, usize)> = nodes.iter().enumerate().map(|(k, z)| ((z - m).norm_sqr(), k)).collect();
    near.select_nth_unstable_by(FIT_POINTS, |a, b| a.0.total_cmp(&b.0));
    near.truncate(FIT_POINTS);
    let a = nalgebra::DMatrix::from_fn(FIT_POINTS, 6, |r, c| {
        let d = (nodes[near[r].1] - m) / h;
        [1.0, d.re, d.im, d.re * d.re, d.re * d.im, d.im * d.im][c]
    });
    let pinv = a.pseudo_inverse(1e-12).expect("svd of a small matrix");
    near.iter()
        .enumerate()
        .map(|(r, &(_, k))| (k, [pinv[(0, r)], pinv[(1, r)], pinv[(2, r)]]))
        .collect()
}

/// `int dA / (s - z)` and `int conj(s - z) / (s - z) dA` over a
/// counterclockwise polygon, exactly.
///
/// Green's formula `int f dA = (1/2i) oint G dz` with `dbar G = f`, using
/// `G = -conj(v) / v` and `G = conj(v)^2 / (2 v)` for `v = z - s`; both are
/// bounded at `s`. On a segment `conj(v) = l v + mu` with `l = conj(d) / d`.
fn polygon_kernels(poly: &[C64], s: C64) -> (C64, C64) {
    let mut k = C64::new(0.0, 0.0);
    let mut kb = C64::new(0.0, 0.0);
    for j in 0..poly.len() {
        let a = poly[j] - s;
        let b = poly[(j + 1) % poly.len()] - s;
        let d = b - a;
        if d.norm() == 0.0 {
            continue;
        }
        let l = d.conj() / d;
        let mu = a.conj() - l * a;
        let log = if a.norm() > 0.0 && b.norm() > 0.0 {
            (b / a).ln()
        } else {
            C64::new(0.0, 0.0)
        };
        k -= l * d + mu * log;
        kb += (l * l * (b * b - a * a) * 0.5 + l * mu * d * 2.0 + mu * mu * log) * 0.5;
    }
    let two_i = 2.0 * C64::i();
    (k / two_i, kb / two_i)
}

/// `(1 / 2i) oint g dz` over a counterclockwise polygon, which is `int f dA`
/// when `dbar g = f`; exact for `g` polynomial of degree at most 7.
fn polygon_green<F: Fn(C64) -> C64>(poly: &[C64], g: F) -> C64 {
    const GL: [(f64, f64); 4] = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    ];
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let d = b - a;
        for (x, w) in GL {
            let z = a + d * (0.5 * (x + 1.0));
            acc += g(z) * d * (0.5 * w);
        }
    }
    acc / (2.0 * C64::i())
}

/// Boundary of `square ∩ disk` as a counterclockwise polygon.
fn clip_to_disk(c: C64, h: f64, r: f64) -> Vec<C64> {
    let corners = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)].map(|(a, b)| C64::new(c.re + a * h, c.im + b * h));
    // (point, Some(true) exit / Some(false) entry / None corner)
    let mut marks: Vec<(C64, Option<bool>)> = Vec::new();
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        if a.norm() <= r {
            marks.push((a, None));
        }
        let d = b - a;
        let (qa, qb, qc) = (d.norm_sqr(), 2.0 * (a.conj() * d).re, a.norm_sqr() - r * r);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let sq = disc.sqrt();
            for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                if t > 0.0 && t < 1.0 {
                    let z = a + d * t;
                    // leaving the disk when |a + t d| is increasing
                    let exiting = (z.conj() * d).re > 0.0;
                    marks.push((z, Some(exiting)));
                }
            }
        }
    }
    let mut poly = Vec::new();
    let m = marks.len();
    for k in 0..m {
        poly.push(marks[k].0);
        if marks[k].1 == Some(true) {
            // follow the arc counterclockwise to the next entry
            if let Some(e) = (1..m).map(|j| &marks[(k + j) % m]).find(|x| x.1 == Some(false)) {
                let (t0, mut t1) = (marks[k].0.arg(), e.0.arg());
                if t1 < t0 {
                    t1 += std::f64::consts::TAU;
                }
                for j in 1..ARC_CHORDS {
                    poly.push(C64::from_polar(r, t0 + (t1 - t0) * j as f64 / ARC_CHORDS as f64));
                }
            }
        }
    }
    poly
}

fn cut_piece(cell: (i64, i64), c: C64, h: f64, r: f64, nodes: &[C64]) -> Option<CutPiece> {
    let boundary = clip_to_disk(c, h, r);
    if boundary.len() < 3 {
        return None;
    }
    let area = polygon_green(&boundary, |z| z.conj()).re;
    if area <= 1e-14 * h * h {
        return None;
    }
    let centroid = polygon_green(&boundary, |z| z.conj() * z) / area;
    let m2 = polygon_green(&boundary, |z| (z - centroid).powi(2) * z.conj());
    let m3 = polygon_green(&boundary, |z| (z - centroid).powi(3) * z.conj());
    let j11 = polygon_green(&boundary, |z| (z - centroid).conj().powi(2) * (z - centroid) * 0.5);
    let j12 = polygon_green(&boundary, |z| (z - centroid).conj().powi(2) * (z - centroid).powi(2) * 0.5);
    Some(CutPiece {
        cell,
        centre: c,
        centroid,
        area,
        m2,
        m3,
        j11,
        j12,
        fit: fit_weights(nodes, centroid, h),
        boundary,
    })
}

/// `T[g]` at every grid node.
pub fn cauchy_transform(grid: &DiskGrid, g: &[C64]) -> Result<Vec<C64>> {
    let quad = SolidQuadrature::new(grid);
    cauchy_transform_with(&quad, grid, g)
}

pub fn cauchy_transform_with(quad: &SolidQuadrature, grid: &DiskGrid, g: &[C64]) -> Result<Vec<C64>> {
    if g.len() != grid.len() {
        return Err(Error::Invalid(format!(
            "field has {} values for {} grid nodes",
            g.len(),
            grid.len()
        )));
    }
    Ok(quad.transform_at(g, grid.nodes()))
}

/// `n` equally spaced points on the circle of radius `r`.
pub fn circle_nodes(r: f64, n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}

/// Cauchy integral of boundary values `f` (at [`circle_nodes`]) evaluated at
/// interior targets, by the barycentric trapezoid rule.
pub fn boundary_cauchy(boundary: &[C64], f: &[C64], targets: &[C64]) -> Vec<C64> {
    targets
        .par_iter()
        .map(|&s| {
            let mut num = C64::new(0.0, 0.0);
            let mut den = C64::new(0.0, 0.0);
            for (z, v) in boundary.iter().zip(f) {
                let d = z - s;
                if d.norm() < 1e-300 {
                    return *v;
                }
                let w = z / d;
                num += v * w;
                den += w;
            }
            num / den
        })
        .collect()
}
