//! Curves of planes meeting a totally real plane in a line.

use super::{LineCongruence, FD_STEP};
use crate::error::{Error, Result};
use crate::grassmann::{plucker_of_plane, PluckerPoint, TwoPlane};
use crate::sphere::{distance, exp_map, step, tangent_frame, Icosphere, Vec3};
use serde::{Deserialize, Serialize};

/// Arc-length step of the continuation.
pub const TRACE_STEP: f64 = 0.01;
/// Corrector tolerance on `|F|`.
pub const TRACE_TOL: f64 = 1e-10;
const MAX_STEPS: usize = 20_000;
/// Distance at which a plane of `x` is considered equal to `r`.
const ON_CONGRUENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPointLoop {
    /// Points `Y` on `S2-` in tracing order.
    pub samples: Vec<Vec3>,
    /// Parameter values of the samples.
    pub params: Vec<Vec3>,
    pub closed: bool,
}

struct Level<'a> {
    x: &'a LineCongruence,
    r: PluckerPoint,
}

impl Level<'_> {
    fn value(&self, s: &Vec3) -> f64 {
        let p = self.x.point(s);
        self.r.y.dot(&p.y) - self.r.x.dot(&p.x)
    }

    /// Tangent gradient of `F` at `s`.
    fn gradient(&self, s: &Vec3) -> Vec3 {
        let (e1, e2) = tangent_frame(s);
        let h = FD_STEP;
        let d = |e: &Vec3| (self.value(&exp_map(s, &(e * h))) - self.value(&exp_map(s, &(-e * h)))) / (2.0 * h);
        e1 * d(&e1) + e2 * d(&e2)
    }

    /// Newton projection onto `F = 0` along the gradient.
    fn correct(&self, mut s: Vec3) -> Option<Vec3> {
        for _ in 0..30 {
            let f = self.value(&s);
            if f.abs() < TRACE_TOL {
                return Some(s);
            }
            let g = self.gradient(&s);
            let gn = g.norm_squared();
            if !(gn > 1e-20) {
                return None;
            }
            s = exp_map(&s, &(-g * (f / gn)));
        }
        (self.value(&s).abs() < TRACE_TOL).then_some(s)
    }
}

/// Trace the planes of `x` that meet `r` in a line.
pub fn real_points_curve(x: &LineCongruence, r: &TwoPlane) -> Result<RealPointLoop> {
    let rp = plucker_of_plane(r)?;
    for cand in [rp, rp.antipode()] {
        if let Ok(s) = x.param_of_y(&cand.y) {
            let d = (x.point(&s).x - cand.x).norm();
            if d < ON_CONGRUENCE_TOL {
                return Err(Error::NotTotallyReal { distance: d });
            }
        }
    }
    let level = Level { x, r: rp };
    let start = find_start(&level).ok_or(Error::TracingFailure { steps: 0 })?;
    let mut params = vec![start];
    let mut s = start;
    let mut dir_prev: Option<Vec3> = None;
    for k in 1..MAX_STEPS {
        let g = level.gradient(&s);
        let mut t = s.cross(&g);
        if !(t.norm() > 1e-14) {
            return Err(Error::TracingFailure { steps: k });
        }
        t /= t.norm();
        if let Some(prev) = dir_prev {
            if t.dot(&prev) < 0.0 {
                t = -t;
            }
        }
        let predicted = step(&s, &t, TRACE_STEP);
        let next = level
            .correct(predicted)
            .ok_or(Error::TracingFailure { steps: k })?;
        // transport the direction to the new point
        dir_prev = Some((next - s).normalize());
        s = next;
        if k > 10 && distance(&s, &start) < 0.5 * TRACE_STEP {
            let samples = params.iter().map(|p| x.point(p).y).collect();
            return Ok(RealPointLoop {
                samples,
                params,
                closed: true,
            });
        }
        params.push(s);
    }
    Err(Error::TracingFailure { steps: MAX_STEPS })
}

fn find_start(level: &Level) -> Option<Vec3> {
    let ico = Icosphere::new(3);
    let values: Vec<f64> = ico
        .vertices
        .iter()
        .map(|s| if level.x.domain().map_or(true, |c| c.contains(s)) { level.value(s) } else { f64::NAN })
        .collect();
    for (a, b) in ico.edges() {
        let (fa, fb) = (values[a], values[b]);
        if !(fa * fb < 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (ico.vertices[a], ico.vertices[b]);
        let mut flo = fa;
        for _ in 0..40 {
            let mid = (lo + hi).normalize();
            let fm = level.value(&mid);
            if fm * flo > 0.0 {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        if let Some(s) = level.correct((lo + hi).normalize()) {
            return Some(s);
        }
    }
    None
}

/// Icosphere vertices where the defining function changes sign along an edge.
pub fn sign_change_points(x: &LineCongruence, r: &TwoPlane, level: u32) -> Result<Vec<Vec3>> {
    let rp = plucker_of_plane(r)?;
    let lv = Level { x, r: rp };
    let ico = Icosphere::new(level);
    let values: Vec<f64> = ico.vertices.iter().map(|s| lv.value(s)).collect();
    Ok(ico
        .edges()
        .into_iter()
        .filter(|&(a, b)| values[a] * values[b] < 0.0)
        .map(|(a, b)| (ico.vertices[a] + ico.vertices[b]).normalize())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::{riemann_sphere, ComplexStructureJ};
    use crate::grassmann::{incidence_with_tol, Incidence};

    #[test]
    fn complex_line_is_not_totally_real() {
        let x = riemann_sphere(&ComplexStructureJ::standard()).unwrap();
        let err = real_points_curve(&x, &TwoPlane::coordinate(0, 1)).unwrap_err();
        assert!(matches!(err, Error::NotTotallyReal { .. }));
    }

    #[test]
    fn flat_loop_is_the_circle_of_complex_lines() {
        let x = riemann_sphere(&ComplexStructureJ::standard()).unwrap();
        let r = TwoPlane::coordinate(0, 2);
        let lp = real_points_curve(&x, &r).unwrap();
        assert!(lp.closed);
        let rp = plucker_of_plane(&r).unwrap();
        let j = ComplexStructureJ::standard();
        for (s, y) in lp.params.iter().zip(&lp.samples) {
            let p = x.point(s);
            assert_eq!(incidence_with_tol(&p, &rp, 1e-8), Incidence::MeetInLine);
            // the plane is span(v, Jv) for some v in r
            let plane = crate::grassmann::plane_of_plucker(&p).unwrap();
            let (e1, e3) = (nalgebra::Vector4::x(), nalgebra::Vector4::z());
            let v = (0..2000)
                .map(|k| {
                    let a = std::f64::consts::PI * k as f64 / 2000.0;
                    e1 * a.cos() + e3 * a.sin()
                })
                .min_by(|a, b| plane.distance_to_vector(a).total_cmp(&plane.distance_to_vector(b)))
                .unwrap();
            assert!(plane.distance_to_vector(&v) < 2e-3);
            assert!(plane.distance_to_vector(&(j.matrix() * v)) < 2e-3);
            assert!((y.norm() - 1.0).abs() < 1e-12);
        }
        // circumference of the unit circle x . (0,-1,0) = 0 in S2-: 2 pi
        let len: f64 = lp.samples.windows(2).map(|w| distance(&w[0], &w[1])).sum();
        assert!((len - 2.0 * std::f64::consts::PI).abs() < 0.05, "{len}");
    }
}
