//! Least-squares fit of the structure equations
//!
//! ```text
//! d theta = -alpha ^ theta - pi ^ omega + tau1 ^ conj(theta)
//! d omega = -beta ^ theta - gamma ^ omega - pi ^ sigma + tau2 ^ conj(theta)
//! d pi    = -delta ^ theta - eps ^ omega - (alpha - gamma) ^ pi + tau3 ^ conj(theta)
//! ```
//!
//! with `sigma = S1 conj(theta) + S2 conj(omega)` and
//! `tau_j = (T, U, V)_j2 conj(omega) + (T, U, V)_j3 conj(pi)`.
//! The five connection forms carry six complex coefficients each against
//! `e = (theta, omega, pi, conj theta, conj omega, conj pi)`, giving 38
//! unknowns for the 45 components of `(d theta, d omega, d pi)` in `e_a ^ e_b`.

use super::coframe::{slots_of, Coframe};
use crate::error::{Error, Result};
use crate::expr::Expr;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

const UNKNOWNS: usize = 38;
const PAIRS: usize = 15;
const RANK_EPS: f64 = 1e-12;

// connection forms occupy 6 slots each
const ALPHA: usize = 0;
const BETA: usize = 6;
const GAMMA: usize = 12;
const DELTA: usize = 18;
const EPS: usize = 24;
const S1: usize = 30;

/// Connection coefficients and torsion at one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFit {
    pub point: [f64; 6],
    /// `alpha, beta, gamma, delta, eps` against `e`.
    pub connection: [[C64; 6]; 5],
    pub s: [C64; 2],
    pub t: [C64; 2],
    pub u: [C64; 2],
    pub v: [C64; 2],
    pub residual: f64,
}

impl SampleFit {
    /// `[|S1|, |S2|, |T2|, |T3|, |U2|, |U3|, |V2|, |V3|]`.
    pub fn torsion_norms(&self) -> [f64; 8] {
        let all = [self.s, self.t, self.u, self.v];
        std::array::from_fn(|k| all[k / 2][k % 2].norm())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFit {
    pub samples: Vec<SampleFit>,
    pub residual: f64,
}

impl StructureFit {
    pub fn max_torsion(&self) -> [f64; 8] {
        let mut out = [0.0f64; 8];
        for s in &self.samples {
            for (o, v) in out.iter_mut().zip(s.torsion_norms()) {
                *o = o.max(v);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_z,im_z,re_w,im_w,re_p,im_p,residual,S1,S2,T2,T3,U2,U3,V2,V3\n");
        for s in &self.samples {
            let cols: Vec<String> = s
                .point
                .iter()
                .chain(std::iter::once(&s.residual))
                .chain(s.torsion_norms().iter())
                .map(|v| format!("{v:.12e}"))
                .collect();
            let _ = writeln!(out, "{}", cols.join(","));
        }
        out
    }
}

fn pair_index(a: usize, b: usize) -> usize {
    debug_assert!(a < b);
    // rows of the strict upper triangle of a 6 x 6 array
    a * (11 - a) / 2 + b - a - 1
}

struct System {
    a: DMatrix<C64>,
    b: DVector<C64>,
}

impl System {
    /// Adds `k * e_c ^ e_d` to equation block `form`, moving it to `a` (the
    /// coefficient of unknown `x`) or to the constant side.
    fn wedge(&mut self, form: usize, c: usize, d: usize, k: f64, x: Option<usize>) {
        if c == d {
            return;
        }
        let (lo, hi, sign) = if c < d { (c, d, k) } else { (d, c, -k) };
        let row = form * PAIRS + pair_index(lo, hi);
        match x {
            Some(j) => self.a[(row, j)] += C64::new(sign, 0.0),
            None => self.b[row] += C64::new(sign, 0.0),
        }
    }

    /// `k * phi ^ e_d` for the connection form starting at `start`.
    fn connection(&mut self, form: usize, start: usize, d: usize, k: f64) {
        for c in 0..6 {
            self.wedge(form, c, d, k, Some(start + c));
        }
    }
}

fn design() -> System {
    let mut s = System {
        a: DMatrix::zeros(3 * PAIRS, UNKNOWNS),
        b: DVector::zeros(3 * PAIRS),
    };
    let (th, om, pi, thb, omb, pib) = (0, 1, 2, 3, 4, 5);
    // d theta
    s.connection(0, ALPHA, th, -1.0);
    s.wedge(0, pi, om, -1.0, None);
    s.wedge(0, omb, thb, 1.0, Some(S1 + 2));
    s.wedge(0, pib, thb, 1.0, Some(S1 + 3));
    // d omega
    s.connection(1, BETA, th, -1.0);
    s.connection(1, GAMMA, om, -1.0);
    s.wedge(1, pi, thb, -1.0, Some(S1));
    s.wedge(1, pi, omb, -1.0, Some(S1 + 1));
    s.wedge(1, omb, thb, 1.0, Some(S1 + 4));
    s.wedge(1, pib, thb, 1.0, Some(S1 + 5));
    // d pi
    s.connection(2, DELTA, th, -1.0);
    s.connection(2, EPS, om, -1.0);
    s.connection(2, ALPHA, pi, -1.0);
    s.connection(2, GAMMA, pi, 1.0);
    s.wedge(2, omb, thb, 1.0, Some(S1 + 6));
    s.wedge(2, pib, thb, 1.0, Some(S1 + 7));
    s
}

/// Components of `d theta, d omega, d pi` against `e_a ^ e_b`, `a < b`.
fn exterior_derivatives(jac: &[[[Expr; 6]; 6]; 3], m: &DMatrix<C64>, x: &[C64; 6]) -> Option<DVector<C64>> {
    let n = m.clone().try_inverse()?;
    let mut out = DVector::zeros(3 * PAIRS);
    for (f, j) in jac.iter().enumerate() {
        // d(sum a_r dx_r) = sum_{s, r} d_s a_r dx_s ^ dx_r
        let da = DMatrix::from_fn(6, 6, |s, r| j[s][r].eval(x));
        let c = &da - da.transpose();
        // dx = N e, so C in the e basis is N^T C N
        let ce = n.transpose() * c * &n;
        for a in 0..6 {
            for b in a + 1..6 {
                out[f * PAIRS + pair_index(a, b)] = ce[(a, b)];
            }
        }
    }
    Some(out)
}

pub fn structure_fit(cf: &Coframe, samples: &[[f64; 6]]) -> Result<StructureFit> {
    let jac = cf.forms().map(|f| f.jacobian());
    let base = design();
    let svd = base.a.clone().svd(true, true);
    let fits: Result<Vec<SampleFit>> = samples
        .par_iter()
        .map(|pt| {
            let x = slots_of(pt);
            let m = cf.matrix(&x);
            if !(m.determinant().norm() > super::coframe::DEGENERATE_TOL) {
                return Err(Error::Degenerate { sample: *pt });
            }
            let d = exterior_derivatives(&jac, &m, &x).ok_or(Error::Degenerate { sample: *pt })?;
            let rhs = d - &base.b;
            let sol = svd.solve(&rhs, RANK_EPS).map_err(|e| Error::Invalid(e.to_string()))?;
            let residual = (&base.a * &sol - &rhs).norm();
            let connection = std::array::from_fn(|k| std::array::from_fn(|c| sol[6 * k + c]));
            let g = |k: usize| [sol[S1 + 2 * k], sol[S1 + 2 * k + 1]];
            Ok(SampleFit {
                point: *pt,
                connection,
                s: g(0),
                t: g(1),
                u: g(2),
                v: g(3),
                residual,
            })
        })
        .collect();
    let samples = fits?;
    let residual = samples.iter().map(|s| s.residual).fold(0.0, crate::nan_max);
    Ok(StructureFit { samples, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indices_cover_the_triangle() {
        let mut seen = vec![false; PAIRS];
        for a in 0..6 {
            for b in a + 1..6 {
                let k = pair_index(a, b);
                assert!(!seen[k]);
                seen[k] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn flat_coframe_fits_with_zero_torsion() {
        let fit = structure_fit(&super::super::coframe::flat_coframe(), &[[0.1, -0.2, 0.3, 0.0, 0.25, 0.5]]).unwrap();
        assert!(fit.residual < 1e-12, "{}", fit.residual);
        assert!(fit.max_torsion().iter().all(|&t| t < 1e-12));
    }
}
