//! Complex coframes `(theta, omega, pi)` on the six real chart coordinates
//! `(Re z, Im z, Re w, Im w, Re p, Im p)`.

use crate::chart::ChartPoint;
use crate::error::{Error, Result};
use crate::expr::Expr;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const CONSTRAINT_TOL: f64 = 1e-8;
pub const DEGENERATE_TOL: f64 = 1e-12;
pub const SAMPLES: usize = 100;
const SAMPLE_SEED: u64 = 0x5eed_c4f0;

/// A complex 1-form with coefficients on `dx_r`, `r` running over the real
/// chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneForm {
    pub coef: [Expr; 6],
}

impl OneForm {
    /// From coefficients on `(dz, dzbar, dw, dwbar, dp, dpbar)`.
    pub fn from_complex(c: [Expr; 6]) -> Self {
        let i = Expr::c(C64::i());
        let coef = std::array::from_fn(|r| {
            let (a, b) = (c[2 * (r / 2)].clone(), c[2 * (r / 2) + 1].clone());
            if r % 2 == 0 {
                a + b
            } else {
                i.clone() * (a - b)
            }
        });
        OneForm { coef }
    }

    pub fn conj(&self) -> Self {
        OneForm {
            coef: self.coef.clone().map(Expr::conj),
        }
    }

    pub fn scale(&self, k: Expr) -> Self {
        OneForm {
            coef: self.coef.clone().map(|c| k.clone() * c),
        }
    }

    pub fn eval(&self, x: &[C64; 6]) -> [C64; 6] {
        std::array::from_fn(|r| self.coef[r].eval(x))
    }

    /// `J[s][r] = d coef_r / d x_s` as expressions.
    pub fn jacobian(&self) -> [[Expr; 6]; 6] {
        std::array::from_fn(|s| std::array::from_fn(|r| self.coef[r].diff_real(s)))
    }
}

pub fn slots_of(coords: &[f64; 6]) -> [C64; 6] {
    let z = C64::new(coords[0], coords[1]);
    let w = C64::new(coords[2], coords[3]);
    let p = C64::new(coords[4], coords[5]);
    [z, z.conj(), w, w.conj(), p, p.conj()]
}

pub fn coords_of(pt: &ChartPoint) -> [f64; 6] {
    [pt.z.re, pt.z.im, pt.w.re, pt.w.im, pt.p.re, pt.p.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coframe {
    pub theta: OneForm,
    pub omega: OneForm,
    pub pi: OneForm,
}

impl Coframe {
    pub fn forms(&self) -> [&OneForm; 3] {
        [&self.theta, &self.omega, &self.pi]
    }

    /// Rows `theta, omega, pi, conj theta, conj omega, conj pi` against `dx_r`.
    pub fn matrix(&self, x: &[C64; 6]) -> DMatrix<C64> {
        let rows: Vec<[C64; 6]> = self
            .forms()
            .iter()
            .map(|f| f.eval(x))
            .collect();
        DMatrix::from_fn(6, 6, |a, r| if a < 3 { rows[a][r] } else { rows[a - 3][r].conj() })
    }

    /// `theta ^ conj theta ^ omega ^ conj omega ^ pi ^ conj pi` up to a fixed
    /// nonzero constant and sign.
    pub fn volume(&self, x: &[C64; 6]) -> C64 {
        self.matrix(x).determinant()
    }

    pub fn check_nondegenerate(&self, samples: &[[f64; 6]]) -> Result<()> {
        for s in samples {
            if !(self.volume(&slots_of(s)).norm() > DEGENERATE_TOL) {
                return Err(Error::Degenerate { sample: *s });
            }
        }
        Ok(())
    }

    /// `(theta, pi, -omega)`.
    pub fn swapped(&self) -> Coframe {
        Coframe {
            theta: self.theta.clone(),
            omega: self.pi.clone(),
            pi: self.omega.scale(Expr::re(-1.0)),
        }
    }
}

fn dslot(k: usize) -> [Expr; 6] {
    std::array::from_fn(|j| if j == k { Expr::one() } else { Expr::zero() })
}

/// `dw - p dz`, `dz`, `dp`.
pub fn flat_coframe() -> Coframe {
    let mut th = dslot(2);
    th[0] = -Expr::p();
    Coframe {
        theta: OneForm::from_complex(th),
        omega: OneForm::from_complex(dslot(0)),
        pi: OneForm::from_complex(dslot(4)),
    }
}

fn one_minus_pp() -> Expr {
    Expr::one() - Expr::p() * Expr::pbar()
}

/// `F_pbar + conj(F) F_zbar + wbar / D F_w + p wbar / D F_wbar`, `D = 1 - |p|^2`.
pub fn case4_constraint(f: &Expr) -> Expr {
    let d = one_minus_pp();
    let c = Expr::wbar() / d;
    Expr::sum([
        f.diff(5),
        f.clone().conj() * f.diff(1),
        c.clone() * f.diff(2),
        Expr::p() * c * f.diff(3),
    ])
}

/// Seeded points with `|z|, |w| < 1` and `|p| < 0.9`.
pub fn case4_samples(n: usize, seed: u64) -> Vec<[f64; 6]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disk = |r: f64| C64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    (0..n)
        .map(|_| {
            let (z, w, p) = (disk(1.0), disk(1.0), disk(0.9));
            [z.re, z.im, w.re, w.im, p.re, p.im]
        })
        .collect()
}

/// `theta = dw - (w pbar / D - z) dp - wbar / D dpbar`, `omega = dz - F dp`,
/// `pi = dp`, checked against the constraint and for nondegeneracy at
/// seeded samples.
pub fn case4_coframe(f: &Expr) -> Result<Coframe> {
    case4_coframe_at(f, &case4_samples(SAMPLES, SAMPLE_SEED))
}

pub fn case4_coframe_at(f: &Expr, samples: &[[f64; 6]]) -> Result<Coframe> {
    let cons = case4_constraint(f);
    let worst = samples
        .iter()
        .map(|s| (s, cons.eval(&slots_of(s)).norm()))
        .fold(None, |acc: Option<(&[f64; 6], f64)>, (s, r)| match acc {
            Some((_, best)) if !(r > best) && !r.is_nan() => acc,
            _ => Some((s, r)),
        });
    if let Some((s, r)) = worst {
        if !(r < CONSTRAINT_TOL) {
            return Err(Error::ConstraintViolated { sample: *s, residual: r });
        }
    }
    let d = one_minus_pp();
    let mut th = dslot(2);
    th[4] = Expr::z() - Expr::w() * Expr::pbar() / d.clone();
    th[5] = -(Expr::wbar() / d);
    let mut om = dslot(0);
    om[4] = -f.clone();
    let cf = Coframe {
        theta: OneForm::from_complex(th),
        omega: OneForm::from_complex(om),
        pi: OneForm::from_complex(dslot(4)),
    };
    cf.check_nondegenerate(samples)?;
    Ok(cf)
}

/// The case-(3) (1,0) forms `dW - (W Zbar / D + P) dZ - Wbar / D dZbar`,
/// `dZ`, `dP` pulled back through `(W, Z, P) = (w, p, -z)`.
pub fn case3_forms_pulled_back() -> [OneForm; 3] {
    let d = one_minus_pp();
    let mut th = dslot(2);
    // P -> -z, so -(W Zbar / D + P) dZ -> -(w pbar / D - z) dp
    th[4] = -(Expr::w() * Expr::pbar() / d.clone() - Expr::z());
    th[5] = -(Expr::wbar() / d);
    let mut dp = dslot(0);
    dp[0] = Expr::re(-1.0);
    [OneForm::from_complex(th), OneForm::from_complex(dslot(4)), OneForm::from_complex(dp)]
}

/// Largest distance, over seeded samples, from a pulled-back case-(3) form to
/// the complex span of the swapped case-(4) coframe `(theta, pi, -omega)`.
pub fn duality_check(f: &Expr) -> Result<f64> {
    duality_check_at(f, &case4_samples(SAMPLES, SAMPLE_SEED))
}

pub fn duality_check_at(f: &Expr, samples: &[[f64; 6]]) -> Result<f64> {
    let cf = case4_coframe_at(f, samples)?.swapped();
    let pulled = case3_forms_pulled_back();
    let mut worst = 0.0f64;
    for s in samples {
        let x = slots_of(s);
        let basis: Vec<[C64; 6]> = cf.forms().iter().map(|g| g.eval(&x)).collect();
        let a = DMatrix::from_fn(6, 3, |r, j| basis[j][r]);
        let svd = a.clone().svd(true, true);
        for g in &pulled {
            let b = DVector::from_column_slice(&g.eval(&x));
            let sol = svd.solve(&b, 1e-14).map_err(|e| Error::Invalid(e.to_string()))?;
            worst = worst.max((&a * sol - &b).norm());
        }
    }
    Ok(worst)
}
