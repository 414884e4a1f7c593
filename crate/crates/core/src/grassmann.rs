//! Oriented 2-planes in R^4: Plücker/Klein coordinates on `S2+ x S2-`, the
//! split-signature conformal form on tangent vectors, and incidence tests.
//!
//! Two-vectors are stored as six coefficients in the fixed Klein order
//! `dx12, dx34, dx31, dx24, dx23, dx14`. A two-vector `gamma` has Klein
//! coordinates `X_i = (c_a + c_b) / 2`, `Y_i = (c_a - c_b) / 2` where `(a, b)`
//! runs over the pairs `(12, 34)`, `(31, 24)`, `(23, 14)`; then
//! `gamma ^ gamma = 2 (|X|^2 - |Y|^2) dx1234`.

use crate::error::{Error, Result};
use crate::sphere::Vec3;
use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

pub type Vec4 = Vector4<f64>;

/// Index pairs `(i, j)` of the Klein basis, zero based, in storage order.
pub const KLEIN_PAIRS: [(usize, usize); 6] = [(0, 1), (2, 3), (2, 0), (1, 3), (1, 2), (0, 3)];

/// Tolerance on the 2-vector norm (relative to `|u||v|`) below which a basis is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Principal-angle tolerance for plane equality.
pub const PLANE_EQ_TOL: f64 = 1e-8;
/// Tolerance on `|X| = |Y| = 1`.
pub const QUADRIC_TOL: f64 = 1e-9;

/// Coefficients of `u ^ v` in the Klein basis.
pub fn wedge(u: &Vec4, v: &Vec4) -> [f64; 6] {
    KLEIN_PAIRS.map(|(i, j)| u[i] * v[j] - u[j] * v[i])
}

/// Coefficient of `dx1234` in `a ^ b` for two 2-vectors.
pub fn wedge_top(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a[0] * b[1] + a[1] * b[0] + a[2] * b[3] + a[3] * b[2] + a[4] * b[5] + a[5] * b[4]
}

/// Split a 2-vector into (unnormalized) self-dual and anti-self-dual parts.
pub fn klein_split(c: &[f64; 6]) -> (Vec3, Vec3) {
    (
        Vec3::new(c[0] + c[1], c[2] + c[3], c[4] + c[5]) * 0.5,
        Vec3::new(c[0] - c[1], c[2] - c[3], c[4] - c[5]) * 0.5,
    )
}

/// Reassemble a 2-vector from Klein coordinates.
pub fn klein_join(x: &Vec3, y: &Vec3) -> [f64; 6] {
    [
        x[0] + y[0],
        x[0] - y[0],
        x[1] + y[1],
        x[1] - y[1],
        x[2] + y[2],
        x[2] - y[2],
    ]
}

/// An oriented 2-plane given by an ordered basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlaneJson", into = "PlaneJson")]
pub struct TwoPlane {
    u: Vec4,
    v: Vec4,
}

#[derive(Serialize, Deserialize)]
struct PlaneJson {
    basis: [[f64; 4]; 2],
}

impl TryFrom<PlaneJson> for TwoPlane {
    type Error = Error;
    fn try_from(j: PlaneJson) -> Result<Self> {
        TwoPlane::new(Vec4::from(j.basis[0]), Vec4::from(j.basis[1]))
    }
}

impl From<TwoPlane> for PlaneJson {
    fn from(p: TwoPlane) -> Self {
        PlaneJson {
            basis: [p.u.into(), p.v.into()],
        }
    }
}

impl TwoPlane {
    pub fn new(u: Vec4, v: Vec4) -> Result<Self> {
        let c = wedge(&u, &v);
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = (u.norm() * v.norm()).max(f64::MIN_POSITIVE);
        if !(norm / scale > DEGENERACY_TOL) {
            return Err(Error::DegenerateBasis { norm });
        }
        Ok(TwoPlane { u, v })
    }

    /// Plane spanned by two coordinate axes, zero based.
    pub fn coordinate(i: usize, j: usize) -> Self {
        TwoPlane {
            u: Vec4::ith(i, 1.0),
            v: Vec4::ith(j, 1.0),
        }
    }

    pub fn basis(&self) -> (Vec4, Vec4) {
        (self.u, self.v)
    }

    pub fn bivector(&self) -> [f64; 6] {
        wedge(&self.u, &self.v)
    }

    /// Orientation-preserving Gram–Schmidt basis.
    pub fn orthonormal_basis(&self) -> (Vec4, Vec4) {
        let a = self.u.normalize();
        let b = (self.v - a * a.dot(&self.v)).normalize();
        (a, b)
    }

    /// Orthonormal basis `(n1, n2)` of the orthogonal complement such that
    /// `(a, b, n1, n2)` is positively oriented.
    pub fn complement_basis(&self) -> (Vec4, Vec4) {
        let (a, b) = self.orthonormal_basis();
        let mut ns: Vec<Vec4> = Vec::with_capacity(2);
        for k in 0..4 {
            let mut e = Vec4::ith(k, 1.0);
            e -= a * a.dot(&e) + b * b.dot(&e);
            for n in &ns {
                e -= n * n.dot(&e);
            }
            if e.norm() > 0.3 {
                ns.push(e.normalize());
                if ns.len() == 2 {
                    break;
                }
            }
        }
        let (n1, mut n2) = (ns[0], ns[1]);
        let frame = Matrix4::from_columns(&[a, b, n1, n2]);
        if frame.determinant() < 0.0 {
            n2 = -n2;
        }
        (n1, n2)
    }

    pub fn reversed(&self) -> Self {
        TwoPlane {
            u: self.v,
            v: self.u,
        }
    }

    /// Image under a linear map (must be invertible).
    pub fn transform(&self, g: &Matrix4<f64>) -> Result<Self> {
        TwoPlane::new(g * self.u, g * self.v)
    }

    /// Distance of `w / |w|` from the plane.
    pub fn distance_to_vector(&self, w: &Vec4) -> f64 {
        let (a, b) = self.orthonormal_basis();
        let wn = w.normalize();
        (wn - a * a.dot(&wn) - b * b.dot(&wn)).norm()
    }

    /// Sine of the largest principal angle and the orientation agreement.
    pub fn compare(&self, other: &TwoPlane) -> (f64, bool) {
        let (a0, b0) = self.orthonormal_basis();
        let (a1, b1) = other.orthonormal_basis();
        let m = Matrix2::new(a0.dot(&a1), a0.dot(&b1), b0.dot(&a1), b0.dot(&b1));
        let r0 = a1 - a0 * m[(0, 0)] - b0 * m[(1, 0)];
        let r1 = b1 - a0 * m[(0, 1)] - b0 * m[(1, 1)];
        // largest singular value of the 4x2 residual [r0 r1]
        let g = Matrix2::new(r0.dot(&r0), r0.dot(&r1), r1.dot(&r0), r1.dot(&r1));
        let tr = g.trace();
        let disc = ((g[(0, 0)] - g[(1, 1)]).powi(2) + 4.0 * g[(0, 1)].powi(2)).sqrt();
        let sin_max = (0.5 * (tr + disc)).max(0.0).sqrt();
        (sin_max, m.determinant() > 0.0)
    }

    /// Oriented plane equality up to [`PLANE_EQ_TOL`] in principal angle.
    pub fn equivalent(&self, other: &TwoPlane) -> bool {
        let (s, same_orientation) = self.compare(other);
        s < PLANE_EQ_TOL && same_orientation
    }
}

/// A point of `Gr+(2,4) = S2+ x S2-`, normalized so that `|X| = |Y| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PluckerJson", into = "PluckerJson")]
pub struct PluckerPoint {
    pub x: Vec3,
    pub y: Vec3,
}

#[derive(Serialize, Deserialize)]
struct PluckerJson {
    #[serde(rename = "X")]
    x: [f64; 3],
    #[serde(rename = "Y")]
    y: [f64; 3],
}

impl TryFrom<PluckerJson> for PluckerPoint {
    type Error = Error;
    fn try_from(j: PluckerJson) -> Result<Self> {
        PluckerPoint::new(Vec3::from(j.x), Vec3::from(j.y))
    }
}

impl From<PluckerPoint> for PluckerJson {
    fn from(p: PluckerPoint) -> Self {
        PluckerJson {
            x: p.x.into(),
            y: p.y.into(),
        }
    }
}

impl PluckerPoint {
    pub fn new(x: Vec3, y: Vec3) -> Result<Self> {
        let (xn, yn) = (x.norm(), y.norm());
        if (xn - 1.0).abs() > QUADRIC_TOL || (yn - 1.0).abs() > QUADRIC_TOL {
            return Err(Error::NotOnQuadric {
                x_norm: xn,
                y_norm: yn,
            });
        }
        Ok(PluckerPoint { x, y })
    }

    /// Construct without the quadric check; both parts are renormalized.
    pub fn from_unit_parts(x: Vec3, y: Vec3) -> Self {
        PluckerPoint {
            x: x.normalize(),
            y: y.normalize(),
        }
    }

    /// Normalize an arbitrary decomposable 2-vector.
    pub fn from_bivector(c: &[f64; 6]) -> Result<Self> {
        let (x, y) = klein_split(c);
        let scale = (0.5 * (x.norm_squared() + y.norm_squared())).sqrt();
        if !(scale > 0.0) {
            return Err(Error::DegenerateBasis { norm: scale });
        }
        Ok(PluckerPoint {
            x: x.normalize(),
            y: y.normalize(),
        })
    }

    /// Representative 2-vector with `|X| = |Y| = 1`.
    pub fn bivector(&self) -> [f64; 6] {
        klein_join(&self.x, &self.y)
    }

    pub fn antipode(&self) -> Self {
        PluckerPoint {
            x: -self.x,
            y: -self.y,
        }
    }

    /// Euclidean distance in `R^3 x R^3`.
    pub fn distance(&self, other: &PluckerPoint) -> f64 {
        ((self.x - other.x).norm_squared() + (self.y - other.y).norm_squared()).sqrt()
    }
}

pub fn plucker_of_plane(plane: &TwoPlane) -> Result<PluckerPoint> {
    PluckerPoint::from_bivector(&plane.bivector())
}

/// Oriented plane whose Plücker point is `point`.
pub fn plane_of_plucker(point: &PluckerPoint) -> Result<TwoPlane> {
    let (xn, yn) = (point.x.norm(), point.y.norm());
    if (xn - 1.0).abs() > QUADRIC_TOL || (yn - 1.0).abs() > QUADRIC_TOL {
        return Err(Error::NotOnQuadric {
            x_norm: xn,
            y_norm: yn,
        });
    }
    let c = point.bivector();
    let mut a = Matrix4::<f64>::zeros();
    for (k, &(i, j)) in KLEIN_PAIRS.iter().enumerate() {
        a[(i, j)] = c[k];
        a[(j, i)] = -c[k];
    }
    // the column space of the antisymmetric matrix u v^T - v u^T is span(u, v)
    let svd = a.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut idx: Vec<usize> = (0..4).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let e0: Vec4 = u.column(idx[0]).into();
    let mut e1: Vec4 = u.column(idx[1]).into();
    if wedge_top_sign(&wedge(&e0, &e1), &c) < 0.0 {
        e1 = -e1;
    }
    TwoPlane::new(e0, e1)
}

fn wedge_top_sign(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A tangent vector to the Grassmannian, as a linear map `P -> V/P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentMatrix(pub Matrix2<f64>);

/// The conformal quadratic form: the determinant.
pub fn quad_form(m: &TangentMatrix) -> f64 {
    m.0.determinant()
}

/// Symmetric bilinear form with `bilinear(a, a) = 2 quad_form(a)`.
pub fn bilinear(a: &TangentMatrix, b: &TangentMatrix) -> f64 {
    let (a, b) = (&a.0, &b.0);
    a[(0, 0)] * b[(1, 1)] + b[(0, 0)] * a[(1, 1)] - a[(0, 1)] * b[(1, 0)] - b[(0, 1)] * a[(1, 0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Incidence {
    Transverse,
    MeetInLine,
    SamePlane,
}

/// Default tolerance of [`incidence`].
pub const INCIDENCE_TOL: f64 = 1e-9;

pub fn incidence(p0: &PluckerPoint, p1: &PluckerPoint) -> Incidence {
    incidence_with_tol(p0, p1, INCIDENCE_TOL)
}

pub fn incidence_with_tol(p0: &PluckerPoint, p1: &PluckerPoint, tol: f64) -> Incidence {
    if p0.distance(p1) < tol || p0.distance(&p1.antipode()) < tol {
        return Incidence::SamePlane;
    }
    if (p0.x.dot(&p1.x) - p0.y.dot(&p1.y)).abs() < tol {
        Incidence::MeetInLine
    } else {
        Incidence::Transverse
    }
}

/// `dim(P0 ∩ P1)` computed from the singular values of the stacked bases.
pub fn intersection_dimension(p0: &TwoPlane, p1: &TwoPlane, tol: f64) -> usize {
    let (a0, b0) = p0.orthonormal_basis();
    let (a1, b1) = p1.orthonormal_basis();
    let m = Matrix4::from_columns(&[a0, b0, a1, b1]);
    let rank = m.singular_values().iter().filter(|&&s| s > tol).count();
    4 - rank
}

/// A constant-coefficient 2-form in the Klein basis, evaluated on oriented planes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoForm(pub [f64; 6]);

impl TwoForm {
    /// Self-dual form `W1(dx12 + dx34) + W2(dx31 + dx24) + W3(dx23 + dx14)`.
    pub fn self_dual(w: &Vec3) -> Self {
        TwoForm([w[0], w[0], w[1], w[1], w[2], w[2]])
    }

    /// Value on an orthonormal oriented basis of the plane.
    pub fn evaluate(&self, plane: &TwoPlane) -> f64 {
        let (a, b) = plane.orthonormal_basis();
        let c = wedge(&a, &b);
        self.0.iter().zip(&c).map(|(w, x)| w * x).sum()
    }

    /// Value on the unit-area plane with the given Plücker point.
    pub fn evaluate_plucker(&self, p: &PluckerPoint) -> f64 {
        let c = p.bivector();
        // the normalized representative is twice the unit bivector
        self.0.iter().zip(&c).map(|(w, x)| w * x).sum::<f64>() / 2.0
    }

    pub fn combine(&self, a: f64, other: &TwoForm, b: f64) -> TwoForm {
        let mut out = [0.0; 6];
        for k in 0..6 {
            out[k] = a * self.0[k] + b * other.0[k];
        }
        TwoForm(out)
    }
}
