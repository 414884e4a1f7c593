//! Elliptic line congruences, stored as parametrized surfaces in
//! `S2+ x S2-` over a parameter sphere.
//!
//! Most congruences are graphs `X = psi(Y)` and use `Y` itself as the
//! parameter. Images of a graph under a linear map (Riemann spheres of
//! conjugated complex structures, for example) keep the parameter of the
//! source surface, so sampling never needs to invert the graph.

mod osculate;
mod real_points;
mod taming;

pub use osculate::{
    osculating_at_param, osculating_structure, pencil_grid_scan, pencil_isometry, plane_through_vector,
    oriented_frame, tangent_matrices_in, Osculating, VectorPlane,
};
pub use real_points::{real_points_curve, sign_change_points, RealPointLoop};
pub use taming::{deform, is_tamed, taming_form, taming_two_form};

use crate::error::{Error, Result};
use crate::grassmann::{plane_of_plucker, plucker_of_plane, PluckerPoint, TwoPlane};
use crate::sphere::{exp_map, log_map, tangent_frame, Icosphere, Vec3};
use nalgebra::{Matrix2, Matrix4};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Geodesic step for central-difference derivatives on the parameter sphere.
pub const FD_STEP: f64 = 1e-4;
/// Default icosphere subdivision used for sampling.
pub const SAMPLE_LEVEL: u32 = 4;

type ParamMap = Arc<dyn Fn(&Vec3) -> PluckerPoint + Send + Sync>;

/// Spherical cap `{s : s . center >= cos_radius}` on the parameter sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: Vec3,
    pub cos_radius: f64,
}

impl Cap {
    pub fn contains(&self, s: &Vec3) -> bool {
        s.dot(&self.center) >= self.cos_radius
    }
}

#[derive(Clone)]
pub struct LineCongruence {
    map: ParamMap,
    graph_param: bool,
    constant: Option<Vec3>,
    domain: Option<Cap>,
    label: String,
}

impl std::fmt::Debug for LineCongruence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LineCongruence")
            .field("label", &self.label)
            .field("graph_param", &self.graph_param)
            .field("constant", &self.constant)
            .field("domain", &self.domain)
            .finish()
    }
}

/// One sampled plane of a congruence.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub param: Vec3,
    pub point: PluckerPoint,
    /// Area weight on the parameter sphere.
    pub weight: f64,
}

impl LineCongruence {
    /// The constant graph `psi == x0`.
    pub fn constant(x0: Vec3) -> Self {
        let x0 = x0.normalize();
        LineCongruence {
            map: Arc::new(move |s: &Vec3| PluckerPoint {
                x: x0,
                y: *s,
            }),
            graph_param: true,
            constant: Some(x0),
            domain: None,
            label: "constant".into(),
        }
    }

    /// Graph of `psi: S2- -> S2+`; the result of `psi` is renormalized.
    pub fn graph<F>(label: &str, psi: F) -> Self
    where
        F: Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    {
        LineCongruence {
            map: Arc::new(move |s: &Vec3| PluckerPoint {
                x: psi(s).normalize(),
                y: *s,
            }),
            graph_param: true,
            constant: None,
            domain: None,
            label: label.into(),
        }
    }

    /// Surface given by an arbitrary parametrization of the sphere.
    pub fn parametrized<F>(label: &str, map: F) -> Self
    where
        F: Fn(&Vec3) -> PluckerPoint + Send + Sync + 'static,
    {
        LineCongruence {
            map: Arc::new(map),
            graph_param: false,
            constant: None,
            domain: None,
            label: label.into(),
        }
    }

    /// Restrict sampling to a cap of the parameter sphere.
    pub fn with_domain(mut self, cap: Cap) -> Self {
        self.domain = Some(cap);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Option<Cap> {
        self.domain
    }

    pub fn is_compact(&self) -> bool {
        self.domain.is_none()
    }

    pub fn constant_value(&self) -> Option<Vec3> {
        self.constant
    }

    /// Whether `Y(s) = s` for every parameter.
    pub fn is_graph_parametrized(&self) -> bool {
        self.graph_param
    }

    /// Plücker point at parameter `s`.
    pub fn point(&self, s: &Vec3) -> PluckerPoint {
        (self.map)(s)
    }

    pub fn plane(&self, s: &Vec3) -> Result<TwoPlane> {
        plane_of_plucker(&self.point(s))
    }

    /// Image of every plane under `g`; keeps the parametrization.
    pub fn transformed(&self, g: &Matrix4<f64>, label: &str) -> Result<Self> {
        if !(g.determinant().abs() > 1e-12) {
            return Err(Error::Invalid("transformation is singular".into()));
        }
        let inner = self.map.clone();
        let g = *g;
        Ok(LineCongruence {
            map: Arc::new(move |s: &Vec3| {
                let p = inner(s);
                let plane = plane_of_plucker(&p).expect("surface points lie on the quadric");
                let image = plane.transform(&g).expect("invertible map keeps planes");
                plucker_of_plane(&image).expect("nondegenerate image")
            }),
            graph_param: false,
            constant: None,
            domain: self.domain,
            label: label.into(),
        })
    }

    /// Replace `X` by `f(X)` pointwise, keeping `Y` and the parametrization.
    pub fn map_x<F>(&self, label: &str, f: F) -> Self
    where
        F: Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    {
        let inner = self.map.clone();
        LineCongruence {
            map: Arc::new(move |s: &Vec3| {
                let p = inner(s);
                PluckerPoint {
                    x: f(&p.x).normalize(),
                    y: p.y,
                }
            }),
            graph_param: self.graph_param,
            constant: None,
            domain: self.domain,
            label: label.into(),
        }
    }

    pub(crate) fn mark_constant(mut self, x0: Vec3) -> Self {
        self.constant = Some(x0);
        self
    }

    /// Parameter `s` with `Y(s) = y`, by Newton iteration on the sphere.
    pub fn param_of_y(&self, y: &Vec3) -> Result<Vec3> {
        let y = y.normalize();
        if self.graph_param {
            return Ok(y);
        }
        let mut s = self.initial_param_guess(&y);
        let mut res = (self.point(&s).y - y).norm();
        for _ in 0..60 {
            if res < 1e-14 {
                return Ok(s);
            }
            let (e1, e2) = tangent_frame(&s);
            let d1 = self.central_y(&s, &e1);
            let d2 = self.central_y(&s, &e2);
            let r = y - self.point(&s).y;
            let m = Matrix2::new(d1.dot(&d1), d1.dot(&d2), d2.dot(&d1), d2.dot(&d2));
            let rhs = nalgebra::Vector2::new(d1.dot(&r), d2.dot(&r));
            let delta = m
                .try_inverse()
                .ok_or(Error::NoConvergence { residual: res })?
                * rhs;
            let next = exp_map(&s, &(e1 * delta[0] + e2 * delta[1]));
            let next_res = (self.point(&next).y - y).norm();
            if next_res >= res && res < 1e-11 {
                return Ok(s);
            }
            s = next;
            res = next_res;
        }
        if res < 1e-10 {
            Ok(s)
        } else {
            Err(Error::NoConvergence { residual: res })
        }
    }

    fn initial_param_guess(&self, y: &Vec3) -> Vec3 {
        let ico = Icosphere::new(3);
        ico.vertices
            .iter()
            .min_by(|a, b| {
                let da = (self.point(a).y - y).norm();
                let db = (self.point(b).y - y).norm();
                da.total_cmp(&db)
            })
            .copied()
            .unwrap_or(*y)
    }

    fn central_y(&self, s: &Vec3, e: &Vec3) -> Vec3 {
        let h = FD_STEP;
        (self.point(&exp_map(s, &(e * h))).y - self.point(&exp_map(s, &(-e * h))).y) / (2.0 * h)
    }

    /// Plücker point over `y`.
    pub fn plane_at(&self, y: &Vec3) -> Result<PluckerPoint> {
        Ok(self.point(&self.param_of_y(y)?))
    }

    /// `psi(y)`.
    pub fn graph_value(&self, y: &Vec3) -> Result<Vec3> {
        Ok(self.plane_at(y)?.x)
    }

    /// Derivatives `(DX, DY)` at parameter `s` in the tangent frames of
    /// `X(s)`, `Y(s)` and `s`.
    pub fn differentials(&self, s: &Vec3) -> (Matrix2<f64>, Matrix2<f64>, PluckerPoint) {
        let p = self.point(s);
        if let Some(_) = self.constant {
            if self.graph_param {
                return (Matrix2::zeros(), Matrix2::identity(), p);
            }
        }
        let (e1, e2) = tangent_frame(s);
        let h = FD_STEP;
        let mut dx = [Vec3::zeros(); 2];
        let mut dy = [Vec3::zeros(); 2];
        for (k, e) in [e1, e2].iter().enumerate() {
            let a = self.point(&exp_map(s, &(e * h)));
            let b = self.point(&exp_map(s, &(-e * h)));
            dx[k] = (a.x - b.x) / (2.0 * h);
            dy[k] = (a.y - b.y) / (2.0 * h);
        }
        let (fx1, fx2) = tangent_frame(&p.x);
        let (fy1, fy2) = tangent_frame(&p.y);
        let mx = Matrix2::new(
            fx1.dot(&dx[0]),
            fx1.dot(&dx[1]),
            fx2.dot(&dx[0]),
            fx2.dot(&dx[1]),
        );
        let my = Matrix2::new(
            fy1.dot(&dy[0]),
            fy1.dot(&dy[1]),
            fy2.dot(&dy[0]),
            fy2.dot(&dy[1]),
        );
        (mx, my, p)
    }

    /// Jacobian of the graph map `psi` at parameter `s` in orthonormal frames.
    pub fn graph_jacobian(&self, s: &Vec3) -> Result<Matrix2<f64>> {
        let (mx, my, _) = self.differentials(s);
        let inv = my.try_inverse().ok_or(Error::NotGraph)?;
        Ok(mx * inv)
    }

    /// Parameter samples (inside the domain, if any) with area weights.
    pub fn samples(&self, level: u32) -> Vec<Sample> {
        let ico = Icosphere::new(level);
        ico.vertices
            .par_iter()
            .zip(ico.weights.par_iter())
            .filter(|(s, _)| self.domain.map_or(true, |c| c.contains(s)))
            .map(|(s, w)| Sample {
                param: *s,
                point: self.point(s),
                weight: *w,
            })
            .collect()
    }
}

/// Largest singular value of a 2x2 matrix.
pub fn operator_norm(m: &Matrix2<f64>) -> f64 {
    let g = m.transpose() * m;
    let tr = g.trace();
    let disc = ((g[(0, 0)] - g[(1, 1)]).powi(2) + 4.0 * g[(0, 1)] * g[(1, 0)]).max(0.0).sqrt();
    (0.5 * (tr + disc)).max(0.0).sqrt()
}

/// `(elliptic, margin)` with `margin = 1 - max |D psi|` over the default samples.
pub fn is_elliptic(x: &LineCongruence) -> (bool, f64) {
    is_elliptic_at_level(x, SAMPLE_LEVEL)
}

pub fn is_elliptic_at_level(x: &LineCongruence, level: u32) -> (bool, f64) {
    if x.constant.is_some() && x.graph_param {
        return (true, 1.0);
    }
    let ico = Icosphere::new(level);
    let worst = ico
        .vertices
        .par_iter()
        .filter(|s| x.domain.map_or(true, |c| c.contains(s)))
        .map(|s| match x.graph_jacobian(s) {
            Ok(j) => operator_norm(&j),
            Err(_) => f64::INFINITY,
        })
        .reduce(|| 0.0, crate::nan_max);
    let margin = 1.0 - worst;
    (margin > 0.0, margin)
}

/// A linear complex structure on `R^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 4]; 4]", into = "[[f64; 4]; 4]")]
pub struct ComplexStructureJ {
    j: Matrix4<f64>,
}

impl TryFrom<[[f64; 4]; 4]> for ComplexStructureJ {
    type Error = Error;
    fn try_from(rows: [[f64; 4]; 4]) -> Result<Self> {
        ComplexStructureJ::new(Matrix4::from_fn(|i, k| rows[i][k]))
    }
}

impl From<ComplexStructureJ> for [[f64; 4]; 4] {
    fn from(j: ComplexStructureJ) -> Self {
        std::array::from_fn(|i| std::array::from_fn(|k| j.j[(i, k)]))
    }
}

impl ComplexStructureJ {
    pub fn new(j: Matrix4<f64>) -> Result<Self> {
        let deviation = (j * j + Matrix4::identity()).abs().max();
        if !(deviation <= 1e-10 * (1.0 + j.abs().max().powi(2))) {
            return Err(Error::NotAComplexStructure { deviation });
        }
        Ok(ComplexStructureJ { j })
    }

    /// `e1 -> e2, e3 -> e4`.
    pub fn standard() -> Self {
        let mut j = Matrix4::zeros();
        j[(1, 0)] = 1.0;
        j[(0, 1)] = -1.0;
        j[(3, 2)] = 1.0;
        j[(2, 3)] = -1.0;
        ComplexStructureJ { j }
    }

    /// `g J g^-1`.
    pub fn conjugated(&self, g: &Matrix4<f64>) -> Result<Self> {
        let inv = g
            .try_inverse()
            .ok_or_else(|| Error::Invalid("conjugating matrix is singular".into()))?;
        ComplexStructureJ::new(g * self.j * inv)
    }

    pub fn negated(&self) -> Self {
        ComplexStructureJ { j: -self.j }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.j
    }

    /// A complex basis `(v1, J v1, v2, J v2)` as the columns of a real matrix.
    pub fn complex_basis(&self) -> Matrix4<f64> {
        let v1 = (0..4)
            .map(|k| nalgebra::Vector4::ith(k, 1.0))
            .max_by(|a: &nalgebra::Vector4<f64>, b| (self.j * a).norm().total_cmp(&(self.j * b).norm()))
            .unwrap_or_else(|| nalgebra::Vector4::ith(0, 1.0));
        let jv1 = self.j * v1;
        let mut best = (0.0, nalgebra::Vector4::zeros());
        for k in 0..4 {
            let v2 = nalgebra::Vector4::ith(k, 1.0);
            let m = Matrix4::from_columns(&[v1, jv1, v2, self.j * v2]);
            let d = m.determinant().abs();
            if d > best.0 {
                best = (d, v2);
            }
        }
        Matrix4::from_columns(&[v1, jv1, best.1, self.j * best.1])
    }

    /// Restriction to a 2-plane with orthonormal basis columns `(a, b)`:
    /// the matrix of `pr J` in that basis.
    pub fn restricted(&self, a: &nalgebra::Vector4<f64>, b: &nalgebra::Vector4<f64>) -> Matrix2<f64> {
        let (ja, jb) = (self.j * a, self.j * b);
        Matrix2::new(a.dot(&ja), a.dot(&jb), b.dot(&ja), b.dot(&jb))
    }
}

/// The congruence of complex lines `span(v, Jv)` oriented by `(v, Jv)`.
pub fn riemann_sphere(j: &ComplexStructureJ) -> Result<LineCongruence> {
    let std = ComplexStructureJ::standard();
    if (j.j - std.j).abs().max() < 1e-14 {
        return Ok(LineCongruence::constant(Vec3::x()).labelled("riemann-standard"));
    }
    if (j.j + std.j).abs().max() < 1e-14 {
        return Ok(LineCongruence::constant(-Vec3::x()).labelled("riemann-anti-standard"));
    }
    let g = j.complex_basis();
    if g.determinant() < 0.0 {
        // complex lines of an orientation-reversing structure form a graph over S2+
        return Err(Error::NotGraph);
    }
    LineCongruence::constant(Vec3::x()).transformed(&g, "riemann")
}

impl LineCongruence {
    pub fn labelled(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }
}

/// `I + spread * M` with `M` uniform in `[-1, 1]`, resampled until `det > 0.2`.
pub fn random_gl_plus<R: Rng>(rng: &mut R, spread: f64) -> Matrix4<f64> {
    loop {
        let g = Matrix4::identity() + Matrix4::from_fn(|_, _| spread * rng.gen_range(-1.0..1.0));
        if g.determinant() > 0.2 {
            return g;
        }
    }
}

/// A smooth perturbation of the constant map at `x0`:
/// `psi(Y) = exp_x0(eps * proj(M Y + c (Y2 Y3, Y3 Y1, Y1 Y2)))`.
pub fn perturbed_constant<R: Rng>(rng: &mut R, x0: Vec3, eps: f64) -> LineCongruence {
    let m = nalgebra::Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let c = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    perturbed_with(x0, eps, m, c)
}

pub fn perturbed_with(x0: Vec3, eps: f64, m: nalgebra::Matrix3<f64>, c: Vec3) -> LineCongruence {
    let x0 = x0.normalize();
    LineCongruence::graph("perturbed", move |y: &Vec3| {
        let raw = m * y + Vec3::new(c[0] * y[1] * y[2], c[1] * y[2] * y[0], c[2] * y[0] * y[1]);
        let tangent = raw - x0 * x0.dot(&raw);
        exp_map(&x0, &(tangent * eps))
    })
}

/// A random compact elliptic congruence: alternately a perturbed constant
/// graph and the Riemann sphere of a conjugated standard structure.
pub fn random_elliptic<R: Rng>(rng: &mut R) -> LineCongruence {
    if rng.gen_bool(0.5) {
        let x0 = crate::sphere::random_unit(rng);
        let eps = rng.gen_range(0.05..0.2);
        perturbed_constant(rng, x0, eps)
    } else {
        let g = random_gl_plus(rng, 0.3);
        let j = ComplexStructureJ::standard()
            .conjugated(&g)
            .expect("random_gl_plus is invertible");
        riemann_sphere(&j).expect("conjugate by positive determinant")
    }
}

/// Geodesic contraction `X -> exp_c(lambda log_c X)` of the graph.
pub fn contract_toward(x: &LineCongruence, center: Vec3, lambda: f64) -> LineCongruence {
    let c = center.normalize();
    let out = x.map_x("contracted", move |p: &Vec3| exp_map(&c, &(log_map(&c, p) * lambda)));
    if lambda == 0.0 {
        out.mark_constant(c)
    } else {
        out
    }
}

/// Lat-long sampled graph over `S2-`: `values[i * n_lon + j]` is `psi` at
/// colatitude `pi i / (n_lat - 1)` and longitude `2 pi j / n_lon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatLongGrid {
    pub n_lat: usize,
    pub n_lon: usize,
    pub values: Vec<[f64; 3]>,
}

impl LatLongGrid {
    pub fn sample<F: Fn(&Vec3) -> Vec3>(n_lat: usize, n_lon: usize, psi: F) -> Self {
        let mut values = Vec::with_capacity(n_lat * n_lon);
        for i in 0..n_lat {
            for j in 0..n_lon {
                values.push(psi(&Self::node(n_lat, n_lon, i, j)).normalize().into());
            }
        }
        LatLongGrid {
            n_lat,
            n_lon,
            values,
        }
    }

    fn node(n_lat: usize, n_lon: usize, i: usize, j: usize) -> Vec3 {
        let th = std::f64::consts::PI * i as f64 / (n_lat - 1) as f64;
        let ph = 2.0 * std::f64::consts::PI * j as f64 / n_lon as f64;
        Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lat < 3 || self.n_lon < 3 || self.values.len() != self.n_lat * self.n_lon {
            return Err(Error::Invalid(format!(
                "grid needs n_lat, n_lon >= 3 and n_lat * n_lon values, got {} x {} with {}",
                self.n_lat,
                self.n_lon,
                self.values.len()
            )));
        }
        for v in &self.values {
            let n = Vec3::from(*v).norm();
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::NotOnQuadric {
                    x_norm: n,
                    y_norm: 1.0,
                });
            }
        }
        Ok(())
    }

    /// Bilinear interpolation in (colatitude, longitude), renormalized.
    pub fn eval(&self, y: &Vec3) -> Vec3 {
        let th = y[2].clamp(-1.0, 1.0).acos();
        let mut ph = y[1].atan2(y[0]);
        if ph < 0.0 {
            ph += 2.0 * std::f64::consts::PI;
        }
        let fi = th / std::f64::consts::PI * (self.n_lat - 1) as f64;
        let fj = ph / (2.0 * std::f64::consts::PI) * self.n_lon as f64;
        let i0 = (fi.floor() as usize).min(self.n_lat - 2);
        let j0 = (fj.floor() as usize) % self.n_lon;
        let j1 = (j0 + 1) % self.n_lon;
        let (a, b) = (fi - i0 as f64, fj - fj.floor());
        let at = |i: usize, j: usize| Vec3::from(self.values[i * self.n_lon + j]);
        let v = at(i0, j0) * ((1.0 - a) * (1.0 - b))
            + at(i0, j1) * ((1.0 - a) * b)
            + at(i0 + 1, j0) * (a * (1.0 - b))
            + at(i0 + 1, j1) * (a * b);
        v.normalize()
    }
}

/// Serializable description of a congruence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CongruenceDesc {
    Constant {
        center: [f64; 3],
    },
    Grid {
        grid: LatLongGrid,
    },
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<[[f64; 4]; 4]>,
    },
}

/// Names accepted by [`CongruenceDesc::Builtin`].
pub const BUILTIN_CONGRUENCES: [&str; 6] = [
    "standard",
    "anti-standard",
    "axis",
    "perturbed",
    "conjugated",
    "riemann",
];

impl CongruenceDesc {
    pub fn build(&self) -> Result<LineCongruence> {
        match self {
            CongruenceDesc::Constant { center } => {
                let c = Vec3::from(*center);
                if (c.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::NotOnQuadric {
                        x_norm: c.norm(),
                        y_norm: 1.0,
                    });
                }
                Ok(LineCongruence::constant(c))
            }
            CongruenceDesc::Grid { grid } => {
                grid.validate()?;
                let g = grid.clone();
                Ok(LineCongruence::graph("grid", move |y: &Vec3| g.eval(y)))
            }
            CongruenceDesc::Builtin {
                name,
                epsilon,
                seed,
                matrix,
            } => {
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed.unwrap_or(0));
                let matrix = matrix.map(|m| Matrix4::from_fn(|i, k| m[i][k]));
                match name.as_str() {
                    "standard" => riemann_sphere(&ComplexStructureJ::standard()),
                    "anti-standard" => riemann_sphere(&ComplexStructureJ::standard().negated()),
                    "axis" => Ok(LineCongruence::graph("axis", |y: &Vec3| {
                        Vec3::new(y[0], y[1], -y[2])
                    })),
                    "perturbed" => Ok(perturbed_constant(
                        &mut rng,
                        Vec3::x(),
                        epsilon.unwrap_or(0.2),
                    )),
                    "conjugated" => {
                        let g = match matrix {
                            Some(g) => g,
                            None => random_gl_plus(&mut rng, epsilon.unwrap_or(0.3)),
                        };
                        riemann_sphere(&ComplexStructureJ::standard().conjugated(&g)?)
                    }
                    "riemann" => {
                        let j = matrix.ok_or_else(|| {
                            Error::Invalid("builtin 'riemann' needs a 4x4 'matrix'".into())
                        })?;
                        riemann_sphere(&ComplexStructureJ::new(j)?)
                    }
                    other => Err(Error::UnknownName(other.into())),
                }
            }
        }
    }
}

/// Gram matrix of the tangent plane at parameter `s` for the pairing
/// `bilinear / 2`, in the basis of parameter derivatives.
pub fn tangent_gram(x: &LineCongruence, s: &Vec3) -> Result<Matrix2<f64>> {
    let (c1, c2) = osculate::tangent_matrices(x, s)?;
    let b = |a: &Matrix2<f64>, b: &Matrix2<f64>| {
        0.5 * crate::grassmann::bilinear(
            &crate::grassmann::TangentMatrix(*a),
            &crate::grassmann::TangentMatrix(*b),
        )
    };
    Ok(Matrix2::new(b(&c1, &c1), b(&c1, &c2), b(&c2, &c1), b(&c2, &c2)))
}
