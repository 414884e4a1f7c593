//! Small toolkit for the unit 2-sphere: tangent frames, exponential and
//! logarithm maps, and quadrature point sets.

use nalgebra::Vector3;
use std::collections::HashMap;

pub type Vec3 = Vector3<f64>;

/// Right-handed orthonormal frame `(e1, e2)` of the tangent plane at `n`,
/// with `e1 x e2 = n`.
pub fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.6 {
        Vec3::x()
    } else if n.y.abs() < 0.6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = (helper - n * n.dot(&helper)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Point reached by following the great circle from `base` with initial
/// tangent velocity `v` for unit time.
pub fn exp_map(base: &Vec3, v: &Vec3) -> Vec3 {
    let t = v.norm();
    if t < 1e-300 {
        return *base;
    }
    (base * t.cos() + v * (t.sin() / t)).normalize()
}

/// Inverse of [`exp_map`]; undefined at the antipode of `base`.
pub fn log_map(base: &Vec3, x: &Vec3) -> Vec3 {
    let c = base.dot(x).clamp(-1.0, 1.0);
    let perp = x - base * c;
    let s = perp.norm();
    if s < 1e-300 {
        return Vec3::zeros();
    }
    perp * (s.atan2(c) / s)
}

/// Geodesic step of arc length `h` from `s` along the unit tangent `dir`.
pub fn step(s: &Vec3, dir: &Vec3, h: f64) -> Vec3 {
    s * h.cos() + dir * h.sin()
}

/// Geodesic distance.
pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Uniformly distributed random unit vector.
pub fn random_unit<R: rand::Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return v / n;
        }
    }
}

/// Vertices of a subdivided icosahedron with per-vertex area weights that
/// sum to `4 pi`.
#[derive(Debug, Clone)]
pub struct Icosphere {
    pub vertices: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub faces: Vec<[usize; 3]>,
}

impl Icosphere {
    /// Level 0 is the icosahedron (12 vertices); level 4 has 2562.
    pub fn new(level: u32) -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vec3> = [
            (-1.0, phi, 0.0),
            (1.0, phi, 0.0),
            (-1.0, -phi, 0.0),
            (1.0, -phi, 0.0),
            (0.0, -1.0, phi),
            (0.0, 1.0, phi),
            (0.0, -1.0, -phi),
            (0.0, 1.0, -phi),
            (phi, 0.0, -1.0),
            (phi, 0.0, 1.0),
            (-phi, 0.0, -1.0),
            (-phi, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, vs: &mut Vec<Vec3>| -> usize {
                let key = (a.min(b), a.max(b));
                *cache.entry(key).or_insert_with(|| {
                    vs.push(((vs[a] + vs[b]) * 0.5).normalize());
                    vs.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for &[a, b, c] in &faces {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.push([a, ab, ca]);
                next.push([b, bc, ab]);
                next.push([c, ca, bc]);
                next.push([ab, bc, ca]);
            }
            faces = next;
        }
        let mut weights = vec![0.0; vertices.len()];
        for f in &faces {
            let area = spherical_triangle_area(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
            for &i in f {
                weights[i] += area / 3.0;
            }
        }
        let total: f64 = weights.iter().sum();
        let scale = 4.0 * std::f64::consts::PI / total;
        weights.iter_mut().for_each(|w| *w *= scale);
        Icosphere {
            vertices,
            weights,
            faces,
        }
    }

    /// Undirected edges, each listed once.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Area of the spherical triangle with unit-vector corners (Van Oosterom–Strackee).
pub fn spherical_triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}
