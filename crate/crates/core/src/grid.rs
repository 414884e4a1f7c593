//! Cartesian lattice masked to a disk, with fourth-order differences.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub const MIN_POINTS: usize = 8;

/// Cell-centred lattice `x_i = -R + (i + 1/2) h`, `h = 2R / n`, keeping
/// the centres inside the closed disk of radius `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridJson", into = "GridJson")]
pub struct DiskGrid {
    radius: f64,
    n: usize,
    h: f64,
    nodes: Vec<C64>,
    ij: Vec<(usize, usize)>,
    index: Vec<Option<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    radius: f64,
    n: usize,
}

impl TryFrom<GridJson> for DiskGrid {
    type Error = Error;
    fn try_from(g: GridJson) -> Result<Self> {
        DiskGrid::new(g.radius, g.n)
    }
}

impl From<DiskGrid> for GridJson {
    fn from(g: DiskGrid) -> Self {
        GridJson {
            radius: g.radius,
            n: g.n,
        }
    }
}

impl DiskGrid {
    pub fn new(radius: f64, n: usize) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::GridTooCoarse { n, min: MIN_POINTS });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("grid radius must be positive, got {radius}")));
        }
        let h = 2.0 * radius / n as f64;
        let mut nodes = Vec::new();
        let mut ij = Vec::new();
        let mut index = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                let s = C64::new(-radius + (i as f64 + 0.5) * h, -radius + (j as f64 + 0.5) * h);
                if s.norm() <= radius {
                    index[i * n + j] = Some(nodes.len());
                    nodes.push(s);
                    ij.push((i, j));
                }
            }
        }
        Ok(DiskGrid {
            radius,
            n,
            h,
            nodes,
            ij,
            index,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lattice_index(&self, node: usize) -> (usize, usize) {
        self.ij[node]
    }

    /// Node id at lattice position `(i, j)`, if inside the disk.
    pub fn node_at(&self, i: i64, j: i64) -> Option<usize> {
        if i < 0 || j < 0 || i >= self.n as i64 || j >= self.n as i64 {
            return None;
        }
        self.index[i as usize * self.n + j as usize]
    }

    /// Lattice coordinate of index `i` along either axis.
    pub fn coordinate(&self, i: i64) -> f64 {
        -self.radius + (i as f64 + 0.5) * self.h
    }

    fn stencil(&self, node: usize) -> Option<[[usize; 4]; 2]> {
        let (i, j) = self.ij[node];
        let (i, j) = (i as i64, j as i64);
        let mut out = [[0; 4]; 2];
        for (k, d) in [-2i64, -1, 1, 2].iter().enumerate() {
            out[0][k] = self.node_at(i + d, j)?;
            out[1][k] = self.node_at(i, j + d)?;
        }
        Some(out)
    }

    /// Nodes whose fourth-order stencil lies inside the grid.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.stencil(k).is_some()).collect()
    }

    /// `(f_sigma, f_sigmabar)` at an interior node by fourth-order central differences.
    pub fn wirtinger(&self, f: &[C64], node: usize) -> Option<(C64, C64)> {
        let st = self.stencil(node)?;
        let d = |s: &[usize; 4]| (f[s[0]] - f[s[1]] * 8.0 + f[s[2]] * 8.0 - f[s[3]]) / (12.0 * self.h);
        let fx = d(&st[0]);
        let fy = d(&st[1]);
        let i = C64::i();
        Some(((fx - i * fy) * 0.5, (fx + i * fy) * 0.5))
    }

    /// The same disk at a different resolution.
    pub fn refined(&self, n: usize) -> Result<Self> {
        DiskGrid::new(self.radius, n)
    }
}
