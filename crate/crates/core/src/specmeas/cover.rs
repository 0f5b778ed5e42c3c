use std::collections::HashMap;

use serde::Serialize;

use crate::dynsys::{torus_distance, StatePoint};
use crate::error::{Error, Result};

/// Balls of a common radius just below `mesh / 2`, so every element has
/// diameter below `mesh`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cover {
    pub centers: Vec<StatePoint>,
    pub radius: f64,
    pub mesh: f64,
    #[serde(skip)]
    grid: Grid,
}

/// Spatial hash with cells no smaller than the radius.
#[derive(Clone, Debug, Default, PartialEq)]
struct Grid {
    cells: usize,
    dim: usize,
    buckets: HashMap<[usize; 3], Vec<usize>>,
}

impl Grid {
    fn new(dim: usize, radius: f64) -> Self {
        let cells = ((1.0 / radius).floor() as usize).clamp(1, 1 << 20);
        Grid { cells, dim, buckets: HashMap::new() }
    }

    fn key(&self, p: &StatePoint) -> [usize; 3] {
        let mut k = [0; 3];
        for (i, c) in p.coords().iter().enumerate() {
            k[i] = ((c * self.cells as f64) as usize).min(self.cells - 1);
        }
        k
    }

    fn insert(&mut self, p: &StatePoint, id: usize) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(id);
    }

    /// Ids stored in the cells around `p`, in increasing order.
    fn near(&self, p: &StatePoint) -> Vec<usize> {
        let k = self.key(p);
        let n = self.cells as i64;
        let span: Vec<i64> = if n >= 3 { vec![-1, 0, 1] } else { (0..n).collect() };
        let mut keys = Vec::new();
        let mut rec = |key: [usize; 3]| keys.push(key);
        for &a in &span {
            for &b in if self.dim > 1 { &span[..] } else { &[0][..] } {
                for &c in if self.dim > 2 { &span[..] } else { &[0][..] } {
                    let mut key = [0; 3];
                    for (i, off) in [a, b, c].into_iter().enumerate().take(self.dim) {
                        key[i] = if n >= 3 {
                            (k[i] as i64 + off).rem_euclid(n) as usize
                        } else {
                            off as usize
                        };
                    }
                    rec(key);
                }
            }
        }
        let mut ids: Vec<usize> = keys
            .iter()
            .filter_map(|key| self.buckets.get(key))
            .flatten()
            .copied()
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

impl Cover {
    fn empty(dim: usize, mesh: f64) -> Self {
        let radius = 0.5 * mesh * (1.0 - 1e-9);
        Cover { centers: Vec::new(), radius, mesh, grid: Grid::new(dim, radius) }
    }

    /// Rebuilds a cover from stored centres.
    pub fn from_centers(centers: Vec<StatePoint>, mesh: f64) -> Result<Self> {
        let dim = centers.first().map(|c| c.dim()).ok_or(Error::InvalidParameter("a cover needs a centre".into()))?;
        check_mesh(mesh)?;
        let mut cover = Cover::empty(dim, mesh);
        for c in centers {
            cover.push(c);
        }
        Ok(cover)
    }

    fn push(&mut self, c: StatePoint) {
        self.grid.insert(&c, self.centers.len());
        self.centers.push(c);
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    /// Elements containing `p`, in increasing order.
    pub fn containing(&self, p: &StatePoint) -> Vec<usize> {
        if p.dim() != self.dim() {
            return Vec::new();
        }
        self.grid
            .near(p)
            .into_iter()
            .filter(|&i| torus_distance(&self.centers[i], p).unwrap() < self.radius)
            .collect()
    }

    /// First element containing `p`.
    pub fn locate(&self, p: &StatePoint) -> Option<usize> {
        self.containing(p).first().copied()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,radius");
        for i in 0..self.dim() {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (i, c) in self.centers.iter().enumerate() {
            out.push_str(&format!("{i},{}", crate::format::fmt_f64(self.radius)));
            for v in c.coords() {
                out.push(',');
                out.push_str(&crate::format::fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

fn check_mesh(mesh: f64) -> Result<()> {
    if !(mesh > 0.0) || !mesh.is_finite() {
        return Err(Error::InvalidParameter(format!("cover mesh must be positive, got {mesh}")));
    }
    Ok(())
}

/// Greedy cover: each sample not yet covered becomes a centre.
pub fn build_cover(samples: &[StatePoint], mesh: f64) -> Result<Cover> {
    check_mesh(mesh)?;
    let dim = samples.first().map(|s| s.dim()).ok_or(Error::InvalidParameter("no samples to cover".into()))?;
    if let Some(s) = samples.iter().find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: s.dim() });
    }
    let mut cover = Cover::empty(dim, mesh);
    for s in samples {
        if cover.locate(s).is_none() {
            cover.push(*s);
        }
    }
    Ok(cover)
}
