use serde::Serialize;

use crate::dynsys::circle::sin_cos_2pi;
use crate::dynsys::{StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::format::fmt_f64;

/// A finitely supported probability measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    points: Vec<StatePoint>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<StatePoint>, weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(|p| p.dim()).ok_or(Error::InvalidParameter("empty measure".into()))?;
        if weights.len() != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Ok(EmpiricalMeasure { points, weights })
    }

    /// Equal weights on the given points.
    pub fn uniform(points: Vec<StatePoint>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        let n = points.len();
        Self::new(points, vec![w; n])
    }

    /// `(1/n) sum_{i<n} delta_{f^i(x)}`.
    pub fn birkhoff(system: &SystemSpec, x: &StatePoint, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Birkhoff sample needs n >= 1".into()));
        }
        let mut pts = system.iterate(x, n - 1)?.into_points();
        pts.truncate(n);
        Self::uniform(pts)
    }

    /// Uniform measure on the grid `(i_1/n, ..., i_d/n)`.
    pub fn uniform_grid(dim: usize, n: usize) -> Result<Self> {
        if n == 0 || dim == 0 || dim > 3 {
            return Err(Error::InvalidParameter(format!("grid needs n >= 1 and dim in 1..=3, got {n}, {dim}")));
        }
        let total = n.pow(dim as u32);
        let pts = (0..total)
            .map(|mut idx| {
                let mut c = Vec::with_capacity(dim);
                for _ in 0..dim {
                    c.push((idx % n) as f64 / n as f64);
                    idx /= n;
                }
                StatePoint::new(&c).unwrap()
            })
            .collect();
        Self::uniform(pts)
    }

    pub fn points(&self) -> &[StatePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(int cos(2 pi k.x), int sin(2 pi k.x))` for every `k` in the half
    /// family `K_D^+` of [`characters`], in that order.
    pub fn character_moments(&self, degree: usize) -> Vec<(f64, f64)> {
        let ks = characters(self.dim(), degree);
        let d = degree as i64;
        let width = 2 * degree + 1;
        let mut sums = vec![(0.0, 0.0); ks.len()];
        let mut powers = vec![(0.0, 0.0); self.dim() * width];
        for (p, w) in self.points.iter().zip(&self.weights) {
            // e(m x_c) for m = -D..=D by repeated multiplication.
            for (c, x) in p.coords().iter().enumerate() {
                let (s, co) = sin_cos_2pi(*x);
                let row = &mut powers[c * width..(c + 1) * width];
                row[degree] = (1.0, 0.0);
                for m in 1..=degree {
                    let (a, b) = row[degree + m - 1];
                    row[degree + m] = (a * co - b * s, a * s + b * co);
                    row[degree - m] = (row[degree + m].0, -row[degree + m].1);
                }
            }
            for (acc, k) in sums.iter_mut().zip(&ks) {
                let (mut re, mut im) = (1.0, 0.0);
                for (c, kc) in k.iter().enumerate() {
                    let (a, b) = powers[c * width + (kc + d) as usize];
                    (re, im) = (re * a - im * b, re * b + im * a);
                }
                acc.0 += w * re;
                acc.1 += w * im;
            }
        }
        sums
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("weight");
        for i in 0..self.dim() {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (p, w) in self.points.iter().zip(&self.weights) {
            out.push_str(&fmt_f64(*w));
            for v in p.coords() {
                out.push(',');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Nonzero `k` with `|k|_inf <= degree`, one of each pair `{k, -k}` (the
/// first nonzero entry is positive). `cos` and `|sin|` agree on the pair.
pub fn characters(dim: usize, degree: usize) -> Vec<Vec<i64>> {
    let d = degree as i64;
    let width = 2 * d + 1;
    let total = width.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            (0..dim)
                .map(|_| {
                    let v = idx % width - d;
                    idx /= width;
                    v
                })
                .collect::<Vec<i64>>()
        })
        .filter(|k| k.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0))
        .collect()
}

/// `max |int phi dm1 - int phi dm2|` over `phi` in `cos(2 pi k.x)`,
/// `sin(2 pi k.x)`, `0 < |k|_inf <= degree`.
pub fn weak_star_distance(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure, degree: usize) -> Result<f64> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch { expected: m1.dim(), got: m2.dim() });
    }
    let (a, b) = (m1.character_moments(degree), m2.character_moments(degree));
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| (x.0 - y.0).abs().max((x.1 - y.1).abs()))
        .fold(0.0, f64::max))
}
