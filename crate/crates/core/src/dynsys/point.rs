use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Vec3, MAX_DIM};

/// `1.5 * 2^52`: adding and subtracting it rounds to the nearest integer.
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;

/// Nearest integer, ties to even; cheaper than the library calls on targets
/// without SSE4.1.
#[inline]
pub(crate) fn round_fast(x: f64) -> f64 {
    if x.abs() < 2_251_799_813_685_248.0 {
        (x + ROUND_MAGIC) - ROUND_MAGIC
    } else {
        x.round()
    }
}

#[inline]
pub(crate) fn floor_fast(x: f64) -> f64 {
    let t = round_fast(x);
    if t > x {
        t - 1.0
    } else {
        t
    }
}

/// Reduces a real number to its representative in `[0, 1)`.
#[inline]
pub fn reduce(x: f64) -> f64 {
    // Exact shortcuts for the ranges a single step of the builtins produces.
    if (0.0..1.0).contains(&x) {
        return x;
    }
    if (1.0..3.0).contains(&x) {
        return if x < 2.0 { x - 1.0 } else { x - 2.0 };
    }
    if (-1.0..0.0).contains(&x) {
        let r = x + 1.0;
        return if r >= 1.0 { 0.0 } else { r };
    }
    if !x.is_finite() {
        return f64::NAN;
    }
    let r = x - floor_fast(x);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Nearest-representative difference of two circle coordinates, in `[-1/2, 1/2]`.
#[inline]
pub fn wrap_diff(d: f64) -> f64 {
    d - round_fast(d)
}

/// A point on the `d`-torus, `d <= 3`, with coordinates in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StatePoint {
    c: [f64; MAX_DIM],
    dim: usize,
}

impl StatePoint {
    /// Builds a point, reducing every coordinate mod 1.
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut c = [0.0; MAX_DIM];
        for (i, x) in coords.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {i} is not finite"
                )));
            }
            c[i] = reduce(*x);
        }
        Ok(StatePoint { c, dim })
    }

    #[inline]
    pub(crate) fn from_array(c: [f64; MAX_DIM], dim: usize) -> Self {
        let mut r = [0.0; MAX_DIM];
        for i in 0..dim {
            r[i] = reduce(c[i]);
        }
        StatePoint { c: r, dim }
    }

    pub fn origin(dim: usize) -> Self {
        StatePoint {
            c: [0.0; MAX_DIM],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    #[inline]
    pub(crate) fn raw(&self) -> [f64; MAX_DIM] {
        self.c
    }

    /// Translates by a tangent vector and reduces.
    pub fn displaced(&self, v: &Vec3) -> Self {
        let mut c = self.c;
        for i in 0..self.dim {
            c[i] += v[i];
        }
        Self::from_array(c, self.dim)
    }

    /// `q - self` taken coordinatewise via the nearest representative.
    #[inline]
    pub fn diff_to(&self, q: &StatePoint) -> Vec3 {
        let mut v = Vec3::zeros();
        for i in 0..self.dim {
            v[i] = wrap_diff(q.c[i] - self.c[i]);
        }
        v
    }
}

impl TryFrom<Vec<f64>> for StatePoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        StatePoint::new(&v)
    }
}

impl From<StatePoint> for Vec<f64> {
    fn from(p: StatePoint) -> Vec<f64> {
        p.coords().to_vec()
    }
}

/// Flat distance on the torus.
pub fn torus_distance(p: &StatePoint, q: &StatePoint) -> Result<f64> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            got: q.dim,
        });
    }
    Ok(p.diff_to(q).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_keeps_unit_interval() {
        assert_eq!(reduce(1.0), 0.0);
        assert_eq!(reduce(-1e-20), 0.0);
        assert_eq!(reduce(-0.25), 0.75);
        assert_eq!(reduce(2.5), 0.5);
    }

    #[test]
    fn distance_examples() {
        let p = StatePoint::new(&[0.1]).unwrap();
        let q = StatePoint::new(&[0.9]).unwrap();
        assert!((torus_distance(&p, &q).unwrap() - 0.2).abs() < 1e-15);
        let o = StatePoint::origin(2);
        let h = StatePoint::new(&[0.5, 0.5]).unwrap();
        assert!((torus_distance(&o, &h).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(torus_distance(&h, &h).unwrap(), 0.0);
        assert!(matches!(
            torus_distance(&p, &o),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
