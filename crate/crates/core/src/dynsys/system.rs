use std::sync::Arc;

use serde::{Serialize, Serializer};

use super::circle::{g_and_prime, g_inverse, g_inverse_and_prime, g_prime, SQRT5};
use super::composite::{CompositeDef, CompositeMap};
use super::orbit::OrbitSegment;
use super::point::StatePoint;
use super::splitting::Splitting;
use crate::error::{Error, Result};
use crate::linalg::{Mat3, MAX_DIM};

/// Expanding eigenvalue of the cat map matrix `[[2,1],[1,1]]`.
pub const CAT_LAMBDA_U: f64 = (3.0 + SQRT5) / 2.0;
/// Contracting eigenvalue, `1 / CAT_LAMBDA_U`.
pub const CAT_LAMBDA_S: f64 = (3.0 - SQRT5) / 2.0;

/// Unnormalized eigenvectors of the cat map matrix.
pub const CAT_E_S: [f64; 2] = [1.0, -(1.0 + SQRT5) / 2.0];
pub const CAT_E_U: [f64; 2] = [1.0, (SQRT5 - 1.0) / 2.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    CatMap,
    CircleG,
    Product24,
    Translation,
    Composite,
}

/// A torus diffeomorphism with an analytic derivative.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    /// `(x, y) -> (2x + y, x + y)` on the 2-torus.
    CatMap,
    /// The circle map `g` of the product example.
    CircleG,
    /// `g x CatMap` on the 3-torus.
    Product24,
    /// Rigid translation, an isometry.
    Translation { shift: [f64; MAX_DIM], dim: usize },
    Composite(Arc<CompositeMap>),
}

impl Serialize for SystemSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Derivative of the map at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobian {
    m: Mat3,
    dim: usize,
}

impl Jacobian {
    pub fn new(m: Mat3, dim: usize) -> Self {
        Jacobian { m, dim }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.m[(i, j)]).collect())
            .collect()
    }
}

#[inline]
fn cat(x: f64, y: f64) -> (f64, f64) {
    (2.0 * x + y, x + y)
}

#[inline]
fn cat_inv(x: f64, y: f64) -> (f64, f64) {
    (x - y, 2.0 * y - x)
}

fn cat_matrix_at(m: &mut Mat3, o: usize) {
    m[(o, o)] = 2.0;
    m[(o, o + 1)] = 1.0;
    m[(o + 1, o)] = 1.0;
    m[(o + 1, o + 1)] = 1.0;
}

impl SystemSpec {
    /// Looks up a builtin by its config name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "cat" | "catmap" | "cat-map" => Ok(SystemSpec::CatMap),
            "circle-g" | "circle" => Ok(SystemSpec::CircleG),
            "product24" | "product" => Ok(SystemSpec::Product24),
            _ => Err(Error::InvalidParameter(format!("unknown system {name:?}"))),
        }
    }

    pub fn translation(shift: &[f64]) -> Result<Self> {
        let dim = shift.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut s = [0.0; MAX_DIM];
        s[..dim].copy_from_slice(shift);
        Ok(SystemSpec::Translation { shift: s, dim })
    }

    pub fn composite(def: CompositeDef) -> Result<Self> {
        Ok(SystemSpec::Composite(Arc::new(CompositeMap::new(def)?)))
    }

    pub fn kind(&self) -> SystemKind {
        match self {
            SystemSpec::CatMap => SystemKind::CatMap,
            SystemSpec::CircleG => SystemKind::CircleG,
            SystemSpec::Product24 => SystemKind::Product24,
            SystemSpec::Translation { .. } => SystemKind::Translation,
            SystemSpec::Composite(_) => SystemKind::Composite,
        }
    }

    pub fn name(&self) -> String {
        match self {
            SystemSpec::CatMap => "cat".into(),
            SystemSpec::CircleG => "circle-g".into(),
            SystemSpec::Product24 => "product24".into(),
            SystemSpec::Translation { .. } => "translation".into(),
            SystemSpec::Composite(c) => c.name().to_string(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::CatMap => 2,
            SystemSpec::CircleG => 1,
            SystemSpec::Product24 => 3,
            SystemSpec::Translation { dim, .. } => *dim,
            SystemSpec::Composite(c) => c.dim(),
        }
    }

    pub fn has_inverse(&self) -> bool {
        match self {
            SystemSpec::Composite(c) => c.has_inverse(),
            _ => true,
        }
    }

    pub(crate) fn check(&self, p: &StatePoint) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.dim(),
            });
        }
        Ok(())
    }

    /// Image and derivative at `p`, sharing the trigonometric work.
    #[inline]
    pub(crate) fn step_jac_raw(&self, p: &StatePoint) -> Result<(StatePoint, Mat3)> {
        let x = p.raw();
        let mut m = Mat3::zeros();
        let d = self.dim();
        let mut out = [0.0; MAX_DIM];
        match self {
            SystemSpec::CatMap => {
                (out[0], out[1]) = cat(x[0], x[1]);
                cat_matrix_at(&mut m, 0);
            }
            SystemSpec::CircleG => {
                let (gx, gp) = g_and_prime(x[0]);
                out[0] = gx;
                m[(0, 0)] = gp;
            }
            SystemSpec::Product24 => {
                let (gx, gp) = g_and_prime(x[0]);
                out[0] = gx;
                (out[1], out[2]) = cat(x[1], x[2]);
                m[(0, 0)] = gp;
                cat_matrix_at(&mut m, 1);
            }
            SystemSpec::Translation { shift, dim } => {
                for i in 0..*dim {
                    out[i] = x[i] + shift[i];
                    m[(i, i)] = 1.0;
                }
            }
            SystemSpec::Composite(c) => {
                out = c.apply(&x)?;
                m = c.jacobian(&x)?;
            }
        }
        Ok((StatePoint::from_array(out, d), m))
    }

    #[inline]
    pub(crate) fn step_raw(&self, p: &StatePoint) -> Result<StatePoint> {
        let x = p.raw();
        let d = self.dim();
        let mut out = [0.0; MAX_DIM];
        match self {
            SystemSpec::CatMap => (out[0], out[1]) = cat(x[0], x[1]),
            SystemSpec::CircleG => out[0] = g_and_prime(x[0]).0,
            SystemSpec::Product24 => {
                out[0] = g_and_prime(x[0]).0;
                (out[1], out[2]) = cat(x[1], x[2]);
            }
            SystemSpec::Translation { shift, dim } => {
                for i in 0..*dim {
                    out[i] = x[i] + shift[i];
                }
            }
            SystemSpec::Composite(c) => out = c.apply(&x)?,
        }
        Ok(StatePoint::from_array(out, d))
    }

    #[inline]
    pub(crate) fn inverse_raw(&self, p: &StatePoint) -> Result<StatePoint> {
        let x = p.raw();
        let d = self.dim();
        let mut out = [0.0; MAX_DIM];
        match self {
            SystemSpec::CatMap => (out[0], out[1]) = cat_inv(x[0], x[1]),
            SystemSpec::CircleG => out[0] = g_inverse(x[0]),
            SystemSpec::Product24 => {
                out[0] = g_inverse(x[0]);
                (out[1], out[2]) = cat_inv(x[1], x[2]);
            }
            SystemSpec::Translation { shift, dim } => {
                for i in 0..*dim {
                    out[i] = x[i] - shift[i];
                }
            }
            SystemSpec::Composite(c) => out = c.apply_inverse(&x)?,
        }
        Ok(StatePoint::from_array(out, d))
    }

    /// Preimage of `p` and the derivative of `f` at that preimage.
    pub(crate) fn inverse_jac_raw(&self, p: &StatePoint) -> Result<(StatePoint, Mat3)> {
        let x = p.raw();
        let d = self.dim();
        let mut out = [0.0; MAX_DIM];
        let mut m = Mat3::zeros();
        match self {
            SystemSpec::CircleG => (out[0], m[(0, 0)]) = g_inverse_and_prime(x[0]),
            SystemSpec::Product24 => {
                (out[0], m[(0, 0)]) = g_inverse_and_prime(x[0]);
                (out[1], out[2]) = cat_inv(x[1], x[2]);
                cat_matrix_at(&mut m, 1);
            }
            _ => {
                let q = self.inverse_raw(p)?;
                return Ok((q, self.jac_raw(&q)?));
            }
        }
        Ok((StatePoint::from_array(out, d), m))
    }

    pub(crate) fn jac_raw(&self, p: &StatePoint) -> Result<Mat3> {
        let x = p.raw();
        let mut m = Mat3::zeros();
        match self {
            SystemSpec::CatMap => cat_matrix_at(&mut m, 0),
            SystemSpec::CircleG => m[(0, 0)] = g_prime(x[0]),
            SystemSpec::Product24 => {
                m[(0, 0)] = g_prime(x[0]);
                cat_matrix_at(&mut m, 1);
            }
            SystemSpec::Translation { dim, .. } => {
                for i in 0..*dim {
                    m[(i, i)] = 1.0;
                }
            }
            SystemSpec::Composite(c) => m = c.jacobian(&x)?,
        }
        Ok(m)
    }

    /// `f(p)` with coordinates reduced mod 1.
    pub fn step(&self, p: &StatePoint) -> Result<StatePoint> {
        self.check(p)?;
        self.step_raw(p)
    }

    /// `f^{-1}(p)`.
    pub fn inverse_step(&self, p: &StatePoint) -> Result<StatePoint> {
        self.check(p)?;
        self.inverse_raw(p)
    }

    pub fn derivative(&self, p: &StatePoint) -> Result<Jacobian> {
        self.check(p)?;
        Ok(Jacobian::new(self.jac_raw(p)?, self.dim()))
    }

    /// Orbit segment `p, f(p), ..., f^n(p)`.
    pub fn iterate(&self, p: &StatePoint, n: usize) -> Result<OrbitSegment> {
        self.check(p)?;
        let mut pts = Vec::with_capacity(n + 1);
        pts.push(*p);
        let mut cur = *p;
        for _ in 0..n {
            cur = self.step_raw(&cur)?;
            pts.push(cur);
        }
        Ok(OrbitSegment::from_points_unchecked(pts))
    }

    /// `f^n(p)` without storing the orbit.
    pub fn iterate_to(&self, p: &StatePoint, n: usize) -> Result<StatePoint> {
        self.check(p)?;
        let mut cur = *p;
        for _ in 0..n {
            cur = self.step_raw(&cur)?;
        }
        Ok(cur)
    }

    /// The known invariant splitting. Constant in coordinates for both
    /// supported systems, so it is invariant under the derivative exactly.
    pub fn reference_splitting(&self, p: &StatePoint) -> Result<Splitting> {
        self.check(p)?;
        match self {
            SystemSpec::CatMap => Splitting::new(&[CAT_E_S.to_vec()], &[CAT_E_U.to_vec()]),
            SystemSpec::Product24 => Splitting::new(
                &[vec![1.0, 0.0, 0.0], vec![0.0, CAT_E_S[0], CAT_E_S[1]]],
                &[vec![0.0, CAT_E_U[0], CAT_E_U[1]]],
            ),
            _ => Err(Error::UnsupportedSystem(self.name())),
        }
    }

    pub fn has_reference_splitting(&self) -> bool {
        matches!(self, SystemSpec::CatMap | SystemSpec::Product24)
    }
}

pub fn step(system: &SystemSpec, p: &StatePoint) -> Result<StatePoint> {
    system.step(p)
}

pub fn iterate(system: &SystemSpec, p: &StatePoint, n: usize) -> Result<OrbitSegment> {
    system.iterate(p, n)
}

pub fn derivative(system: &SystemSpec, p: &StatePoint) -> Result<Jacobian> {
    system.derivative(p)
}

pub fn reference_splitting(system: &SystemSpec, p: &StatePoint) -> Result<Splitting> {
    system.reference_splitting(p)
}
