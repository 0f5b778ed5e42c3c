use serde::Serialize;

use super::point::{torus_distance, StatePoint};
use super::system::SystemSpec;
use crate::error::{Error, Result};

/// The orbit piece `{x, n}`: cached points `x, f(x), ..., f^n(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSegment {
    points: Vec<StatePoint>,
}

impl OrbitSegment {
    pub(crate) fn from_points_unchecked(points: Vec<StatePoint>) -> Self {
        debug_assert!(!points.is_empty());
        OrbitSegment { points }
    }

    /// Accepts stored points if consecutive ones match the map within `tol`.
    pub fn from_points(system: &SystemSpec, points: Vec<StatePoint>, tol: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty orbit segment".into()));
        }
        for (j, w) in points.windows(2).enumerate() {
            let d = torus_distance(&system.step(&w[0])?, &w[1])?;
            if !(d <= tol) {
                return Err(Error::InvalidParameter(format!(
                    "points {j} and {} are not consecutive orbit points (gap {d:e})",
                    j + 1
                )));
            }
        }
        Ok(OrbitSegment { points })
    }

    pub fn base(&self) -> &StatePoint {
        &self.points[0]
    }

    /// Number of steps `n`.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> &[StatePoint] {
        &self.points
    }

    pub fn end(&self) -> &StatePoint {
        self.points.last().expect("segment has a base point")
    }

    pub fn into_points(self) -> Vec<StatePoint> {
        self.points
    }
}
