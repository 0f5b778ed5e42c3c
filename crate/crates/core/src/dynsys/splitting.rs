use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{chord, Subspace};

/// Subspaces closer than this (as a chord between unit vectors) count as intersecting.
pub const DEGENERATE_ANGLE: f64 = 1e-10;

/// `T_x M = E(x) + F(x)` with orthonormal bases for both summands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Splitting {
    e: Subspace,
    f: Subspace,
}

/// Spanning vectors for a splitting, as they appear in config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingDef {
    pub e: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
}

impl Splitting {
    pub fn new(e_basis: &[Vec<f64>], f_basis: &[Vec<f64>]) -> Result<Self> {
        let d = e_basis
            .first()
            .or(f_basis.first())
            .map(|v| v.len())
            .ok_or_else(|| Error::InvalidParameter("empty splitting".into()))?;
        let e = Subspace::from_vectors(e_basis, d)?;
        let f = Subspace::from_vectors(f_basis, d)?;
        Self::from_subspaces(e, f)
    }

    pub fn from_def(def: &SplittingDef) -> Result<Self> {
        Self::new(&def.e, &def.f)
    }

    pub fn from_subspaces(e: Subspace, f: Subspace) -> Result<Self> {
        if e.ambient() != f.ambient() {
            return Err(Error::DimensionMismatch {
                expected: e.ambient(),
                got: f.ambient(),
            });
        }
        if e.rank() + f.rank() != e.ambient() {
            return Err(Error::DimensionMismatch {
                expected: e.ambient(),
                got: e.rank() + f.rank(),
            });
        }
        subbundle_angle(&e, &f)?;
        Ok(Splitting { e, f })
    }

    pub fn e(&self) -> &Subspace {
        &self.e
    }

    pub fn f(&self) -> &Subspace {
        &self.f
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.e.rank(), self.f.rank())
    }

    pub fn ambient(&self) -> usize {
        self.e.ambient()
    }

    pub fn e_basis(&self) -> Vec<Vec<f64>> {
        (0..self.e.rank()).map(|i| self.e.vector(i)).collect()
    }

    pub fn f_basis(&self) -> Vec<Vec<f64>> {
        (0..self.f.rank()).map(|i| self.f.vector(i)).collect()
    }

    pub fn to_def(&self) -> SplittingDef {
        SplittingDef {
            e: self.e_basis(),
            f: self.f_basis(),
        }
    }

    /// `inf |u - v|` over unit `u` in E and `v` in F.
    pub fn angle(&self) -> f64 {
        chord(self.e.min_principal_angle(&self.f))
    }
}

/// `inf |u - v|` over unit vectors `u` in `e` and `v` in `f`, in `(0, 2]`.
/// Errors when the subspaces (numerically) intersect.
pub fn subbundle_angle(e: &Subspace, f: &Subspace) -> Result<f64> {
    if e.ambient() != f.ambient() {
        return Err(Error::DimensionMismatch {
            expected: e.ambient(),
            got: f.ambient(),
        });
    }
    let a = chord(e.min_principal_angle(f));
    if a < DEGENERATE_ANGLE {
        return Err(Error::DegenerateSplitting(a));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_lines_give_sqrt2() {
        let s = Splitting::new(&[vec![1.0, 0.0]], &[vec![0.0, 3.0]]).unwrap();
        assert!((s.angle() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identical_lines_are_degenerate() {
        let r = Splitting::new(&[vec![1.0, 1.0]], &[vec![2.0, 2.0]]);
        assert!(matches!(r, Err(Error::DegenerateSplitting(a)) if a < 1e-10));
    }

    #[test]
    fn wrong_total_dimension() {
        let r = Splitting::new(&[vec![1.0, 0.0, 0.0]], &[vec![0.0, 1.0, 0.0]]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
