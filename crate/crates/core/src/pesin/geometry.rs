use rayon::prelude::*;
use serde::Serialize;

use super::certificate::BlockProfile;
use crate::cocycle::SplittingField;
use crate::dynsys::{StatePoint, SystemSpec};
use crate::error::{Error, Result};

/// Sweep of the circle coordinate of the product system at fixed `(y, z)`, with `K = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometrySweep {
    pub zeta: f64,
    pub grid: usize,
    pub horizon: usize,
    pub y: f64,
    pub z: f64,
}

impl GeometrySweep {
    pub fn new(zeta: f64, grid: usize, horizon: usize) -> Self {
        GeometrySweep {
            zeta,
            grid,
            horizon,
            y: 0.3,
            z: 0.7,
        }
    }

    pub fn with_fiber_point(mut self, y: f64, z: f64) -> Self {
        self.y = y;
        self.z = z;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0 && self.zeta < std::f64::consts::LN_2) {
            return Err(Error::InvalidParameter(format!(
                "zeta must lie in (0, log 2), got {}",
                self.zeta
            )));
        }
        if self.grid < 1000 {
            return Err(Error::InvalidParameter(format!(
                "grid must have at least 1000 points, got {}",
                self.grid
            )));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.grid).map(|i| i as f64 / self.grid as f64).collect()
    }

    /// Pass flags for each requested `k` (outer index) at each grid point,
    /// plus the minimal block index per grid point.
    pub fn run(&self, ks: &[usize]) -> Result<SweepResult> {
        self.validate()?;
        if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > self.horizon) {
            return Err(Error::InvalidParameter(format!(
                "block index {k} outside [1, {}]",
                self.horizon
            )));
        }
        let xs = self.xs();
        let rows: Vec<(Vec<bool>, Option<usize>)> = xs
            .par_iter()
            .map(|&x| {
                let p = StatePoint::new(&[x, self.y, self.z])?;
                let prof = BlockProfile::build(
                    &SystemSpec::Product24,
                    &p,
                    &SplittingField::Reference,
                    1,
                    self.horizon,
                )?;
                let flags = ks.iter().map(|&k| prof.passes(self.zeta, k)).collect();
                Ok((flags, prof.min_block_index(self.zeta)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut pass = vec![Vec::with_capacity(xs.len()); ks.len()];
        let mut min_index = Vec::with_capacity(xs.len());
        for (flags, m) in rows {
            for (col, f) in pass.iter_mut().zip(flags) {
                col.push(f);
            }
            min_index.push(m);
        }
        Ok(SweepResult {
            xs,
            ks: ks.to_vec(),
            pass,
            min_index,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub xs: Vec<f64>,
    pub ks: Vec<usize>,
    /// `pass[i][j]`: grid point `j` certified at block index `ks[i]`.
    pub pass: Vec<Vec<bool>>,
    pub min_index: Vec<Option<usize>>,
}

impl SweepResult {
    pub fn geometry(&self, k: usize) -> Result<(f64, f64)> {
        let i = self
            .ks
            .iter()
            .position(|&kk| kk == k)
            .ok_or_else(|| Error::InvalidParameter(format!("k={k} was not swept")))?;
        two_interval_bounds(&self.xs, &self.pass[i])
    }
}

/// Block at index `k` read as `[0, a_k] U [b_k, 1)` on the circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockGeometry {
    pub k: usize,
    pub a_k: f64,
    pub b_k: f64,
    pub grid: usize,
    pub zeta: f64,
    pub horizon: usize,
}

/// Largest `a` and smallest `b` with the passing grid points equal to
/// `[0, a] U [b, 1)`, requiring `a < 1/2 < b`.
pub fn two_interval_bounds(xs: &[f64], pass: &[bool]) -> Result<(f64, f64)> {
    let first_fail = pass.iter().position(|p| !p);
    let last_fail = pass.iter().rposition(|p| !p);
    let (Some(i0), Some(i1)) = (first_fail, last_fail) else {
        return Err(Error::NonIntervalPassingSet("every grid point passes".into()));
    };
    if i0 == 0 {
        return Err(Error::NonIntervalPassingSet("x = 0 fails".into()));
    }
    if let Some(j) = (i0..=i1).find(|&j| pass[j]) {
        return Err(Error::NonIntervalPassingSet(format!(
            "isolated passing point x = {} inside the failing gap",
            xs[j]
        )));
    }
    let a = xs[i0 - 1];
    let b = if i1 + 1 < xs.len() { xs[i1 + 1] } else { 1.0 };
    if !(a < 0.5 && b > 0.5) {
        return Err(Error::NonIntervalPassingSet(format!(
            "failing gap ({a}, {b}) does not contain 1/2"
        )));
    }
    Ok((a, b))
}

/// Block geometry of the product system at `K = 1`, block index `k`.
pub fn block_geometry_example24(zeta: f64, k: usize, grid: usize, horizon: usize) -> Result<BlockGeometry> {
    let res = GeometrySweep::new(zeta, grid, horizon).run(&[k])?;
    let (a_k, b_k) = res.geometry(k)?;
    Ok(BlockGeometry {
        k,
        a_k,
        b_k,
        grid,
        zeta,
        horizon,
    })
}
