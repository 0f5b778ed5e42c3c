use serde::Serialize;

use super::cover::{build_cover, Cover};
use super::glue::{glue_segments, specification_shadow};
use super::measure::{weak_star_distance, EmpiricalMeasure};
use super::transit::{transition_times_along, TransitionTable};
use crate::dynsys::{StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::shadow::ShadowOptions;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproxConfig {
    pub mesh: f64,
    /// Total length `sum n_i` of the segments cut from the sample orbit.
    pub budget: usize,
    pub segment_len: usize,
    pub min_transit: usize,
    pub horizon: usize,
    pub degree: usize,
    pub opts: ShadowOptions,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            mesh: 0.05,
            budget: 10_000,
            segment_len: 100,
            min_transit: 4,
            horizon: 1000,
            degree: 3,
            opts: ShadowOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureApproximation {
    pub budget: usize,
    pub segments: usize,
    pub period: usize,
    pub period_bounds: (usize, usize),
    pub distance: f64,
    pub max_deviation: f64,
    pub residual: f64,
    #[serde(skip)]
    pub measure: EmpiricalMeasure,
}

/// Cover and transition table of one sample orbit, reusable across budgets.
#[derive(Clone, Debug)]
pub struct MeasureApproximator<'a> {
    system: &'a SystemSpec,
    orbit: &'a [StatePoint],
    target: EmpiricalMeasure,
    cover: Cover,
    table: TransitionTable,
}

impl<'a> MeasureApproximator<'a> {
    /// `orbit` lists consecutive iterates; the target is their uniform measure.
    pub fn new(
        system: &'a SystemSpec,
        orbit: &'a [StatePoint],
        mesh: f64,
        min_transit: usize,
        horizon: usize,
    ) -> Result<Self> {
        if orbit.len() < 2 {
            return Err(Error::InvalidParameter("sample orbit needs at least two points".into()));
        }
        let target = EmpiricalMeasure::uniform(orbit.to_vec())?;
        let cover = build_cover(orbit, mesh)?;
        let table = transition_times_along(&cover, min_transit, horizon, &[orbit])?;
        Ok(MeasureApproximator { system, orbit, target, cover, table })
    }

    pub fn target(&self) -> &EmpiricalMeasure {
        &self.target
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn table(&self) -> &TransitionTable {
        &self.table
    }

    /// Cuts `budget / segment_len` evenly spaced segments from the orbit,
    /// glues and shadows them, and compares the periodic measure with the target.
    pub fn approximate(
        &self,
        budget: usize,
        segment_len: usize,
        degree: usize,
        opts: &ShadowOptions,
    ) -> Result<MeasureApproximation> {
        if segment_len == 0 {
            return Err(Error::InvalidParameter("segment length must be >= 1".into()));
        }
        let count = (budget / segment_len).max(1);
        let room = self.orbit.len() - 1;
        if count * segment_len > room {
            return Err(Error::InvalidParameter(format!(
                "{count} segments of length {segment_len} do not fit in {room} orbit steps"
            )));
        }
        let stride = room / count;
        let segments: Vec<(StatePoint, usize)> =
            (0..count).map(|i| (self.orbit[i * stride], segment_len)).collect();
        let plan = glue_segments(self.system, &segments, &self.cover, &self.table)?;
        let spec = specification_shadow(self.system, &plan, opts)?;
        let max_deviation = spec.max_deviation();
        let measure = EmpiricalMeasure::uniform(spec.shadow.orbit)?;
        let distance = weak_star_distance(&measure, &self.target, degree)?;
        Ok(MeasureApproximation {
            budget: count * segment_len,
            segments: count,
            period: plan.period,
            period_bounds: plan.period_bounds,
            distance,
            max_deviation,
            residual: spec.shadow.residual,
            measure,
        })
    }
}

/// Periodic approximant of the uniform measure on `orbit`.
pub fn approximate_invariant_measure(
    system: &SystemSpec,
    orbit: &[StatePoint],
    cfg: &ApproxConfig,
) -> Result<MeasureApproximation> {
    MeasureApproximator::new(system, orbit, cfg.mesh, cfg.min_transit, cfg.horizon)?.approximate(
        cfg.budget,
        cfg.segment_len,
        cfg.degree,
        &cfg.opts,
    )
}
