use serde::Serialize;

use super::cover::Cover;
use super::transit::TransitionTable;
use crate::dynsys::{StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::shadow::{solve_shadow, PseudoOrbit, ShadowOptions, ShadowResult};

/// Orbit piece `y, ..., f^n(y)` leading from cover element `from` (which
/// holds the end of the previous segment) into `to` (which holds the start
/// of the next).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Connector {
    pub from: usize,
    pub to: usize,
    pub y: StatePoint,
    pub n: usize,
}

/// Segments and connectors assembled into one periodic pseudo-orbit
/// `seg_1, conn_1, seg_2, ..., conn_N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GluePlan {
    pub segments: Vec<(StatePoint, usize)>,
    pub connectors: Vec<Connector>,
    #[serde(skip)]
    pub pseudo: PseudoOrbit,
    /// `p = sum (n_i + X_i)`.
    pub period: usize,
    /// `c_i = sum_{j <= i} (n_j + X_j)`, with `c_0 = 0`; segment `i` starts at `c_{i-1}`.
    pub c: Vec<usize>,
    pub x1: usize,
    pub x2: usize,
    /// `[sum n_i + N X_1, sum n_i + N X_2]`.
    pub period_bounds: (usize, usize),
}

impl GluePlan {
    pub fn period_in_bounds(&self) -> bool {
        (self.period_bounds.0..=self.period_bounds.1).contains(&self.period)
    }

    /// Time at which segment `i` (0-based) starts in the glued orbit.
    pub fn start_time(&self, i: usize) -> usize {
        self.c[i]
    }
}

/// Joins the segments `{x_i, n_i}` cyclically through stored transits.
///
/// For each end `f^{n_i}(x_i)` and next start `x_{i+1}` the transit with the
/// smallest time over all pairs of containing elements is used (ties to the
/// lowest indices).
pub fn glue_segments(
    system: &SystemSpec,
    segments: &[(StatePoint, usize)],
    cover: &Cover,
    table: &TransitionTable,
) -> Result<GluePlan> {
    if segments.is_empty() {
        return Err(Error::InvalidParameter("nothing to glue".into()));
    }
    if cover.dim() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), got: cover.dim() });
    }
    let (x1, x2) = match (table.x1, table.x2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidParameter("transition table has no resolved pair".into())),
    };
    let pieces = segments
        .iter()
        .map(|(x, n)| {
            if *n == 0 {
                return Err(Error::InvalidParameter("segment lengths must be >= 1".into()));
            }
            Ok(system.iterate(x, *n)?.into_points())
        })
        .collect::<Result<Vec<_>>>()?;

    let count = segments.len();
    let mut connectors = Vec::with_capacity(count);
    let mut orbit_pieces = Vec::with_capacity(2 * count);
    for (i, piece) in pieces.iter().enumerate() {
        let end = piece.last().unwrap();
        let next = &segments[(i + 1) % count].0;
        let sources = cover.containing(end);
        let targets = cover.containing(next);
        if sources.is_empty() || targets.is_empty() {
            return Err(Error::Uncovered);
        }
        let mut choice: Option<(usize, usize, usize)> = None;
        for &to in &targets {
            for &from in &sources {
                if let Some(t) = table.get(to, from) {
                    if choice.is_none_or(|(n, _, _)| t.n < n) {
                        choice = Some((t.n, from, to));
                    }
                }
            }
        }
        let (n, from, to) = choice.ok_or(Error::UnresolvedTransition { from: sources[0], to: targets[0] })?;
        let y = table.get(to, from).unwrap().witness;
        orbit_pieces.push(piece.clone());
        orbit_pieces.push(system.iterate(&y, n)?.into_points());
        connectors.push(Connector { from, to, y, n });
    }
    let pseudo = PseudoOrbit::new(orbit_pieces, true, cover.mesh)?;

    let mut c = Vec::with_capacity(count + 1);
    c.push(0);
    for ((_, n), conn) in segments.iter().zip(&connectors) {
        c.push(c.last().unwrap() + n + conn.n);
    }
    let period = c[count];
    let n_sum: usize = segments.iter().map(|(_, n)| n).sum();
    Ok(GluePlan {
        segments: segments.to_vec(),
        connectors,
        pseudo,
        period,
        c,
        x1,
        x2,
        period_bounds: (n_sum + count * x1, n_sum + count * x2),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecificationShadow {
    pub shadow: ShadowResult,
    pub period: usize,
    pub period_in_bounds: bool,
    /// `max_{j <= n_i} rho(f^{c_{i-1} + j}(z), f^j(x_i))` per segment.
    pub deviations: Vec<f64>,
}

impl SpecificationShadow {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

/// Periodic orbit shadowing the glued plan.
pub fn specification_shadow(system: &SystemSpec, plan: &GluePlan, opts: &ShadowOptions) -> Result<SpecificationShadow> {
    let shadow = solve_shadow(system, &plan.pseudo, opts)?;
    let p = shadow.orbit.len();
    if shadow.period != Some(plan.period) || p != plan.period {
        return Err(Error::InvalidParameter(format!(
            "shadow period {:?} differs from the planned {}",
            shadow.period, plan.period
        )));
    }
    let deviations = plan
        .pseudo
        .segments()
        .iter()
        .step_by(2)
        .enumerate()
        .map(|(i, seg)| {
            seg.iter()
                .enumerate()
                .map(|(j, x)| shadow.orbit[(plan.c[i] + j) % p].diff_to(x).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(SpecificationShadow {
        period: plan.period,
        period_in_bounds: plan.period_in_bounds(),
        shadow,
        deviations,
    })
}
