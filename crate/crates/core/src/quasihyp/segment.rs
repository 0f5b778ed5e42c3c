use rayon::prelude::*;
use serde::Serialize;

use super::partition::{canonical_partition, PartitionScheme};
use crate::cocycle::{OrbitCocycle, SplittingField};
use crate::dynsys::{torus_distance, StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{chord, Subspace};

/// Signed slacks of the three quasi-hyperbolicity inequalities, one entry
/// per piece `k = 1..=m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiHypCertificate {
    pub zeta: f64,
    /// Largest gap of the partition.
    pub e: usize,
    /// Dimension of the contracting bundle.
    pub q_dim: usize,
    pub partition: Vec<usize>,
    /// `-zeta - (1/t_k) sum_{j<=k} log |Df|E|` over pieces.
    pub slack_contraction: Vec<f64>,
    /// `(1/(t_m - t_{k-1})) sum_{j>=k} log m(Df|F) - zeta`.
    pub slack_expansion: Vec<f64>,
    /// `-2 zeta - (1/gap_k) log(|Df|E| / m(Df|F))` on piece `k`.
    pub slack_domination: Vec<f64>,
    pub min_slack: f64,
    pub pass: bool,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Evaluates the three inequalities on `{x, n}` for the given partition.
///
/// The splitting is carried along the segment by `field`; the backward
/// averages (2) are anchored at the end of the segment.
pub fn check_quasi_hyperbolic(
    system: &SystemSpec,
    x: &StatePoint,
    n: usize,
    field: &SplittingField,
    zeta: f64,
    partition: &PartitionScheme,
) -> Result<QuasiHypCertificate> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!("zeta must be positive, got {zeta}")));
    }
    if partition.n() != n {
        return Err(Error::InvalidParameter(format!(
            "partition ends at {} but the segment has length {n}",
            partition.n()
        )));
    }
    PartitionScheme::from_times(partition.times.clone())?;
    let cyc = OrbitCocycle::build(system, x, field, 0, n)?;
    let t = &partition.times;
    let m = partition.m();
    let mut log_e = Vec::with_capacity(m);
    let mut log_f = Vec::with_capacity(m);
    for w in t.windows(2) {
        let (s, len) = (w[0] as i64, w[1] - w[0]);
        log_e.push(cyc.log_norm_e(s, len));
        log_f.push(cyc.log_conorm_f(s, len));
    }

    let mut acc = 0.0;
    let slack_contraction: Vec<f64> = (0..m)
        .map(|j| {
            acc += log_e[j];
            -zeta - acc / t[j + 1] as f64
        })
        .collect();
    let mut slack_expansion = vec![0.0; m];
    let mut acc = 0.0;
    for j in (0..m).rev() {
        acc += log_f[j];
        slack_expansion[j] = acc / (n - t[j]) as f64 - zeta;
    }
    let slack_domination: Vec<f64> = (0..m)
        .map(|j| -2.0 * zeta - (log_e[j] - log_f[j]) / (t[j + 1] - t[j]) as f64)
        .collect();

    let min_slack = min_of(&slack_contraction)
        .min(min_of(&slack_expansion))
        .min(min_of(&slack_domination));
    Ok(QuasiHypCertificate {
        zeta,
        e: partition.max_gap(),
        q_dim: cyc.dims().0,
        partition: t.clone(),
        slack_contraction,
        slack_expansion,
        slack_domination,
        min_slack,
        pass: min_slack >= 0.0,
    })
}

/// One piece `{x_i, n_i}` of a pseudo-orbit with its splitting.
#[derive(Clone, Debug)]
pub struct QhSegment {
    pub x: StatePoint,
    pub n: usize,
    pub field: SplittingField,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QhPseudoOrbitReport {
    pub pass: bool,
    pub zeta: f64,
    pub e: usize,
    pub delta: f64,
    /// `None` for segments shorter than `2kK`, which have no canonical partition.
    pub certificates: Vec<Option<QuasiHypCertificate>>,
    /// `gaps[i]` is the distance from `f^{n_i}(x_i)` to `x_{i+1}`.
    pub gaps: Vec<f64>,
    /// First segment that fails.
    pub failed_segment: Option<usize>,
    /// First gap that is not below `delta`.
    pub failed_gap: Option<usize>,
}

/// Checks a `(zeta, e)`-quasi-hyperbolic `delta`-pseudo-orbit.
///
/// Each segment is tested with its canonical partition at block size
/// `k_block` and `k = e / K - 1`, so `e` must be a multiple `(k+1)K` with
/// `k >= 1`.
pub fn check_qh_pseudo_orbit(
    system: &SystemSpec,
    segments: &[QhSegment],
    zeta: f64,
    e: usize,
    k_block: usize,
    delta: f64,
) -> Result<QhPseudoOrbitReport> {
    if k_block == 0 || e % k_block != 0 || e / k_block < 2 {
        return Err(Error::InvalidParameter(format!(
            "e = {e} is not of the form (k+1)K with k >= 1 and K = {k_block}"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let k = e / k_block - 1;
    let mut dim_e = None;
    for s in segments {
        let d = s.field.at(system, &s.x)?.dims().0;
        match dim_e {
            Some(d0) if d0 != d => return Err(Error::DimensionMismatch { expected: d0, got: d }),
            _ => dim_e = Some(d),
        }
    }

    let certificates = segments
        .par_iter()
        .map(|s| match canonical_partition(s.n, k, k_block) {
            Ok(p) => check_quasi_hyperbolic(system, &s.x, s.n, &s.field, zeta, &p).map(Some),
            Err(_) => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps = segments
        .windows(2)
        .map(|w| torus_distance(&system.iterate_to(&w[0].x, w[0].n)?, &w[1].x))
        .collect::<Result<Vec<_>>>()?;

    let failed_segment = certificates
        .iter()
        .position(|c| !c.as_ref().is_some_and(|c| c.pass && c.e <= e));
    let failed_gap = gaps.iter().position(|&g| !(g < delta));
    Ok(QhPseudoOrbitReport {
        pass: failed_segment.is_none() && failed_gap.is_none(),
        zeta,
        e,
        delta,
        certificates,
        gaps,
        failed_segment,
        failed_gap,
    })
}

/// Largest distance from a unit vector of `image` to the nearest unit
/// vector of `target`: the chord of the largest principal angle.
pub fn subspace_gap(image: &Subspace, target: &Subspace) -> Result<f64> {
    if image.ambient() != target.ambient() {
        return Err(Error::DimensionMismatch {
            expected: target.ambient(),
            got: image.ambient(),
        });
    }
    if image.rank() != target.rank() {
        return Err(Error::DimensionMismatch {
            expected: target.rank(),
            got: image.rank(),
        });
    }
    Ok(chord(image.max_principal_angle(target)))
}
