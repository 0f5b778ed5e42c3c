use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::newton::{close_orbit, solve_shadow, ShadowOptions};
use super::pseudo::PseudoOrbit;
use crate::dynsys::{torus_distance, StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::Vec3;

/// Settings for [`estimate_shadowing_constant`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowProbeConfig {
    /// Gap sizes, descending.
    pub deltas: Vec<f64>,
    pub trials: usize,
    /// Inclusive range of segment lengths.
    pub len_range: (usize, usize),
    pub segments: usize,
    pub seed: u64,
    pub opts: ShadowOptions,
}

impl Default for ShadowProbeConfig {
    fn default() -> Self {
        ShadowProbeConfig {
            deltas: vec![1e-4, 1e-6, 1e-8],
            trials: 20,
            len_range: (10, 30),
            segments: 5,
            seed: 0,
            opts: ShadowOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaSummary {
    pub delta: f64,
    pub converged: usize,
    pub failed: usize,
    /// Largest `eps_achieved / delta` among converged trials.
    pub max_ratio: f64,
    /// `eps_achieved` per trial, `None` where the solver failed.
    pub eps: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowingConstants {
    /// Largest observed `eps_achieved / delta`.
    pub l_hat: f64,
    /// Largest `delta` at which every trial converged (0 if none).
    pub d0_hat: f64,
    pub trials: usize,
    pub per_delta: Vec<DeltaSummary>,
}

pub(crate) fn random_point(rng: &mut impl Rng, dim: usize) -> StatePoint {
    let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    StatePoint::new(&c).unwrap()
}

/// Uniformly distributed unit vector in the first `dim` coordinates.
pub(crate) fn random_direction(rng: &mut impl Rng, dim: usize) -> Vec3 {
    loop {
        let mut v = Vec3::zeros();
        for i in 0..dim {
            v[i] = rng.random_range(-1.0..1.0);
        }
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A true orbit cut into segments, each cut displaced by `u * delta` with
/// `u` in `[1/2, 1)`. The same `rng` state gives the same shape for every delta.
fn perturbed_orbit(
    system: &SystemSpec,
    rng: &mut ChaCha8Rng,
    cfg: &ShadowProbeConfig,
    delta: f64,
) -> Result<PseudoOrbit> {
    let dim = system.dim();
    let mut x = random_point(rng, dim);
    let mut segments = Vec::with_capacity(cfg.segments);
    for i in 0..cfg.segments {
        let n = rng.random_range(cfg.len_range.0..=cfg.len_range.1);
        let dir = random_direction(rng, dim);
        let u: f64 = rng.random_range(0.5..1.0);
        if i > 0 {
            x = x.displaced(&(dir * (u * delta)));
        }
        let seg = system.iterate(&x, n)?.into_points();
        x = seg[n];
        segments.push(seg);
    }
    PseudoOrbit::new(segments, false, delta.max(f64::MIN_POSITIVE))
}

/// Empirical shadowing constants: solves perturbed true orbits at each delta
/// and records `eps_achieved / delta`.
pub fn estimate_shadowing_constant(system: &SystemSpec, cfg: &ShadowProbeConfig) -> Result<ShadowingConstants> {
    if cfg.deltas.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidParameter("deltas must be finite and non-negative".into()));
    }
    if cfg.len_range.0 == 0 || cfg.len_range.0 > cfg.len_range.1 || cfg.segments == 0 {
        return Err(Error::InvalidParameter(format!(
            "invalid segment settings: lengths {:?}, {} segments",
            cfg.len_range, cfg.segments
        )));
    }
    let per_delta = cfg
        .deltas
        .iter()
        .map(|&delta| {
            let eps = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(t as u64);
                    let pseudo = perturbed_orbit(system, &mut rng, cfg, delta)?;
                    Ok(solve_shadow(system, &pseudo, &cfg.opts).ok().map(|r| r.eps_achieved))
                })
                .collect::<Result<Vec<_>>>()?;
            let converged = eps.iter().flatten().count();
            let max_ratio = if delta > 0.0 {
                eps.iter().flatten().map(|e| e / delta).fold(0.0, f64::max)
            } else {
                0.0
            };
            Ok(DeltaSummary { delta, converged, failed: cfg.trials - converged, max_ratio, eps })
        })
        .collect::<Result<Vec<_>>>()?;
    let l_hat = per_delta.iter().map(|s| s.max_ratio).fold(0.0, f64::max);
    let d0_hat = per_delta
        .iter()
        .filter(|s| s.failed == 0)
        .map(|s| s.delta)
        .fold(0.0, f64::max);
    Ok(ShadowingConstants { l_hat, d0_hat, trials: cfg.trials, per_delta })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbePoint {
    pub point: StatePoint,
    pub status: ProbeStatus,
    /// Period of the periodic orbit found within `eps`.
    pub period: Option<usize>,
    /// Distance from the sample point to that orbit.
    pub distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityProbe {
    /// Passed over evaluated (not skipped) points; `None` if all were skipped.
    pub fraction: Option<f64>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub points: Vec<ProbePoint>,
}

/// Points where the closing search is not attempted: the invariant circle
/// `x = 1/2` of the product system carries no hyperbolic splitting.
fn outside_search_domain(system: &SystemSpec, x: &StatePoint) -> bool {
    matches!(system, SystemSpec::Product24) && (x.coords()[0] - 0.5).abs() < 1e-12
}

/// For each sample point, closes the orbit segment of length `n` centred at
/// it (`n = 1..=n_max`) and accepts the first periodic orbit passing within
/// `eps` of the point.
pub fn periodic_density_probe(
    system: &SystemSpec,
    sample: &[StatePoint],
    n_max: usize,
    eps: f64,
    opts: &ShadowOptions,
) -> Result<DensityProbe> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    if n_max == 0 || !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("need n_max >= 1 and eps > 0, got {n_max}, {eps}")));
    }
    let points = sample
        .par_iter()
        .map(|x| probe_point(system, x, n_max, eps, opts))
        .collect::<Result<Vec<_>>>()?;
    let count = |s| points.iter().filter(|p| p.status == s).count();
    let (passed, failed, skipped) = (count(ProbeStatus::Passed), count(ProbeStatus::Failed), count(ProbeStatus::Skipped));
    let fraction = (passed + failed > 0).then(|| passed as f64 / (passed + failed) as f64);
    Ok(DensityProbe { fraction, passed, failed, skipped, points })
}

fn probe_point(system: &SystemSpec, x: &StatePoint, n_max: usize, eps: f64, opts: &ShadowOptions) -> Result<ProbePoint> {
    system.check(x)?;
    let mut out = ProbePoint { point: *x, status: ProbeStatus::Skipped, period: None, distance: None };
    if outside_search_domain(system, x) {
        return Ok(out);
    }
    out.status = ProbeStatus::Failed;
    for n in 1..=n_max {
        // Centring the segment keeps the closing correction at x small in
        // both the stable and unstable directions.
        let back = if system.has_inverse() { n / 2 } else { 0 };
        let mut y = *x;
        for _ in 0..back {
            y = system.inverse_step(&y)?;
        }
        let Ok(r) = close_orbit(system, &y, n, opts) else { continue };
        let d = torus_distance(&r.orbit[back % n], x)?;
        if d < eps {
            out.status = ProbeStatus::Passed;
            out.period = Some(n);
            out.distance = Some(d);
            break;
        }
    }
    Ok(out)
}
