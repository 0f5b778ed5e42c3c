use serde::Serialize;

use super::window::{OrbitCocycle, SplittingField};
use crate::dynsys::{StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{thin_qr, Mat3};

/// Exponents closer than this (per step) are reported as one with multiplicity.
pub const MERGE_TOL: f64 = 1e-4;
/// Shortest run accepted by [`lyapunov_spectrum`].
pub const MIN_LYAPUNOV_HORIZON: usize = 1000;
const MAX_BURN_IN: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovSpectrum {
    /// Distinct exponents, strictly increasing.
    pub exponents: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// Number of distinct negative exponents.
    pub stable_index: usize,
    /// All `d` exponents before merging, ascending.
    pub raw: Vec<f64>,
    pub horizon: usize,
    pub burn_in: usize,
}

impl LyapunovSpectrum {
    /// Exponents repeated by multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.exponents
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(l, m)| std::iter::repeat_n(*l, *m))
            .collect()
    }
}

fn merge(raw: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for &l in raw {
        match groups.last_mut() {
            Some(g) if (l - g[g.len() - 1]).abs() <= MERGE_TOL => g.push(l),
            _ => groups.push(vec![l]),
        }
    }
    let ex = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    let mult = groups.iter().map(|g| g.len()).collect();
    (ex, mult)
}

/// Per-step Lyapunov exponents by QR reorthonormalization at every step.
///
/// The frame is first aligned during a burn-in of `min(horizon/10, 1000)`
/// steps, then the logs of the diagonal of `R` are averaged over `horizon`
/// further steps.
pub fn lyapunov_spectrum(system: &SystemSpec, x: &StatePoint, horizon: usize) -> Result<LyapunovSpectrum> {
    system.check(x)?;
    if horizon < MIN_LYAPUNOV_HORIZON {
        return Err(Error::InvalidParameter(format!(
            "Lyapunov horizon must be at least {MIN_LYAPUNOV_HORIZON}, got {horizon}"
        )));
    }
    let d = system.dim();
    let burn_in = (horizon / 10).min(MAX_BURN_IN);
    let mut q = Mat3::identity();
    let mut sums = [0.0f64; 3];
    let mut cur = *x;
    for step in 0..burn_in + horizon {
        let (next, j) = system.step_jac_raw(&cur)?;
        let (nq, r) = thin_qr(&(j * q), d)?;
        if step >= burn_in {
            for (i, s) in sums.iter_mut().enumerate().take(d) {
                *s += r.m[(i, i)].ln();
            }
        }
        q = nq;
        cur = next;
    }
    let mut raw: Vec<f64> = sums[..d].iter().map(|s| s / horizon as f64).collect();
    raw.sort_by(f64::total_cmp);
    let (exponents, multiplicities) = merge(&raw);
    let stable_index = exponents.iter().filter(|l| **l < 0.0).count();
    Ok(LyapunovSpectrum {
        exponents,
        multiplicities,
        stable_index,
        raw,
        horizon,
        burn_in,
    })
}

/// Finite-horizon exponents of the cocycle on E and F.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanExponentReport {
    /// `log |Df^{LK}|E(x)| / LK`.
    pub lambda_s_hat: f64,
    /// `log m(Df^{LK}|F(x)) / LK`.
    pub lambda_u_hat: f64,
    /// Birkhoff average of `log |Df^K|E|` over the blocks, per step.
    pub lambda_sup_s_hat: f64,
    /// Birkhoff average of `log m(Df^K|F)` over the blocks, per step.
    pub lambda_sup_u_hat: f64,
    /// Max over blocks `j` in `[L/2, L)` of `log(|Df^K|E| / m(Df^K|F)) / K` at `f^{jK}(x)`.
    pub limdom_hat: f64,
    pub horizon: usize,
    pub block: usize,
}

/// Per-block logs `(log |Df^K|E|, log m(Df^K|F))` at `f^{jK}(x)`, `j < l`.
pub(crate) fn block_logs(cyc: &OrbitCocycle, k_block: usize, l: usize) -> (Vec<f64>, Vec<f64>) {
    let a = (0..l)
        .map(|j| cyc.log_norm_e((j * k_block) as i64, k_block))
        .collect();
    let b = (0..l)
        .map(|j| cyc.log_conorm_f((j * k_block) as i64, k_block))
        .collect();
    (a, b)
}

pub fn mean_exponents(
    system: &SystemSpec,
    x: &StatePoint,
    field: &SplittingField,
    k_block: usize,
    horizon: usize,
) -> Result<MeanExponentReport> {
    if k_block == 0 {
        return Err(Error::InvalidParameter("block size K must be >= 1".into()));
    }
    if horizon < 10 {
        return Err(Error::InvalidParameter(format!(
            "horizon must be at least 10 blocks, got {horizon}"
        )));
    }
    let n = horizon * k_block;
    let cyc = OrbitCocycle::build(system, x, field, 0, n)?;
    let (a, b) = block_logs(&cyc, k_block, horizon);
    let nf = n as f64;
    let limdom_hat = (horizon / 2..horizon)
        .map(|j| (a[j] - b[j]) / k_block as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MeanExponentReport {
        lambda_s_hat: cyc.log_norm_e(0, n) / nf,
        lambda_u_hat: cyc.log_conorm_f(0, n) / nf,
        lambda_sup_s_hat: a.iter().sum::<f64>() / nf,
        lambda_sup_u_hat: b.iter().sum::<f64>() / nf,
        limdom_hat,
        horizon,
        block: k_block,
    })
}
