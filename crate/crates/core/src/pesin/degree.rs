use serde::Serialize;

use crate::cocycle::{OrbitCocycle, SplittingField};
use crate::dynsys::{StatePoint, SystemSpec};
use crate::error::{Error, Result};

/// Tail extrema of block-averaged exponents, per step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanHyperbolicityDegree {
    /// Max over `l` in `[L/2, L]` of `(1/lK) sum_{j<l} log |Df^K|E(f^{jK}x)|`.
    pub forward_e: f64,
    /// Min over `l` in `[L/2, L]` of `(1/lK) sum_{j=-l}^{-1} log m(Df^K|F(f^{jK}x))`.
    pub backward_f: f64,
}

impl MeanHyperbolicityDegree {
    pub fn qualifies(&self, zeta: f64) -> bool {
        zeta > 0.0 && self.forward_e <= -zeta && self.backward_f >= zeta
    }

    /// Largest `zeta` at which the point qualifies (non-positive if none).
    pub fn max_zeta(&self) -> f64 {
        (-self.forward_e).min(self.backward_f)
    }
}

pub fn mean_hyperbolicity_degree(
    system: &SystemSpec,
    x: &StatePoint,
    field: &SplittingField,
    k_block: usize,
    horizon: usize,
) -> Result<MeanHyperbolicityDegree> {
    if k_block == 0 {
        return Err(Error::InvalidParameter("block size K must be >= 1".into()));
    }
    if horizon < 10 {
        return Err(Error::InvalidParameter(format!(
            "horizon must be at least 10 blocks, got {horizon}"
        )));
    }
    let n = horizon * k_block;
    let cyc = OrbitCocycle::build(system, x, field, n, n)?;
    let (a, _) = crate::cocycle::block_logs(&cyc, k_block, horizon);
    let kk = k_block as i64;
    let mut fwd = f64::NEG_INFINITY;
    let mut bwd = f64::INFINITY;
    let (mut sa, mut sb) = (0.0, 0.0);
    for l in 1..=horizon {
        sa += a[l - 1];
        sb += cyc.log_conorm_f(-(l as i64) * kk, k_block);
        if l >= horizon / 2 {
            let len = (l * k_block) as f64;
            fwd = fwd.max(sa / len);
            bwd = bwd.min(sb / len);
        }
    }
    Ok(MeanHyperbolicityDegree {
        forward_e: fwd,
        backward_f: bwd,
    })
}
