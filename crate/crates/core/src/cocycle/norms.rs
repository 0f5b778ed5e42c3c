use serde::{Deserialize, Serialize};

use super::window::{OrbitCocycle, SplittingField};
use crate::dynsys::{Jacobian, StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::Subspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bundle {
    E,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Fwd,
    Bwd,
}

/// Singular values of `J` restricted to `V`, as a map from `V` onto `J(V)`.
fn restricted_extremes(j: &Jacobian, v: &Subspace) -> Result<(f64, f64)> {
    if v.ambient() != j.dim() {
        return Err(Error::DimensionMismatch {
            expected: j.dim(),
            got: v.ambient(),
        });
    }
    match v.push_forward(j.matrix()) {
        Ok((_, r)) => Ok(r.sigma_extremes()),
        Err(Error::RankDeficient(_)) => Err(Error::SingularRestriction(0.0)),
        Err(e) => Err(e),
    }
}

/// `m(J|V) = |(J|V)^{-1}|^{-1}`, the smallest singular value of the restriction.
pub fn minimal_norm(j: &Jacobian, v: &Subspace) -> Result<f64> {
    let (_, smin) = restricted_extremes(j, v)?;
    if !(smin > 0.0) {
        return Err(Error::SingularRestriction(smin));
    }
    Ok(smin)
}

/// `|J|V|`, the largest singular value of the restriction.
pub fn operator_norm(j: &Jacobian, v: &Subspace) -> Result<f64> {
    Ok(restricted_extremes(j, v)?.0)
}

/// Per-block log norms with the remainder term split off.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockLogs {
    pub blocks: Vec<f64>,
    pub remainder: f64,
}

impl BlockLogs {
    pub fn sum(&self) -> f64 {
        self.remainder + self.blocks.iter().sum::<f64>()
    }
}

/// Log operator norms (E) or log minimal norms (F) of `Df^K` over `l` blocks.
///
/// Forward: blocks start at `f^{jK+r}(x)`, `j = 0..l`, and the remainder is
/// the length-`r` piece at `x`. Backward: blocks start at `f^{jK}(x)`,
/// `j = -l..-1`, and the remainder is the length-`r` piece at `f^{-lK-r}(x)`.
#[allow(clippy::too_many_arguments)]
pub fn log_norm_blocks(
    system: &SystemSpec,
    x: &StatePoint,
    field: &SplittingField,
    bundle: Bundle,
    k_block: usize,
    l: usize,
    r: usize,
    direction: Direction,
) -> Result<BlockLogs> {
    if k_block == 0 {
        return Err(Error::InvalidParameter("block size K must be >= 1".into()));
    }
    if r >= k_block {
        return Err(Error::InvalidParameter(format!(
            "remainder r={r} must be < K={k_block}"
        )));
    }
    let span = l * k_block + r;
    let (back, forward) = match direction {
        Direction::Fwd => (0, span),
        Direction::Bwd => (span, 0),
    };
    let cyc = OrbitCocycle::build(system, x, field, back, forward)?;
    let piece = |start: i64, len: usize| match bundle {
        Bundle::E => cyc.log_norm_e(start, len),
        Bundle::F => cyc.log_conorm_f(start, len),
    };
    let kk = k_block as i64;
    Ok(match direction {
        Direction::Fwd => BlockLogs {
            blocks: (0..l as i64).map(|j| piece(j * kk + r as i64, k_block)).collect(),
            remainder: piece(0, r),
        },
        Direction::Bwd => BlockLogs {
            blocks: (-(l as i64)..0).map(|j| piece(j * kk, k_block)).collect(),
            remainder: piece(-(span as i64), r),
        },
    })
}
