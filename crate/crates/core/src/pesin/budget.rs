use serde::Serialize;

use crate::error::{Error, Result};

/// Exponent and domination inputs with the derived rates of the full-measure argument.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperbolicityBudget {
    pub lambda_s: f64,
    pub lambda_u: f64,
    #[serde(rename = "S")]
    pub s: usize,
    pub lambda: f64,
    pub alpha: f64,
    /// `min(-lambda_s, lambda_u, lambda / S)`.
    pub beta: f64,
    pub zeta: f64,
    /// `(beta + zeta) / 2`.
    pub chi: f64,
    pub k1_floor: usize,
    #[serde(rename = "K0")]
    pub k0: usize,
}

/// Largest admissible rate: `beta = min(-lambda_s, lambda_u, lambda / S)`.
/// Admissible `zeta` are exactly those in the open interval `(0, beta)`.
pub fn beta_from_inputs(lambda_s: f64, lambda_u: f64, s: usize, lambda: f64) -> Result<f64> {
    if !(lambda_s < 0.0 && lambda_u > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need lambda_s < 0 < lambda_u, got {lambda_s}, {lambda_u}"
        )));
    }
    if s == 0 || !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need S >= 1 and lambda > 0, got S={s}, lambda={lambda}"
        )));
    }
    Ok((-lambda_s).min(lambda_u).min(lambda / s as f64))
}

pub fn budget_from_inputs(
    lambda_s: f64,
    lambda_u: f64,
    s: usize,
    lambda: f64,
    alpha: f64,
    zeta: f64,
    k1_floor: usize,
) -> Result<HyperbolicityBudget> {
    let beta = beta_from_inputs(lambda_s, lambda_u, s, lambda)?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if !(zeta > 0.0 && zeta < beta) {
        return Err(Error::InvalidParameter(format!(
            "zeta = {zeta} outside the admissible range (0, {beta})"
        )));
    }
    let k1_floor = k1_floor.max(1);
    let need = (s - 1) as f64 * (2.0 * beta + alpha) / (beta - zeta);
    let k0 = k1_floor.max(need.ceil() as usize);
    Ok(HyperbolicityBudget {
        lambda_s,
        lambda_u,
        s,
        lambda,
        alpha,
        beta,
        zeta,
        chi: 0.5 * (beta + zeta),
        k1_floor,
        k0,
    })
}
