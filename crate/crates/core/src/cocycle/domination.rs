use serde::Serialize;

use super::window::SplittingField;
use crate::dynsys::{subbundle_angle, StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::singular_values;

/// `max_x log(|Df_x| / m(Df_x))` over a sample of points.
pub fn alpha_constant(system: &SystemSpec, sample: &[StatePoint]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let d = system.dim();
    let mut best = 0.0f64;
    for p in sample {
        let j = system.derivative(p)?;
        let s = singular_values(j.matrix(), d, d);
        let smin = s[d - 1];
        if !(smin > 0.0) {
            return Err(Error::SingularRestriction(smin));
        }
        best = best.max((s[0] / smin).ln());
    }
    Ok(best)
}

/// Limit domination `(S, lambda)` upgraded to `(kS + q, k lambda - q alpha / 2)`.
pub fn upgrade_limit_domination(
    s: usize,
    lambda: f64,
    k: usize,
    q: usize,
    alpha: f64,
) -> Result<(usize, f64)> {
    if s == 0 || q >= s {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= q <= S-1, got S={s}, q={q}"
        )));
    }
    let lam = k as f64 * lambda - q as f64 * alpha / 2.0;
    if !(lam > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k={k} too small: upgraded rate {lam} is not positive"
        )));
    }
    Ok((k * s + q, lam))
}

/// `n0 = floor(2 + N (lambda + gamma) / lambda) + 1`.
pub fn domination_upgrade_n0(n: usize, lambda: f64, gamma: f64) -> Result<usize> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if n == 0 || gamma < 0.0 {
        return Err(Error::InvalidParameter("need N >= 1 and gamma >= 0".into()));
    }
    Ok((2.0 + n as f64 * (lambda + gamma) / lambda).floor() as usize + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleReport {
    /// Angle at `f^{iS}(x)` for `i = 0..samples`.
    pub angles: Vec<f64>,
    /// Running infimum over samples `samples/2 ..= i`.
    pub tail_running_inf: Vec<f64>,
    pub e0_hat: f64,
    pub stride: usize,
}

/// Angles between E and F sampled every `stride` steps along the orbit.
pub fn angle_report(
    system: &SystemSpec,
    x: &StatePoint,
    field: &SplittingField,
    stride: usize,
    samples: usize,
) -> Result<AngleReport> {
    if stride == 0 || samples == 0 {
        return Err(Error::InvalidParameter("stride and samples must be >= 1".into()));
    }
    let s0 = field.at(system, x)?;
    let (mut e, mut f) = (*s0.e(), *s0.f());
    let mut cur = *x;
    let mut angles = Vec::with_capacity(samples);
    for i in 0..samples {
        let (es, fs) = match field {
            SplittingField::Reference => {
                let s = system.reference_splitting(&cur)?;
                (*s.e(), *s.f())
            }
            SplittingField::Fixed(s) => (*s.e(), *s.f()),
            SplittingField::Transported(_) => (e, f),
        };
        angles.push(subbundle_angle(&es, &fs)?);
        if i + 1 == samples {
            break;
        }
        for _ in 0..stride {
            let (next, j) = system.step_jac_raw(&cur)?;
            if matches!(field, SplittingField::Transported(_)) {
                e = e.push_forward(&j)?.0;
                f = f.push_forward(&j)?.0;
            }
            cur = next;
        }
    }
    let mut tail_running_inf = Vec::new();
    let mut m = f64::INFINITY;
    for a in &angles[samples / 2..] {
        m = m.min(*a);
        tail_running_inf.push(m);
    }
    Ok(AngleReport {
        angles,
        e0_hat: m,
        tail_running_inf,
        stride,
    })
}
