use serde::Serialize;

use super::linear::solve_orbit_correction;
use super::pseudo::PseudoOrbit;
use crate::dynsys::{torus_distance, StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};

/// Largest window accepted by [`solve_shadow`].
pub const MAX_SHADOW_LENGTH: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShadowOptions {
    /// Converged once every step residual is below `tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ShadowOptions {
    fn default() -> Self {
        ShadowOptions { tol: 1e-12, max_iter: 50 }
    }
}

/// Worst deviation between a candidate orbit and a pseudo-orbit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShadowCheck {
    pub pass: bool,
    pub max_deviation: f64,
    /// Segment and step within it where the worst deviation occurs.
    pub segment: usize,
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowResult {
    pub periodic: bool,
    /// Period `p` of the returned point when periodic.
    pub period: Option<usize>,
    /// The corrected orbit: `p` points when periodic, `p + 1` otherwise.
    pub orbit: Vec<StatePoint>,
    /// `max_{i, j <= n_i} rho(z_{c_i + j}, f^j(x_i))`.
    pub eps_achieved: f64,
    pub worst_segment: usize,
    pub worst_step: usize,
    /// `max_j |z_{j+1} - f(z_j)|` of the returned orbit.
    pub residual: f64,
    pub iterations: usize,
}

impl ShadowResult {
    /// The shadowing point (periodic point when periodic).
    pub fn point(&self) -> &StatePoint {
        &self.orbit[0]
    }
}

fn check_dims(system: &SystemSpec, pseudo: &PseudoOrbit) -> Result<()> {
    if pseudo.dim() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), got: pseudo.dim() });
    }
    Ok(())
}

/// Deviation of `orbit` (indexed by window time, wrapping when periodic)
/// from every pseudo-orbit point.
fn deviation(orbit: &[StatePoint], pseudo: &PseudoOrbit, eps: f64) -> ShadowCheck {
    let p = orbit.len();
    let mut worst = (0.0f64, 0, 0);
    for ((i, seg), c) in pseudo.segments().iter().enumerate().zip(pseudo.offsets()) {
        for (j, target) in seg.iter().enumerate() {
            let d = orbit[(c + j) % p].diff_to(target).norm();
            if d > worst.0 || d.is_nan() {
                worst = (d, i, j);
            }
        }
    }
    ShadowCheck { pass: worst.0 < eps, max_deviation: worst.0, segment: worst.1, step: worst.2 }
}

/// Checks `rho(f^{c_i + j}(x), f^j(x_i)) < eps` over the window, iterating
/// `f` from `x` (aligned with the start of the window).
///
/// Plain iteration amplifies rounding along unstable directions, so for long
/// windows prefer [`verify_shadowing_orbit`] on the corrected orbit.
pub fn verify_shadowing(system: &SystemSpec, x: &StatePoint, pseudo: &PseudoOrbit, eps: f64) -> Result<ShadowCheck> {
    check_dims(system, pseudo)?;
    let orbit = system.iterate(x, pseudo.total_length())?.into_points();
    Ok(deviation(&orbit, pseudo, eps))
}

/// As [`verify_shadowing`], with the orbit given point by point; also
/// returns the orbit's own step residual `max_j |z_{j+1} - f(z_j)|`.
pub fn verify_shadowing_orbit(
    system: &SystemSpec,
    orbit: &[StatePoint],
    pseudo: &PseudoOrbit,
    eps: f64,
) -> Result<(ShadowCheck, f64)> {
    check_dims(system, pseudo)?;
    let p = pseudo.total_length();
    let want = if pseudo.periodic() { p } else { p + 1 };
    if orbit.len() != want {
        return Err(Error::DimensionMismatch { expected: want, got: orbit.len() });
    }
    let (res, _) = residuals(system, orbit, pseudo.periodic(), false)?;
    Ok((deviation(orbit, pseudo, eps), res))
}

/// Step residuals `z_{j+1} - f(z_j)` (and derivatives if asked); returns
/// the largest norm.
fn residuals(
    system: &SystemSpec,
    z: &[StatePoint],
    periodic: bool,
    with_jac: bool,
) -> Result<(f64, Vec<(Vec3, Mat3)>)> {
    let q = if periodic { z.len() } else { z.len() - 1 };
    let d = system.dim();
    let mut out = Vec::with_capacity(if with_jac { q } else { 0 });
    let mut worst = 0.0f64;
    for j in 0..q {
        let (fz, mut a) = if with_jac {
            system.step_jac_raw(&z[j])?
        } else {
            (system.step_raw(&z[j])?, Mat3::zeros())
        };
        let r = fz.diff_to(&z[(j + 1) % z.len()]);
        let n = r.norm();
        if !(n <= worst) {
            worst = n;
        }
        if with_jac {
            for i in 0..3 {
                for k in 0..3 {
                    if i >= d || k >= d {
                        a[(i, k)] = 0.0;
                    }
                }
            }
            out.push((r, a));
        }
    }
    Ok((worst, out))
}

/// Newton correction of the concatenated pseudo-orbit into a true orbit
/// (periodic when the pseudo-orbit is).
///
/// Unknowns are the points `z_0, ..., z_{p-1}` (and `z_p` for open windows,
/// whose endpoints are free); the initial guess is the pseudo-orbit itself.
pub fn solve_shadow(system: &SystemSpec, pseudo: &PseudoOrbit, opts: &ShadowOptions) -> Result<ShadowResult> {
    check_dims(system, pseudo)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", opts.tol)));
    }
    let p = pseudo.total_length();
    if p > MAX_SHADOW_LENGTH {
        return Err(Error::InvalidParameter(format!(
            "window length {p} exceeds {MAX_SHADOW_LENGTH}"
        )));
    }
    let periodic = pseudo.periodic();
    let mut z: Vec<StatePoint> = Vec::with_capacity(p + 1);
    for s in pseudo.segments() {
        z.extend_from_slice(&s[..s.len() - 1]);
    }
    if !periodic {
        z.push(*pseudo.segments().last().unwrap().last().unwrap());
    }

    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        let (res, lin) = residuals(system, &z, periodic, true)?;
        if !res.is_finite() {
            return Err(Error::Diverged { iterations, residual: res });
        }
        if res < opts.tol {
            let check = deviation(&z, pseudo, f64::INFINITY);
            return Ok(ShadowResult {
                periodic,
                period: periodic.then_some(p),
                orbit: z,
                eps_achieved: check.max_deviation,
                worst_segment: check.segment,
                worst_step: check.step,
                residual: res,
                iterations,
            });
        }
        let n = history.len();
        if n >= 2 && res > history[n - 1] && history[n - 1] > history[n - 2] {
            return Err(Error::Diverged { iterations, residual: res });
        }
        if iterations == opts.max_iter {
            return Err(Error::NotConverged { iterations, residual: res });
        }
        history.push(res);
        let (r, a): (Vec<Vec3>, Vec<Mat3>) = lin.into_iter().map(|(r, a)| (-r, a)).unzip();
        let dz = solve_orbit_correction(&a, &r, periodic)?;
        for (zj, d) in z.iter_mut().zip(&dz) {
            *zj = zj.displaced(d);
        }
        iterations += 1;
    }
}

/// Periodic point of period `n` near the orbit segment `{x, n}`, whose end
/// `f^n(x)` should be close to `x`.
pub fn close_orbit(system: &SystemSpec, x: &StatePoint, n: usize, opts: &ShadowOptions) -> Result<ShadowResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("period must be >= 1".into()));
    }
    let seg = system.iterate(x, n)?.into_points();
    let gap = torus_distance(&seg[n], x)?;
    let pseudo = PseudoOrbit::new(vec![seg], true, 2.0 * gap + f64::MIN_POSITIVE)?;
    solve_shadow(system, &pseudo, opts)
}
