//! Derivative cocycles along orbits: restricted norms, exponents and the
//! limit-domination parameter algebra.

mod domination;
mod exponents;
mod norms;
mod window;

pub use domination::{
    alpha_constant, angle_report, domination_upgrade_n0, upgrade_limit_domination, AngleReport,
};
pub use exponents::{
    lyapunov_spectrum, mean_exponents, LyapunovSpectrum, MeanExponentReport, MERGE_TOL,
    MIN_LYAPUNOV_HORIZON,
};
pub(crate) use exponents::block_logs;
pub use norms::{log_norm_blocks, minimal_norm, operator_norm, BlockLogs, Bundle, Direction};
pub use window::{OrbitCocycle, SplittingField};
pub(crate) use window::{check_invariant, invert};

pub use crate::dynsys::subbundle_angle;

#[cfg(test)]
mod tests;
