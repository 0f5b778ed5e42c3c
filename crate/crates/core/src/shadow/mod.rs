//! Pseudo-orbits and their correction into true and periodic orbits.

mod linear;
mod newton;
mod probe;
mod pseudo;

pub use newton::{
    close_orbit, solve_shadow, verify_shadowing, verify_shadowing_orbit, ShadowCheck,
    ShadowOptions, ShadowResult, MAX_SHADOW_LENGTH,
};
pub use probe::{
    estimate_shadowing_constant, periodic_density_probe, DeltaSummary, DensityProbe,
    ProbePoint, ProbeStatus, ShadowProbeConfig, ShadowingConstants,
};
pub use pseudo::{cumulative_times, PseudoOrbit};
pub(crate) use probe::random_point;
#[cfg(test)]
pub(crate) use probe::random_direction;

#[cfg(test)]
mod tests;
