//! Torus diffeomorphisms, their derivatives and known invariant splittings.

pub mod circle;
pub mod composite;
mod orbit;
mod point;
mod splitting;
mod system;

pub use composite::{CompositeDef, CompositeMap};
pub use orbit::OrbitSegment;
pub use point::{reduce, torus_distance, wrap_diff, StatePoint};
pub use splitting::{subbundle_angle, Splitting, SplittingDef, DEGENERATE_ANGLE};
pub use system::{
    derivative, iterate, reference_splitting, step, Jacobian, SystemKind, SystemSpec,
    CAT_E_S, CAT_E_U, CAT_LAMBDA_S, CAT_LAMBDA_U,
};

#[cfg(test)]
mod tests;
