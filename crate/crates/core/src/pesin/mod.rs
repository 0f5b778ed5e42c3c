//! Pesin-block certificates, parameter budgets and block geometry.

mod budget;
mod certificate;
mod degree;
mod geometry;

pub use budget::{beta_from_inputs, budget_from_inputs, HyperbolicityBudget};
pub use certificate::{
    check_block_membership, min_block_index, BlockCertificate, BlockProfile, PesinParams,
    MIN_HORIZON_MARGIN,
};
pub use degree::{mean_hyperbolicity_degree, MeanHyperbolicityDegree};
pub use geometry::{
    block_geometry_example24, two_interval_bounds, BlockGeometry, GeometrySweep, SweepResult,
};
