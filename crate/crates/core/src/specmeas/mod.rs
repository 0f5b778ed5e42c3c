//! Covers, transition times, gluing of orbit segments into periodic orbits,
//! and periodic approximation of invariant measures.

mod approx;
mod cover;
mod glue;
mod measure;
mod transit;

pub use approx::{approximate_invariant_measure, ApproxConfig, MeasureApproximation, MeasureApproximator};
pub use cover::{build_cover, Cover};
pub use glue::{glue_segments, specification_shadow, Connector, GluePlan, SpecificationShadow};
pub use measure::{characters, weak_star_distance, EmpiricalMeasure};
pub use transit::{transition_times, transition_times_along, Transit, TransitSampling, TransitionTable};
