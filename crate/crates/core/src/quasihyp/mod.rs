//! Quasi-hyperbolic orbit segments, the canonical partition and
//! quasi-hyperbolic pseudo-orbits.

mod partition;
mod segment;

pub use partition::{canonical_partition, PartitionScheme};
pub use segment::{
    check_qh_pseudo_orbit, check_quasi_hyperbolic, subspace_gap, QhPseudoOrbitReport,
    QhSegment, QuasiHypCertificate,
};
