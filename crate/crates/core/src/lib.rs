//! Finite-horizon diagnostics for non-uniformly hyperbolic torus maps.
//!
//! The crate is organised bottom-up: `dynsys` defines the maps, `cocycle`
//! evaluates derivative products along orbits, `pesin` and `quasihyp` turn
//! those products into membership certificates, `shadow` corrects
//! pseudo-orbits into true (or periodic) orbits, and `specmeas` glues
//! certified segments into periodic orbits approximating invariant measures.

pub mod cocycle;
pub mod dynsys;
pub mod error;
pub mod format;
pub mod linalg;
pub mod pesin;
pub mod quasihyp;
pub mod shadow;
pub mod specmeas;

pub use error::{Error, Result};
