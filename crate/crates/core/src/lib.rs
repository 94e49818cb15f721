//! Construction, oracle simulation and spectral verification bench for
//! obfuscated tunnel graphs.
//!
//! The crate builds the random instance family (a path whose vertices are
//! blown up into funnel and tunnel clusters, then hidden under recursive
//! decoration trees), exposes it to classical query algorithms through a
//! metered, randomly relabeled adjacency-list oracle, and checks the
//! eigenstructure that a quantum walk or adiabatic algorithm relies on.

pub mod adversaries;
pub mod error;
pub mod expanders;
pub mod experiments;
pub mod graph;
pub mod linalg;
pub mod oracle;
pub mod quantum;
pub mod rng;
pub mod spectral;

pub use error::{Error, ErrorClass, Result};
