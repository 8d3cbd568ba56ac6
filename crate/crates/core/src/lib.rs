//! Benchmark library for differentially private graph publication.
//!
//! Pieces: a simple-graph core with a Chung-Lu generator, DP noise
//! primitives with an empirical ratio verifier, baseline privatization
//! mechanisms (edge randomized response, degree-noise + generation, vertex
//! perturbation, attribute randomized response), a descriptive metric
//! suite, simulative and predictive tasks, baseline attacks, and an
//! experiment harness with a CSV/JSON reporting pipeline.

pub mod attacks;
pub mod dp;
pub mod error;
pub mod graph;
pub mod harness;
pub mod mech;
pub mod metrics;
pub mod rng;
pub mod simpred;

pub use error::{Error, Result};
pub use graph::Graph;
