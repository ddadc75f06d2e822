//! Experiment orchestration for the cutting-plane consensus crates.
//!
//! The binary in this package is a thin argument parser; everything it does
//! goes through [`experiment`], which is also what the integration tests
//! drive directly.

pub mod experiment;
pub mod stats;
