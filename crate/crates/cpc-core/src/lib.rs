//! Cutting-plane consensus for distributed convex and robust optimization.
//!
//! Processors cooperate to maximize a common linear objective over the
//! intersection of their local constraint sets. Each round a processor
//! exchanges a small basis of linear cuts with its neighbors, computes the
//! minimum-norm maximizer of the objective over the cuts it knows, and asks
//! a local separation oracle either to certify the point or to produce a new
//! cut. The crate provides the geometric primitives, the min-norm solver,
//! three oracle families, the node state machine, a deterministic message
//! simulator, problem generators, and primal recovery for almost-separable
//! programs.
//!
//! The numeric core is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! simulator artifacts and wire formats are `f64`.

pub mod geometry;
pub mod linalg;
pub mod minnorm;
pub mod netsim;
pub mod node;
pub mod oracles;
pub mod problems;
pub mod qp;
pub mod recovery;
pub mod rng;
pub mod scalar;

pub use geometry::{box_basis, CutCollection, HalfSpace, Provenance};
pub use minnorm::{extract_basis, solve_min_norm, ApproxLpSolution, Basis, MinNormResult, SolverConfig};
pub use netsim::{CommGraph, FaultPlan, GraphKind, Instance, RunLog, RunOptions, Schedule, StopRule};
pub use node::{BasisMessage, Node, NodeConfig, TraceRecord};
pub use oracles::{OracleReply, SeparationOracle, Verdict};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the generic core types.
pub type HalfSpace64 = geometry::HalfSpace<f64>;
pub type CutCollection64 = geometry::CutCollection<f64>;
