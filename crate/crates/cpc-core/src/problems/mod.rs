//! Application instance builders and the centralized reference solver.
//!
//! Each family constructs a ready-to-run [`Instance`] (one oracle per node,
//! a shared objective) plus whatever metadata its analysis needs. Instances
//! are generated deterministically from a seed and always come with an
//! explicitly constructed feasible point, checked at build time.

pub mod colgen_toy;
pub mod inequality;
pub mod localization;
pub mod microgrid;
pub mod robust_lp;

use crate::geometry::{CutCollection, Provenance};
use crate::minnorm::{solve_min_norm, MinNormResult};
use crate::netsim::Instance;
use crate::qp::SolveError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("generated instance failed its feasibility certificate: {0}")]
    InfeasibleInstance(String),
    #[error("reference solve exceeded {0} oracle calls")]
    ReferenceDiverged(usize),
    #[error("reference solve stalled: oracle keeps rejecting without new cuts")]
    ReferenceStalled,
    #[error("reference solve found the constraints inconsistent")]
    ReferenceInfeasible,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Oracle(#[from] crate::oracles::OracleError),
}

/// Declarative instance description; the JSON surface of the experiment
/// configs. All numeric fields are doubles, all randomness is seeded.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    RobustLp {
        d: usize,
        n: usize,
        seed: u64,
    },
    Inequality {
        d: usize,
        n: usize,
        seed: u64,
    },
    ColgenToy {
        r: usize,
        n: usize,
        seed: u64,
    },
    Localization {
        #[serde(default)]
        sensors: Vec<localization::SensorSpec>,
    },
    Microgrid {
        #[serde(default = "microgrid::default_horizon")]
        horizon: usize,
        #[serde(default = "microgrid::default_generators")]
        generators: usize,
        #[serde(default = "microgrid::default_storage")]
        storage: usize,
        #[serde(default = "microgrid::default_loads")]
        loads: usize,
        #[serde(default = "microgrid::default_traders")]
        traders: usize,
        #[serde(default = "microgrid::default_base_demand")]
        base_demand: f64,
        #[serde(default = "microgrid::default_amplitude")]
        amplitude: f64,
        #[serde(default = "microgrid::default_sigma")]
        sigma: f64,
        seed: u64,
    },
}

impl InstanceSpec {
    /// Runnable instances for this description: localization expands to its
    /// four directional objectives, every other family is a single run.
    pub fn build_all(&self) -> Result<Vec<Instance<f64>>, ProblemError> {
        match self {
            InstanceSpec::RobustLp { d, n, seed } => {
                Ok(vec![robust_lp::to_instance(&robust_lp::gen_dunham_robust_lp(*d, *n, *seed)?)?])
            }
            InstanceSpec::Inequality { d, n, seed } => {
                Ok(vec![inequality::gen_inequality(*d, *n, *seed)?])
            }
            InstanceSpec::ColgenToy { r, n, seed } => {
                Ok(vec![colgen_toy::gen_colgen_toy(*r, *n, *seed)?.to_instance()?])
            }
            InstanceSpec::Localization { sensors } => {
                let sensors = if sensors.is_empty() {
                    localization::acceptance_sensors()
                } else {
                    sensors.clone()
                };
                (0..4).map(|dir| localization::instance_for_direction(&sensors, dir)).collect()
            }
            InstanceSpec::Microgrid { .. } => Ok(vec![self.microgrid()?.to_instance()?]),
        }
    }

    /// The generator-level description of a microgrid spec, exposing cost
    /// evaluators and the feasibility certificate.
    pub fn microgrid(&self) -> Result<microgrid::MicrogridInstance, ProblemError> {
        match self {
            InstanceSpec::Microgrid {
                horizon,
                generators,
                storage,
                loads,
                traders,
                base_demand,
                amplitude,
                sigma,
                seed,
            } => microgrid::gen_microgrid(&microgrid::MicrogridParams {
                horizon: *horizon,
                generators: *generators,
                storage: *storage,
                loads: *loads,
                traders: *traders,
                base_demand: *base_demand,
                amplitude: *amplitude,
                sigma: *sigma,
                seed: *seed,
            }),
            _ => Err(ProblemError::BadParameter("not a microgrid spec".into())),
        }
    }

    /// Number of nodes the built instance will have.
    pub fn node_count(&self) -> usize {
        match self {
            InstanceSpec::RobustLp { n, .. }
            | InstanceSpec::Inequality { n, .. }
            | InstanceSpec::ColgenToy { n, .. } => *n,
            InstanceSpec::Localization { sensors } => {
                if sensors.is_empty() {
                    localization::acceptance_sensor_count()
                } else {
                    sensors.len()
                }
            }
            InstanceSpec::Microgrid { generators, storage, loads, traders, .. } => {
                generators + storage + loads + traders
            }
        }
    }
}

const REFERENCE_CALL_CAP: usize = 100_000;

/// Centralized ground truth: run the cutting-plane loop on a single node
/// that owns every oracle, adding all violated cuts each iteration, until
/// every oracle accepts the candidate. Returns the min-norm optimizer of
/// the final outer approximation.
///
/// Collections here deduplicate at 1e-12: near-parallel successive cuts
/// are the mechanism by which the loop closes in on curved boundaries, so
/// they must not be merged away.
pub fn reference_solve(instance: &Instance<f64>) -> Result<Vec<f64>, ProblemError> {
    let d = instance.dim();
    let mut h = CutCollection::with_tau_dup(d, 1e-12);
    for (cut, prov) in crate::geometry::box_basis(d, instance.node_cfg.box_bound)?.iter() {
        h.insert(cut, prov)?;
    }
    let cfg = instance.node_cfg.solver;
    let mut hint = None;
    let mut calls = 0usize;
    loop {
        let sol = match solve_min_norm(&h, &instance.objective, &cfg, hint)? {
            MinNormResult::Optimal(s) => s,
            MinNormResult::Infeasible => return Err(ProblemError::ReferenceInfeasible),
            MinNormResult::Unbounded { .. } => {
                return Err(ProblemError::InfeasibleInstance(
                    "unbounded despite the bounding box".into(),
                ))
            }
        };
        hint = Some(sol.lambda);
        let mut all_inside = true;
        let mut inserted = false;
        for oracle in &instance.oracles {
            calls += 1;
            if calls > REFERENCE_CALL_CAP {
                return Err(ProblemError::ReferenceDiverged(REFERENCE_CALL_CAP));
            }
            let reply = oracle.query(&sol.z_star);
            if !reply.is_inside() {
                all_inside = false;
                let cut = reply.cut.as_ref().expect("violated reply carries a cut");
                let before = h.len();
                h.insert(cut, Provenance::new(usize::MAX - 1, 0))?;
                inserted |= h.len() > before;
            }
        }
        if all_inside {
            return Ok(sol.z_star);
        }
        if !inserted {
            return Err(ProblemError::ReferenceStalled);
        }
    }
}
