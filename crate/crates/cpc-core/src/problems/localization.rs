//! Planar source localization: every sensor knows a region containing the
//! source (a disk, a cone of linear cuts, or both), and the network computes
//! the smallest axis-aligned box around the intersection by maximizing the
//! four signed coordinate directions in independent runs.
//!
//! Disk membership `|z - v| <= r` is expressed as a 3x3 linear matrix
//! inequality via the Schur complement, so disk sensors exercise the
//! semidefinite oracle; its leading eigenvalue is exactly `|z - v| - r`.

use super::ProblemError;
use crate::linalg::SymMat;
use crate::netsim::Instance;
use crate::node::NodeConfig;
use crate::oracles::{
    InequalityOracle, IntersectionOracle, SemidefiniteOracle, SeparationOracle,
};
use serde::{Deserialize, Serialize};

/// Half-plane `a . (z - v) <= b` relative to the sensor position `v`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct LinearCut {
    pub a: [f64; 2],
    pub b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "sensing", rename_all = "snake_case", deny_unknown_fields)]
pub enum SensingSpec {
    Disk { r: f64 },
    Cone { cuts: Vec<LinearCut> },
    Quadrant { r: f64, cuts: Vec<LinearCut> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SensorSpec {
    pub position: [f64; 2],
    #[serde(flatten)]
    pub sensing: SensingSpec,
}

/// The four box directions, in output order: +x, -x, +y, -y.
pub const DIRECTIONS: [[f64; 2]; 4] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];

fn disk_oracle(v: [f64; 2], r: f64) -> Result<SemidefiniteOracle<f64>, ProblemError> {
    if !(r > 0.0) {
        return Err(ProblemError::BadParameter(format!("disk radius {r}")));
    }
    // F(z) = [[-r, (z - v)^T], [(z - v), -r I]]; eigenvalues are
    // |z - v| - r, -r, -|z - v| - r.
    let f0 = SymMat::from_rows(&[
        vec![-r, -v[0], -v[1]],
        vec![-v[0], -r, 0.0],
        vec![-v[1], 0.0, -r],
    ]);
    let f1 = SymMat::from_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0],
    ]);
    let f2 = SymMat::from_rows(&[
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
    ]);
    Ok(SemidefiniteOracle::new(f0, vec![f1, f2], 1e-7)?)
}

fn cone_oracle(v: [f64; 2], cuts: &[LinearCut]) -> Result<InequalityOracle<f64>, ProblemError> {
    let mut components: Vec<Box<dyn Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync>> =
        Vec::with_capacity(cuts.len());
    for cut in cuts {
        let a = cut.a;
        let shifted_b = cut.b + a[0] * v[0] + a[1] * v[1];
        components.push(Box::new(move |z: &[f64]| {
            (a[0] * z[0] + a[1] * z[1] - shifted_b, vec![a[0], a[1]])
        }));
    }
    Ok(InequalityOracle::new(2, components, 1e-7)?)
}

pub fn sensor_oracle(spec: &SensorSpec) -> Result<Box<dyn SeparationOracle<f64>>, ProblemError> {
    match &spec.sensing {
        SensingSpec::Disk { r } => Ok(Box::new(disk_oracle(spec.position, *r)?)),
        SensingSpec::Cone { cuts } => Ok(Box::new(cone_oracle(spec.position, cuts)?)),
        SensingSpec::Quadrant { r, cuts } => Ok(Box::new(IntersectionOracle::new(vec![
            Box::new(disk_oracle(spec.position, *r)?),
            Box::new(cone_oracle(spec.position, cuts)?),
        ])?)),
    }
}

/// Instance maximizing `DIRECTIONS[direction] . z` over the intersection of
/// all sensing regions. The four runs share the sensors but no state.
pub fn instance_for_direction(
    sensors: &[SensorSpec],
    direction: usize,
) -> Result<Instance<f64>, ProblemError> {
    if sensors.is_empty() {
        return Err(ProblemError::BadParameter("no sensors".into()));
    }
    if direction >= 4 {
        return Err(ProblemError::BadParameter(format!("direction {direction} not in 0..4")));
    }
    let oracles = sensors.iter().map(sensor_oracle).collect::<Result<Vec<_>, _>>()?;
    Ok(Instance {
        name: format!("localization-dir{direction}"),
        objective: DIRECTIONS[direction].to_vec(),
        oracles,
        z_ref: None,
        node_cfg: NodeConfig { box_bound: 100.0, ..NodeConfig::default() },
    })
}

/// Axis-aligned bounding box assembled from the four directional optima.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl BoundingBox {
    /// `gammas[k]` is the optimal value of direction `DIRECTIONS[k]`.
    pub fn from_gammas(gammas: [f64; 4]) -> Self {
        BoundingBox { x_max: gammas[0], x_min: -gammas[1], y_max: gammas[2], y_min: -gammas[3] }
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        p[0] >= self.x_min - tol
            && p[0] <= self.x_max + tol
            && p[1] >= self.y_min - tol
            && p[1] <= self.y_max + tol
    }
}

pub fn acceptance_sensor_count() -> usize {
    acceptance_sensors().len()
}

/// Four sensors whose regions all contain the point (0.3, 0.4): two disks,
/// one upward cone, one quadrant (disk and cone combined).
pub fn acceptance_sensors() -> Vec<SensorSpec> {
    vec![
        SensorSpec { position: [-0.4, 0.3], sensing: SensingSpec::Disk { r: 1.0 } },
        SensorSpec { position: [1.1, 0.5], sensing: SensingSpec::Disk { r: 1.0 } },
        SensorSpec {
            position: [0.3, -0.6],
            sensing: SensingSpec::Cone {
                cuts: vec![
                    LinearCut { a: [-1.0, -0.5], b: 0.0 },
                    LinearCut { a: [1.0, -0.5], b: 0.0 },
                    LinearCut { a: [0.0, 1.0], b: 2.0 },
                ],
            },
        },
        SensorSpec {
            position: [0.9, 1.2],
            sensing: SensingSpec::Quadrant {
                r: 1.1,
                cuts: vec![
                    LinearCut { a: [1.0, 0.0], b: 0.0 },
                    LinearCut { a: [0.0, 1.0], b: 0.0 },
                ],
            },
        },
    ]
}
