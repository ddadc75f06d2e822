//! Robust linear programs with ellipsoidal row uncertainty, generated by
//! the standard recipe: nominal rows and objective drawn with standard
//! deviation 10, right-hand sides set to the nominal row norms, and row
//! ellipsoids shaped by squared standard-normal matrices. The origin is
//! robust-feasible by construction (worst-case value at 0 is -b_i <= 0).

use super::ProblemError;
use crate::linalg::{dot, norm2, Mat};
use crate::netsim::Instance;
use crate::node::NodeConfig;
use crate::oracles::{SeparationOracle, UncertainOracle, UncertaintySet};
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobustRow {
    pub a_bar: Vec<f64>,
    /// Ellipsoid shape; the uncertain row ranges over a_bar + p u, |u| <= 1.
    pub p: Vec<Vec<f64>>,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobustLpInstance {
    pub d: usize,
    pub rows: Vec<RobustRow>,
    pub c: Vec<f64>,
}

impl RobustLpInstance {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Worst-case row value max_{a} a . z - b over the row's ellipsoid.
    pub fn worst_value(&self, row: usize, z: &[f64]) -> f64 {
        let r = &self.rows[row];
        let p = Mat::from_rows(&r.p);
        dot(&r.a_bar, z) + norm2(&p.matvec_t(z)) - r.b
    }
}

/// One row per node, drawn per the published generation recipe,
/// deterministic in the seed.
pub fn gen_dunham_robust_lp(d: usize, n: usize, seed: u64) -> Result<RobustLpInstance, ProblemError> {
    if d == 0 || n == 0 {
        return Err(ProblemError::BadParameter("d and n must be positive".into()));
    }
    let mut rng = rng::stream(seed, "robust-lp", 0);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let a_bar: Vec<f64> =
            (0..d).map(|_| 10.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let m: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        // p = m^T m, symmetric positive semidefinite.
        let mut p = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                p[i][j] = (0..d).map(|k| m[k][i] * m[k][j]).sum();
            }
        }
        let b = norm2(&a_bar);
        rows.push(RobustRow { a_bar, p, b });
    }
    let mut c: Vec<f64> = (0..d).map(|_| 10.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    if norm2(&c) < 1e-9 {
        c[0] = 1.0;
    }
    Ok(RobustLpInstance { d, rows, c })
}

/// Robust row as an uncertain-constraint oracle (exact ellipsoidal
/// pessimization of the affine form).
pub fn row_oracle(row: &RobustRow, d: usize) -> Result<UncertainOracle<f64>, ProblemError> {
    let b = row.b;
    let center = row.a_bar.clone();
    let shape = Mat::from_rows(&row.p);
    Ok(UncertainOracle::new(
        d,
        Box::new(move |z: &[f64], a: &[f64]| dot(a, z) - b),
        Box::new(|_z: &[f64], a: &[f64]| a.to_vec()),
        Some(Box::new(|z: &[f64]| (z.to_vec(), 0.0))),
        UncertaintySet::Ellipsoid { center, shape },
        1e-7,
    )?)
}

pub fn to_instance(inst: &RobustLpInstance) -> Result<Instance<f64>, ProblemError> {
    let mut oracles: Vec<Box<dyn SeparationOracle<f64>>> = Vec::with_capacity(inst.n());
    for row in &inst.rows {
        oracles.push(Box::new(row_oracle(row, inst.d)?));
    }
    Ok(Instance {
        name: format!("robust-lp-d{}-n{}", inst.d, inst.n()),
        objective: inst.c.clone(),
        oracles,
        z_ref: None,
        node_cfg: NodeConfig { box_bound: 1e5, ..NodeConfig::default() },
    })
}
