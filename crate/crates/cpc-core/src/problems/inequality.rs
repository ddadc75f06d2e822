//! Random bounded inequality instances: every node owns a ball or a small
//! bundle of linear constraints, all constructed around a shared interior
//! point so the intersection is never empty; node 0 always holds a ball,
//! which keeps the intersection bounded.

use super::ProblemError;
use crate::linalg::norm2;
use crate::netsim::Instance;
use crate::node::NodeConfig;
use crate::oracles::{InequalityOracle, SeparationOracle};
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gen_inequality(d: usize, n: usize, seed: u64) -> Result<Instance<f64>, ProblemError> {
    if d == 0 || n == 0 {
        return Err(ProblemError::BadParameter("d and n must be positive".into()));
    }
    let mut rng = rng::stream(seed, "inequality", 0);
    let anchor: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut c: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    if norm2(&c) < 1e-6 {
        c[0] = 1.0;
    }

    let mut oracles: Vec<Box<dyn SeparationOracle<f64>>> = Vec::with_capacity(n);
    for node in 0..n {
        let use_ball = node == 0 || rng.gen_bool(0.5);
        if use_ball {
            let offset: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let center: Vec<f64> =
                anchor.iter().zip(&offset).map(|(&a, &o)| a + o).collect();
            let radius = rng.gen_range(0.5_f64..1.5).max(norm2(&offset) + 0.1);
            let r2 = radius * radius;
            oracles.push(Box::new(InequalityOracle::new(
                d,
                vec![Box::new(move |z: &[f64]| {
                    let diff: Vec<f64> = z.iter().zip(&center).map(|(&v, &c)| v - c).collect();
                    let f = diff.iter().map(|&v| v * v).sum::<f64>() - r2;
                    (f, diff.iter().map(|&v| 2.0 * v).collect())
                })],
                1e-7,
            )?));
        } else {
            let k = rng.gen_range(1..=3);
            let mut components: Vec<Box<dyn Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync>> =
                Vec::with_capacity(k);
            for _ in 0..k {
                let mut a: Vec<f64> =
                    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                if norm2(&a) < 1e-6 {
                    a[0] = 1.0;
                }
                let b = crate::linalg::dot(&a, &anchor) + rng.gen_range(0.1..1.0);
                components.push(Box::new(move |z: &[f64]| {
                    (crate::linalg::dot(&a, z) - b, a.clone())
                }));
            }
            oracles.push(Box::new(InequalityOracle::new(d, components, 1e-7)?));
        }
    }

    Ok(Instance {
        name: format!("inequality-d{d}-n{n}-s{seed}"),
        objective: c,
        oracles,
        z_ref: None,
        node_cfg: NodeConfig { box_bound: 1e5, ..NodeConfig::default() },
    })
}
