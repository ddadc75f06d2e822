//! Synthetic dual-decomposition family. Agents hold separable quadratic
//! costs over boxes and share `r` coupling equalities `sum_i G_i x_i = h`;
//! nodes run column-generation oracles on the dual `z = (pi, u)`. The
//! right-hand side is assembled from a redundant feasible dispatch, so
//! every generated instance is solvable by construction.

use super::ProblemError;
use crate::linalg::{dot, Mat};
use crate::netsim::Instance;
use crate::node::NodeConfig;
use crate::oracles::{ColGenOracle, SeparationOracle, SubproblemSolution};
use crate::rng;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct ToyAgent {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Coupling matrix, `r x m` where `m` is the agent's local dimension.
    pub g: Mat<f64>,
}

impl ToyAgent {
    pub fn local_dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn cost(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.alpha.iter().zip(&self.beta))
            .map(|(&xk, (&a, &b))| a * xk + b * xk * xk)
            .sum()
    }

    /// Minimize `cost(x) + pi . (G x)` over the box; separable per
    /// coordinate with a closed-form clamp, corner for linear coordinates.
    pub fn best_response(&self, pi: &[f64]) -> SubproblemSolution<f64> {
        let q = self.g.matvec_t(pi);
        let x: Vec<f64> = (0..self.local_dim())
            .map(|k| {
                let slope = self.alpha[k] + q[k];
                if self.beta[k] > 0.0 {
                    (-slope / (2.0 * self.beta[k])).clamp(self.lo[k], self.hi[k])
                } else if slope > 0.0 {
                    self.lo[k]
                } else {
                    self.hi[k]
                }
            })
            .collect();
        let gx = self.g.matvec(&x);
        let cost = self.cost(&x);
        SubproblemSolution { x, gx, cost }
    }
}

#[derive(Clone, Debug)]
pub struct ColgenToyInstance {
    pub r: usize,
    pub agents: Vec<ToyAgent>,
    pub h: Vec<f64>,
    pub seed: u64,
}

pub fn gen_colgen_toy(r: usize, n: usize, seed: u64) -> Result<ColgenToyInstance, ProblemError> {
    if r == 0 || n == 0 {
        return Err(ProblemError::BadParameter(format!("r={r}, n={n} must be positive")));
    }
    let mut rng = rng::stream(seed, "colgen-toy", 0);
    let mut agents = Vec::with_capacity(n);
    let mut h = vec![0.0; r];
    for _ in 0..n {
        let m = rng.gen_range(2..=3);
        let alpha: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let beta: Vec<f64> = (0..m)
            .map(|_| if rng.gen_bool(0.7) { rng.gen_range(0.2..1.5) } else { 0.0 })
            .collect();
        let lo: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..-1.0)).collect();
        let hi: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..3.0)).collect();
        let rows: Vec<Vec<f64>> =
            (0..r).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let g = Mat::from_rows(&rows);
        let dispatch: Vec<f64> =
            (0..m).map(|k| rng.gen_range(lo[k]..hi[k])).collect();
        let gx = g.matvec(&dispatch);
        for (hk, gk) in h.iter_mut().zip(&gx) {
            *hk += gk;
        }
        agents.push(ToyAgent { alpha, beta, lo, hi, g });
    }
    Ok(ColgenToyInstance { r, agents, h, seed })
}

impl ColgenToyInstance {
    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    /// Dual objective `c = (-h, 1, ..., 1)` over `z = (pi, u)`.
    pub fn objective(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.h.iter().map(|&v| -v).collect();
        c.extend(std::iter::repeat(1.0).take(self.n_agents()));
        c
    }

    /// Exact dual function value at prices `pi`; a certified lower bound on
    /// the primal optimum for any `pi`.
    pub fn lagrangian_bound(&self, pi: &[f64]) -> f64 {
        let mut v = -dot(&self.h, pi);
        for agent in &self.agents {
            let sub = agent.best_response(pi);
            v += sub.cost + dot(pi, &sub.gx);
        }
        v
    }

    pub fn cost_of(&self, owner: usize, x: &[f64]) -> f64 {
        self.agents[owner].cost(x)
    }

    pub fn to_instance(&self) -> Result<Instance<f64>, ProblemError> {
        let n = self.n_agents();
        let oracles: Vec<Box<dyn SeparationOracle<f64>>> = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, agent)| {
                let agent = agent.clone();
                // The epigraph cut's raw normal (-Gx, 1) is not unit scale,
                // so the acceptance band must sit above solver feasibility
                // precision multiplied by that scale.
                Box::new(ColGenOracle::new(
                    i,
                    self.r,
                    n,
                    Box::new(move |pi: &[f64]| agent.best_response(pi)),
                    1e-6,
                )) as Box<dyn SeparationOracle<f64>>
            })
            .collect();
        Ok(Instance {
            name: format!("colgen-toy-r{}-n{}-s{}", self.r, n, self.seed),
            objective: self.objective(),
            oracles,
            z_ref: None,
            node_cfg: NodeConfig::default(),
        })
    }
}
