//! Microgrid economic dispatch over a finite horizon. Units (generators,
//! batteries, sheddable loads, a grid trader) each optimize a private
//! schedule; the only shared constraint is power balance per period,
//! `sum_u inject_u(t) = demand(t)`. Nodes therefore run column-generation
//! oracles on the dual `z = (pi, u)`: `pi` prices each period, `u_i` is
//! unit `i`'s epigraph variable.
//!
//! Sign convention: every local schedule is stated as grid injection, so
//! generation and battery discharge are positive, consumption and charging
//! are negative. A battery with state of charge `q(t) = q_init - sum_{s<=t}
//! x(s)` that starts full and cannot discharge is forced to `x = 0`.

use super::ProblemError;
use crate::geometry::{CutCollection, HalfSpace, Provenance};
use crate::linalg::dot;
use crate::minnorm::{solve_min_norm, MinNormResult, SolverConfig};
use crate::netsim::Instance;
use crate::node::NodeConfig;
use crate::oracles::{ColGenOracle, SeparationOracle, SubproblemSolution};
use crate::qp::{project, ProjectOptions, ProjectOutcome};
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn default_horizon() -> usize {
    12
}
pub fn default_generators() -> usize {
    60
}
pub fn default_storage() -> usize {
    20
}
pub fn default_loads() -> usize {
    20
}
pub fn default_traders() -> usize {
    1
}
pub fn default_base_demand() -> f64 {
    300.0
}
pub fn default_amplitude() -> f64 {
    50.0
}
pub fn default_sigma() -> f64 {
    10.0
}

#[derive(Clone, Copy, Debug)]
pub struct MicrogridParams {
    pub horizon: usize,
    pub generators: usize,
    pub storage: usize,
    pub loads: usize,
    pub traders: usize,
    pub base_demand: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for MicrogridParams {
    fn default() -> Self {
        MicrogridParams {
            horizon: default_horizon(),
            generators: default_generators(),
            storage: default_storage(),
            loads: default_loads(),
            traders: default_traders(),
            base_demand: default_base_demand(),
            amplitude: default_amplitude(),
            sigma: default_sigma(),
            seed: 0,
        }
    }
}

/// Dispatchable generator: output in `[p_min, p_max]` each period, ramp
/// limited between consecutive periods, cost `alpha p + beta p^2` per
/// period (`beta = 0` makes the pricing subproblem a pure LP).
#[derive(Clone, Debug)]
pub struct Generator {
    pub p_min: f64,
    pub p_max: f64,
    pub ramp: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Battery described by its injection schedule: `x(t)` in
/// `[-charge_cap, discharge_cap]`, state of charge kept inside
/// `[0, q_max]` via running-sum constraints. Cycling itself is free.
#[derive(Clone, Debug)]
pub struct Storage {
    pub charge_cap: f64,
    pub discharge_cap: f64,
    pub q_max: f64,
    pub q_init: f64,
}

/// Sheddable consumer wanting `level` per period; injection in
/// `[-level, 0]`, and every unserved unit costs `shed_price`.
#[derive(Clone, Debug)]
pub struct Load {
    pub level: f64,
    pub shed_price: f64,
}

/// Grid intertie: local vector is `(x, w)` with traded power `x(t)` in
/// `[-cap, cap]`, turnover `w(t) >= |x(t)|`, cost `price(t) x + fee w`.
#[derive(Clone, Debug)]
pub struct Trader {
    pub cap: f64,
    pub price: Vec<f64>,
    pub fee: f64,
}

#[derive(Clone, Debug)]
pub enum Unit {
    Generator(Generator),
    Storage(Storage),
    Load(Load),
    Trader(Trader),
}

fn unit_vec(dim: usize, k: usize, sign: f64) -> Vec<f64> {
    let mut a = vec![0.0; dim];
    a[k] = sign;
    a
}

fn generator_polytope(g: &Generator, t: usize) -> CutCollection<f64> {
    let mut h = CutCollection::new(t);
    let prov = Provenance::new(0, 0);
    for k in 0..t {
        h.insert(&HalfSpace { a: unit_vec(t, k, 1.0), b: g.p_max }, prov).unwrap();
        h.insert(&HalfSpace { a: unit_vec(t, k, -1.0), b: -g.p_min }, prov).unwrap();
    }
    for k in 0..t.saturating_sub(1) {
        let mut up = vec![0.0; t];
        up[k + 1] = 1.0;
        up[k] = -1.0;
        let down: Vec<f64> = up.iter().map(|v| -v).collect();
        h.insert(&HalfSpace { a: up, b: g.ramp }, prov).unwrap();
        h.insert(&HalfSpace { a: down, b: g.ramp }, prov).unwrap();
    }
    h
}

fn storage_polytope(s: &Storage, t: usize) -> CutCollection<f64> {
    let mut h = CutCollection::new(t);
    let prov = Provenance::new(0, 0);
    for k in 0..t {
        h.insert(&HalfSpace { a: unit_vec(t, k, 1.0), b: s.discharge_cap }, prov).unwrap();
        h.insert(&HalfSpace { a: unit_vec(t, k, -1.0), b: s.charge_cap }, prov).unwrap();
    }
    for k in 0..t {
        let mut prefix = vec![0.0; t];
        for p in prefix.iter_mut().take(k + 1) {
            *p = 1.0;
        }
        let neg: Vec<f64> = prefix.iter().map(|v| -v).collect();
        // q(t) >= 0 and q(t) <= q_max.
        h.insert(&HalfSpace { a: prefix, b: s.q_init }, prov).unwrap();
        h.insert(&HalfSpace { a: neg, b: s.q_max - s.q_init }, prov).unwrap();
    }
    h
}

fn lp_over(cuts: &CutCollection<f64>, minimize: &[f64]) -> Vec<f64> {
    let c: Vec<f64> = minimize.iter().map(|&v| -v).collect();
    let cfg = SolverConfig::default();
    match solve_min_norm(cuts, &c, &cfg, None) {
        Ok(MinNormResult::Optimal(sol)) => sol.z_star,
        other => panic!("unit subproblem LP failed on a certified polytope: {other:?}"),
    }
}

impl Unit {
    pub fn label(&self) -> &'static str {
        match self {
            Unit::Generator(_) => "generator",
            Unit::Storage(_) => "storage",
            Unit::Load(_) => "load",
            Unit::Trader(_) => "trader",
        }
    }

    pub fn local_dim(&self, horizon: usize) -> usize {
        match self {
            Unit::Trader(_) => 2 * horizon,
            _ => horizon,
        }
    }

    /// Injection profile of a local schedule (the coupling image `G x`).
    pub fn injection(&self, x: &[f64], horizon: usize) -> Vec<f64> {
        match self {
            Unit::Trader(_) => x[..horizon].to_vec(),
            _ => x.to_vec(),
        }
    }

    pub fn cost(&self, x: &[f64], horizon: usize) -> f64 {
        match self {
            Unit::Generator(g) => {
                x.iter().map(|&p| g.alpha * p + g.beta * p * p).sum()
            }
            Unit::Storage(_) => 0.0,
            Unit::Load(l) => x.iter().map(|&p| l.shed_price * (l.level + p)).sum(),
            Unit::Trader(tr) => {
                let (power, turnover) = x.split_at(horizon);
                power.iter().zip(&tr.price).map(|(&p, &c)| c * p).sum::<f64>()
                    + tr.fee * turnover.iter().sum::<f64>()
            }
        }
    }

    /// Minimize `cost(x) + pi . inject(x)` over the unit's feasible set.
    pub fn best_response(&self, pi: &[f64], horizon: usize) -> SubproblemSolution<f64> {
        let x = match self {
            Unit::Generator(g) => {
                let priced: Vec<f64> = pi.iter().map(|&p| g.alpha + p).collect();
                let polytope = generator_polytope(g, horizon);
                if g.beta > 0.0 {
                    let target: Vec<f64> =
                        priced.iter().map(|&q| -q / (2.0 * g.beta)).collect();
                    let opts = ProjectOptions { feas_tol: 1e-9, iter_cap: 200 };
                    match project(&target, polytope.cuts(), &opts) {
                        Ok(ProjectOutcome::Feasible(p)) => p.x,
                        other => panic!("generator schedule projection failed: {other:?}"),
                    }
                } else {
                    lp_over(&polytope, &priced)
                }
            }
            Unit::Storage(s) => lp_over(&storage_polytope(s, horizon), pi),
            Unit::Load(l) => pi
                .iter()
                .map(|&p| if l.shed_price + p > 0.0 { -l.level } else { 0.0 })
                .collect(),
            Unit::Trader(tr) => {
                let mut x = vec![0.0; 2 * horizon];
                for (k, (&p, &c)) in pi.iter().zip(&tr.price).enumerate() {
                    let a = c + p;
                    if a.abs() > tr.fee {
                        x[k] = -a.signum() * tr.cap;
                        x[horizon + k] = tr.cap;
                    }
                }
                x
            }
        };
        let gx = self.injection(&x, horizon);
        let cost = self.cost(&x, horizon);
        SubproblemSolution { x, gx, cost }
    }
}

#[derive(Clone, Debug)]
pub struct MicrogridInstance {
    pub horizon: usize,
    pub units: Vec<Unit>,
    pub demand: Vec<f64>,
    pub seed: u64,
}

pub fn gen_microgrid(params: &MicrogridParams) -> Result<MicrogridInstance, ProblemError> {
    let t = params.horizon;
    if t == 0 || params.generators == 0 {
        return Err(ProblemError::BadParameter(
            "horizon and generator count must be positive".into(),
        ));
    }
    if !(params.base_demand > 0.0) || params.sigma < 0.0 || params.amplitude < 0.0 {
        return Err(ProblemError::BadParameter("demand profile parameters".into()));
    }
    let mut rng = rng::stream(params.seed, "microgrid", 0);

    let demand: Vec<f64> = (0..t)
        .map(|k| {
            let phase = 2.0 * std::f64::consts::PI * (k as f64 + 1.0) / t as f64;
            params.base_demand
                + params.amplitude * phase.sin()
                + params.sigma * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();

    // Size the fleet to roughly twice the worst plausible demand so the
    // proportional-dispatch certificate below has comfortable margins.
    let demand_hi = params.base_demand + params.amplitude + 4.0 * params.sigma;
    let mean_cap = 2.0 * demand_hi / params.generators as f64;
    let mut units = Vec::new();
    for _ in 0..params.generators {
        let p_max = mean_cap * rng.gen_range(0.6..1.4);
        let p_min = p_max * rng.gen_range(0.0..0.2);
        let ramp = (p_max - p_min) * rng.gen_range(0.25..0.5);
        let alpha = rng.gen_range(5.0..15.0);
        let beta =
            if rng.gen_bool(0.8) { rng.gen_range(0.05..0.5) } else { 0.0 };
        units.push(Unit::Generator(Generator { p_min, p_max, ramp, alpha, beta }));
    }
    for _ in 0..params.storage {
        let q_max = rng.gen_range(4.0..10.0);
        units.push(Unit::Storage(Storage {
            charge_cap: rng.gen_range(1.0..3.0),
            discharge_cap: rng.gen_range(1.0..3.0),
            q_max,
            q_init: q_max * rng.gen_range(0.3..0.7),
        }));
    }
    for _ in 0..params.loads {
        units.push(Unit::Load(Load {
            level: rng.gen_range(1.0..4.0),
            shed_price: rng.gen_range(20.0..40.0),
        }));
    }
    for _ in 0..params.traders {
        let base = rng.gen_range(10.0..16.0);
        let swing = rng.gen_range(2.0..6.0);
        let offset = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
        let price: Vec<f64> = (0..t)
            .map(|k| {
                base + swing * (2.0 * std::f64::consts::PI * k as f64 / t as f64 + offset).sin()
            })
            .collect();
        units.push(Unit::Trader(Trader { cap: rng.gen_range(5.0..15.0), price, fee: rng.gen_range(0.5..2.0) }));
    }

    let instance = MicrogridInstance { horizon: t, units, demand, seed: params.seed };
    instance.certified_dispatch()?;
    Ok(instance)
}

impl MicrogridInstance {
    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    /// Dual objective `c = (-demand, 1, ..., 1)`.
    pub fn objective(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.demand.iter().map(|&v| -v).collect();
        c.extend(std::iter::repeat(1.0).take(self.n_units()));
        c
    }

    pub fn cost_of(&self, unit: usize, x: &[f64]) -> f64 {
        self.units[unit].cost(x, self.horizon)
    }

    pub fn injection_of(&self, unit: usize, x: &[f64]) -> Vec<f64> {
        self.units[unit].injection(x, self.horizon)
    }

    /// Exact dual function value at `pi`: a certified lower bound on the
    /// cost of every feasible dispatch.
    pub fn lagrangian_bound(&self, pi: &[f64]) -> f64 {
        let mut v = -dot(&self.demand, pi);
        for unit in &self.units {
            let sub = unit.best_response(pi, self.horizon);
            v += sub.cost + dot(pi, &sub.gx);
        }
        v
    }

    /// Explicit feasible dispatch: loads fully shed, batteries and trader
    /// idle, generators sharing demand in proportion to their headroom.
    /// Fails if the fleet cannot track the demand profile that way, which
    /// certifies generated instances as solvable at build time.
    pub fn certified_dispatch(&self) -> Result<Vec<Vec<f64>>, ProblemError> {
        let t = self.horizon;
        let gens: Vec<&Generator> = self
            .units
            .iter()
            .filter_map(|u| if let Unit::Generator(g) = u { Some(g) } else { None })
            .collect();
        let floor: f64 = gens.iter().map(|g| g.p_min).sum();
        let range: f64 = gens.iter().map(|g| g.p_max - g.p_min).sum();
        let mut theta = Vec::with_capacity(t);
        for (k, &d) in self.demand.iter().enumerate() {
            if range <= 0.0 {
                return Err(ProblemError::InfeasibleInstance(
                    "generator fleet has no dispatchable range".into(),
                ));
            }
            let th = (d - floor) / range;
            if !(0.0..=1.0).contains(&th) {
                return Err(ProblemError::InfeasibleInstance(format!(
                    "demand {d:.2} in period {k} outside fleet range [{floor:.2}, {:.2}]",
                    floor + range
                )));
            }
            theta.push(th);
        }
        for win in theta.windows(2) {
            let dth = (win[1] - win[0]).abs();
            for (i, g) in gens.iter().enumerate() {
                if dth * (g.p_max - g.p_min) > g.ramp + 1e-12 {
                    return Err(ProblemError::InfeasibleInstance(format!(
                        "generator {i} cannot ramp with the demand profile"
                    )));
                }
            }
        }
        let dispatch = self
            .units
            .iter()
            .map(|u| match u {
                Unit::Generator(g) => {
                    theta.iter().map(|&th| g.p_min + th * (g.p_max - g.p_min)).collect()
                }
                Unit::Trader(_) => vec![0.0; 2 * t],
                _ => vec![0.0; t],
            })
            .collect();
        Ok(dispatch)
    }

    /// Total cost of a full dispatch (one schedule per unit).
    pub fn total_cost(&self, xs: &[Vec<f64>]) -> f64 {
        xs.iter().enumerate().map(|(i, x)| self.cost_of(i, x)).sum()
    }

    /// Worst-period absolute power imbalance of a full dispatch.
    pub fn balance_residual(&self, xs: &[Vec<f64>]) -> f64 {
        let mut total = vec![0.0; self.horizon];
        for (i, x) in xs.iter().enumerate() {
            for (tot, inj) in total.iter_mut().zip(self.injection_of(i, x)) {
                *tot += inj;
            }
        }
        total
            .iter()
            .zip(&self.demand)
            .map(|(&s, &d)| (s - d).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_instance(&self) -> Result<Instance<f64>, ProblemError> {
        let n = self.n_units();
        let horizon = self.horizon;
        let oracles: Vec<Box<dyn SeparationOracle<f64>>> = self
            .units
            .iter()
            .enumerate()
            .map(|(i, unit)| {
                let unit = unit.clone();
                // Injection profiles make the raw epigraph normals large,
                // so the acceptance band sits above solver feasibility
                // precision multiplied by that scale.
                Box::new(ColGenOracle::new(
                    i,
                    horizon,
                    n,
                    Box::new(move |pi: &[f64]| unit.best_response(pi, horizon)),
                    1e-6,
                )) as Box<dyn SeparationOracle<f64>>
            })
            .collect();
        Ok(Instance {
            name: format!("microgrid-t{}-n{}-s{}", horizon, n, self.seed),
            objective: self.objective(),
            oracles,
            z_ref: None,
            node_cfg: NodeConfig::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::reference_solve;
    use approx::assert_abs_diff_eq;

    #[test]
    fn marginal_generator_sets_the_price() {
        // One linear generator on [0, 10] at cost 1/unit meeting demand 5:
        // the dual optimum is pi = -1 (negated marginal cost), value 5.
        let inst = MicrogridInstance {
            horizon: 1,
            units: vec![Unit::Generator(Generator {
                p_min: 0.0,
                p_max: 10.0,
                ramp: 10.0,
                alpha: 1.0,
                beta: 0.0,
            })],
            demand: vec![5.0],
            seed: 0,
        };
        let z = reference_solve(&inst.to_instance().unwrap()).unwrap();
        let gamma = dot(&inst.objective(), &z);
        assert_abs_diff_eq!(gamma, 5.0, epsilon = 1e-6);
        assert_abs_diff_eq!(z[0], -1.0, epsilon = 1e-5);
    }

    #[test]
    fn quadratic_generator_projects_onto_ramp_polytope() {
        let g = Generator { p_min: 0.0, p_max: 10.0, ramp: 0.5, alpha: 0.0, beta: 1.0 };
        // Unconstrained optimum (2, 3) violates the ramp; projection splits
        // the difference to (2.25, 2.75).
        let sub = Unit::Generator(g).best_response(&[-4.0, -6.0], 2);
        assert_abs_diff_eq!(sub.x[0], 2.25, epsilon = 1e-8);
        assert_abs_diff_eq!(sub.x[1], 2.75, epsilon = 1e-8);
        assert_abs_diff_eq!(sub.cost, 2.25 * 2.25 + 2.75 * 2.75, epsilon = 1e-8);
    }

    #[test]
    fn full_battery_that_cannot_discharge_sits_idle() {
        let st = Unit::Storage(Storage {
            charge_cap: 2.0,
            discharge_cap: 0.0,
            q_max: 5.0,
            q_init: 5.0,
        });
        // Even with prices begging it to absorb power, the injection
        // schedule is pinned: x <= 0 by the rate bound, and the running-sum
        // cap q <= q_max forces the prefix sums back up to zero.
        let sub = st.best_response(&[30.0, 30.0, 30.0], 3);
        for &x in &sub.x {
            assert_abs_diff_eq!(x, 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn empty_battery_charges_up_to_capacity() {
        let st = Unit::Storage(Storage {
            charge_cap: 2.0,
            discharge_cap: 0.0,
            q_max: 5.0,
            q_init: 0.0,
        });
        let sub = st.best_response(&[10.0, 10.0, 10.0], 3);
        for &x in &sub.x {
            assert!(x <= 1e-9, "discharge is impossible for this battery");
            assert!(x >= -2.0 - 1e-9);
        }
        assert_abs_diff_eq!(sub.x.iter().sum::<f64>(), -5.0, epsilon = 1e-6);
    }

    #[test]
    fn trader_moves_only_past_the_fee() {
        let tr = Unit::Trader(Trader { cap: 5.0, price: vec![10.0], fee: 1.0 });
        let sub = tr.best_response(&[-12.0], 1);
        assert_abs_diff_eq!(sub.x[0], 5.0);
        assert_abs_diff_eq!(sub.x[1], 5.0);
        assert_abs_diff_eq!(sub.cost, 55.0);
        let idle = tr.best_response(&[-10.5], 1);
        assert_abs_diff_eq!(idle.x[0], 0.0);
        assert_abs_diff_eq!(idle.cost, 0.0);
    }

    #[test]
    fn load_serves_when_energy_is_cheaper_than_shedding() {
        let ld = Unit::Load(Load { level: 2.0, shed_price: 30.0 });
        let served = ld.best_response(&[-10.0], 1);
        assert_abs_diff_eq!(served.x[0], -2.0);
        assert_abs_diff_eq!(served.cost, 0.0);
        let shed = ld.best_response(&[-40.0], 1);
        assert_abs_diff_eq!(shed.x[0], 0.0);
        assert_abs_diff_eq!(shed.cost, 60.0);
    }

    #[test]
    fn certificate_rejects_an_undersized_fleet() {
        let inst = MicrogridInstance {
            horizon: 1,
            units: vec![Unit::Generator(Generator {
                p_min: 0.0,
                p_max: 1.0,
                ramp: 1.0,
                alpha: 1.0,
                beta: 0.0,
            })],
            demand: vec![5.0],
            seed: 0,
        };
        assert!(matches!(
            inst.certified_dispatch(),
            Err(ProblemError::InfeasibleInstance(_))
        ));
    }

    #[test]
    fn generated_instance_is_certified_and_deterministic() {
        let params = MicrogridParams {
            horizon: 4,
            generators: 5,
            storage: 2,
            loads: 2,
            traders: 1,
            base_demand: 40.0,
            amplitude: 8.0,
            sigma: 2.0,
            seed: 3,
        };
        let a = gen_microgrid(&params).unwrap();
        let b = gen_microgrid(&params).unwrap();
        assert_eq!(a.demand, b.demand);
        assert_eq!(a.n_units(), 10);
        let dispatch = a.certified_dispatch().unwrap();
        assert!(a.balance_residual(&dispatch) < 1e-9);
    }

    #[test]
    fn dual_value_lower_bounds_every_feasible_dispatch() {
        let params = MicrogridParams {
            horizon: 3,
            generators: 3,
            storage: 1,
            loads: 1,
            traders: 1,
            base_demand: 30.0,
            amplitude: 5.0,
            sigma: 1.0,
            seed: 9,
        };
        let mg = gen_microgrid(&params).unwrap();
        let inst = mg.to_instance().unwrap();
        let z = reference_solve(&inst).unwrap();
        let gamma = dot(&inst.objective, &z);
        let bound = mg.lagrangian_bound(&z[..3]);
        assert_abs_diff_eq!(gamma, bound, epsilon = 1e-5 * (1.0 + gamma.abs()));
        let fallback = mg.certified_dispatch().unwrap();
        assert!(bound <= mg.total_cost(&fallback) + 1e-9);
    }
}
