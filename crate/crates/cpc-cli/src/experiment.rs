//! Config-driven experiment runs.
//!
//! A config names an instance (inline or by file), a communication graph,
//! a schedule, faults, and a stop rule, plus an optional sweep over node
//! counts. Running it writes one trace CSV per repetition, a summary JSON,
//! and a plot-ready CSV of mean rounds per sweep point. All randomness is
//! derived from the config seed, so identical configs reproduce identical
//! CSV bytes.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use cpc_core::linalg::{dist2, dot};
use cpc_core::netsim::{
    self, check_joint_connectivity, CommGraph, FaultPlan, GraphKind, RunLog, RunOptions, Schedule,
    StopReason, StopRule,
};
use cpc_core::oracles::Column;
use cpc_core::problems::{reference_solve, InstanceSpec, ProblemError};
use cpc_core::recovery::{recover, RecoveryError, RecoveryOptions};
use cpc_core::rng;

use crate::stats;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Schema or semantic configuration problems; mapped to exit code 2.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    NetSim(#[from] netsim::NetSimError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code for this failure: 2 for configuration problems,
    /// 1 for everything that went wrong while actually running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Instance description: written out inline, or `{"path": "..."}` pointing
/// at a JSON file that holds one (resolved relative to the config file).
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(untagged)]
pub enum InstanceRef {
    Inline(InstanceSpec),
    Path { path: PathBuf },
}

impl<'de> Deserialize<'de> for InstanceRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        if let Some(map) = v.as_object() {
            if map.len() == 1 && map.contains_key("path") {
                let path = map["path"]
                    .as_str()
                    .ok_or_else(|| D::Error::custom("instance path must be a string"))?;
                return Ok(InstanceRef::Path { path: PathBuf::from(path) });
            }
        }
        InstanceSpec::deserialize(v)
            .map(InstanceRef::Inline)
            .map_err(|e| D::Error::custom(format!("instance spec: {e}")))
    }
}

impl InstanceRef {
    pub fn resolve(&self, base: &Path) -> Result<InstanceSpec, CliError> {
        match self {
            InstanceRef::Inline(spec) => Ok(spec.clone()),
            InstanceRef::Path { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                load_instance(&full)
            }
        }
    }
}

/// Communication graph families exposed to configs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Complete,
    Ring,
    Circulant {
        k: usize,
    },
    /// Undirected pairs with probability `p` (default 1.2 log(n)/n).
    ErdosRenyi {
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        resample_each_round: bool,
    },
    Static {
        edges: Vec<(usize, usize)>,
    },
    Script {
        rounds: Vec<Vec<(usize, usize)>>,
    },
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec::Complete
    }
}

impl GraphSpec {
    pub fn build(&self, n: usize, seed: u64) -> Result<CommGraph, netsim::NetSimError> {
        match self {
            GraphSpec::Complete => CommGraph::complete(n),
            GraphSpec::Ring => CommGraph::directed_ring(n),
            GraphSpec::Circulant { k } => CommGraph::new(n, GraphKind::Circulant { k: *k }),
            GraphSpec::ErdosRenyi { p, resample_each_round } => {
                let p = p.unwrap_or_else(|| netsim::default_er_p(n));
                CommGraph::new(
                    n,
                    GraphKind::ErdosRenyi { p, seed, resample_each_round: *resample_each_round },
                )
            }
            GraphSpec::Static { edges } => {
                CommGraph::new(n, GraphKind::Static { edges: edges.clone() })
            }
            GraphSpec::Script { rounds } => {
                CommGraph::new(n, GraphKind::Script { rounds: rounds.clone() })
            }
        }
    }

    /// Label used in the plot-data CSV.
    pub fn label(&self) -> String {
        match self {
            GraphSpec::Complete => "complete".into(),
            GraphSpec::Ring => "ring".into(),
            GraphSpec::Circulant { k } => format!("circulant_k{k}"),
            GraphSpec::ErdosRenyi { .. } => "erdos_renyi".into(),
            GraphSpec::Static { .. } => "static".into(),
            GraphSpec::Script { .. } => "script".into(),
        }
    }

    /// Whether the edge set is the same on every run with this config.
    fn deterministic(&self) -> bool {
        !matches!(self, GraphSpec::ErdosRenyi { .. })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Synchronous,
    RoundRobin { group_size: usize },
    RandomSubset { q: f64 },
    Script { rounds: Vec<Vec<usize>> },
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec::Synchronous
    }
}

impl ScheduleSpec {
    pub fn build(&self) -> Schedule {
        match self {
            ScheduleSpec::Synchronous => Schedule::Synchronous,
            ScheduleSpec::RoundRobin { group_size } => {
                Schedule::RoundRobin { group_size: *group_size }
            }
            ScheduleSpec::RandomSubset { q } => Schedule::RandomSubset { q: *q },
            ScheduleSpec::Script { rounds } => Schedule::Script { rounds: rounds.clone() },
        }
    }
}

/// Node `node` stops executing and sending from round `round` on.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub node: usize,
    pub round: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlateauSpec {
    pub delta: f64,
    #[serde(default = "default_plateau_window")]
    pub window: usize,
}

fn default_plateau_window() -> usize {
    20
}

/// Stop rule: plateau detection when configured, otherwise stop once every
/// live node is within `eps` of the reference optimizer, always capped at
/// `max_rounds`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    #[serde(default)]
    pub plateau: Option<PlateauSpec>,
}

fn default_eps() -> f64 {
    0.1
}

fn default_max_rounds() -> u64 {
    2000
}

impl Default for StopSpec {
    fn default() -> Self {
        StopSpec { eps: default_eps(), max_rounds: default_max_rounds(), plateau: None }
    }
}

fn build_stop(stop: &StopSpec, z_ref: Option<Vec<f64>>) -> StopRule<f64> {
    if let Some(p) = &stop.plateau {
        StopRule::Plateau { delta: p.delta, window: p.window, max_rounds: stop.max_rounds }
    } else if let Some(z_ref) = z_ref {
        StopRule::AllWithin { eps: stop.eps, z_ref, max_rounds: stop.max_rounds }
    } else {
        StopRule::MaxRounds { rounds: stop.max_rounds }
    }
}

/// Sweep over network sizes; every listed `n` is run `repetitions` times.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub instance: InstanceRef,
    #[serde(default)]
    pub graph: GraphSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub faults: Vec<FaultSpec>,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    /// Merge-propagate bases after stopping so every node holds the final
    /// cut union; required before primal recovery on scheduled runs.
    #[serde(default)]
    pub flood_after_stop: bool,
    /// Default output directory; overridden by `--out-dir` or CPC_OUT_DIR.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_repetitions() -> usize {
    10
}

// Unreadable input files are configuration problems (configs must name
// files that exist), unlike output-side io errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_instance(path: &Path) -> Result<InstanceSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Rebuild a spec with a fresh seed (and node count, for sweeps). Families
/// without a free node count reject sweeping; localization additionally has
/// no instance randomness, so repetitions only vary the network there.
fn respec(spec: &InstanceSpec, n: Option<usize>, seed: u64) -> Result<InstanceSpec, CliError> {
    match spec {
        InstanceSpec::RobustLp { d, n: n0, .. } => {
            Ok(InstanceSpec::RobustLp { d: *d, n: n.unwrap_or(*n0), seed })
        }
        InstanceSpec::Inequality { d, n: n0, .. } => {
            Ok(InstanceSpec::Inequality { d: *d, n: n.unwrap_or(*n0), seed })
        }
        InstanceSpec::ColgenToy { r, n: n0, .. } => {
            Ok(InstanceSpec::ColgenToy { r: *r, n: n.unwrap_or(*n0), seed })
        }
        InstanceSpec::Localization { .. } => match n {
            None => Ok(spec.clone()),
            Some(_) => Err(CliError::Config(
                "localization has a fixed sensor count; remove the sweep".into(),
            )),
        },
        InstanceSpec::Microgrid {
            horizon,
            generators,
            storage,
            loads,
            traders,
            base_demand,
            amplitude,
            sigma,
            ..
        } => match n {
            None => Ok(InstanceSpec::Microgrid {
                horizon: *horizon,
                generators: *generators,
                storage: *storage,
                loads: *loads,
                traders: *traders,
                base_demand: *base_demand,
                amplitude: *amplitude,
                sigma: *sigma,
                seed,
            }),
            Some(_) => Err(CliError::Config(
                "microgrid sizes its fleet explicitly; remove the sweep".into(),
            )),
        },
    }
}

fn node_counts(cfg: &ExperimentConfig, spec: &InstanceSpec) -> Vec<(Option<usize>, usize)> {
    match &cfg.sweep {
        Some(s) => s.n.iter().map(|&n| (Some(n), n)).collect(),
        None => vec![(None, spec.node_count())],
    }
}

/// Semantic checks beyond the schema; an empty report means the config can
/// run. Instance generation doubles as the feasibility certificate: every
/// family constructs its coupling targets from an explicit feasible point,
/// and the microgrid one is re-derived and checked here.
pub fn validate(cfg: &ExperimentConfig, base: &Path) -> Vec<String> {
    let mut problems = Vec::new();
    if cfg.repetitions == 0 {
        problems.push("repetitions must be at least 1".into());
    }
    if cfg.stop.max_rounds == 0 {
        problems.push("stop.max_rounds must be at least 1".into());
    }
    if cfg.stop.plateau.is_none() && !(cfg.stop.eps > 0.0 && cfg.stop.eps.is_finite()) {
        problems.push(format!("stop.eps must be positive and finite, got {}", cfg.stop.eps));
    }
    if let Some(p) = &cfg.stop.plateau {
        if !(p.delta > 0.0 && p.delta.is_finite()) {
            problems.push(format!("stop.plateau.delta must be positive, got {}", p.delta));
        }
        if p.window == 0 {
            problems.push("stop.plateau.window must be at least 1".into());
        }
    }
    if let Some(s) = &cfg.sweep {
        if s.n.is_empty() {
            problems.push("sweep.n must list at least one network size".into());
        }
    }

    let spec = match cfg.instance.resolve(base) {
        Ok(spec) => spec,
        Err(e) => {
            problems.push(e.to_string());
            return problems;
        }
    };
    if let Err(e) = spec.build_all() {
        problems.push(format!("instance does not build: {e}"));
        return problems;
    }
    if let InstanceSpec::Microgrid { .. } = &spec {
        match spec.microgrid().and_then(|mg| mg.certified_dispatch()) {
            Ok(_) => {}
            Err(e) => problems.push(format!("microgrid coupling is not certifiably feasible: {e}")),
        }
    }

    for (n_over, n) in node_counts(cfg, &spec) {
        if let Err(e) = respec(&spec, n_over, cfg.seed) {
            problems.push(e.to_string());
            continue;
        }
        if n == 0 {
            problems.push("network size 0 is not runnable".into());
            continue;
        }
        for f in &cfg.faults {
            if f.node >= n {
                problems.push(format!("fault names node {} but the run has {n} nodes", f.node));
            }
        }
        if let Err(e) = cfg.schedule.build().validate(n) {
            problems.push(format!("schedule invalid at n={n}: {e}"));
        }
        match cfg.graph.build(n, cfg.seed) {
            Err(e) => problems.push(format!("graph invalid at n={n}: {e}")),
            Ok(graph) if cfg.graph.deterministic() => {
                let window = match &cfg.graph {
                    GraphSpec::Script { rounds } => rounds.len().max(1) as u64,
                    _ => 1,
                };
                match check_joint_connectivity(&graph, window) {
                    Ok(true) => {}
                    Ok(false) => problems.push(format!(
                        "graph is not strongly connected over a {window}-round window at n={n}"
                    )),
                    Err(e) => problems.push(format!("graph check failed at n={n}: {e}")),
                }
            }
            Ok(_) => {}
        }
    }
    problems
}

/// One repetition's outcome inside the summary.
#[derive(Clone, Debug, Serialize)]
pub struct RepReport {
    pub rep: usize,
    pub seed: u64,
    /// Max stop round across the repetition's runs (localization expands
    /// into one run per box direction, every other family has exactly one).
    pub rounds: u64,
    pub stop_reasons: Vec<String>,
    /// Worst node distance to the reference at the end, when one was solved.
    pub max_final_dist: Option<f64>,
    /// Largest final node objective: the consensus bound on the optimum.
    pub gamma_final: f64,
    pub messages_sent: u64,
    pub logs: Vec<String>,
}

/// Aggregates for one sweep point.
#[derive(Clone, Debug, Serialize)]
pub struct PointReport {
    pub n: usize,
    pub repetitions: usize,
    /// Repetitions that met their stop criterion before the round cap
    /// (reference proximity or plateau, per the configured rule).
    pub converged: usize,
    pub mean_rounds: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub mean_messages: f64,
    pub wall_ms: u128,
    pub reps: Vec<RepReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub graph_kind: String,
    pub points: Vec<PointReport>,
}

impl ExperimentReport {
    /// Plot-ready CSV: one row per sweep point.
    pub fn plot_data(&self) -> String {
        let mut out = String::from("n,mean_rounds,ci95_lo,ci95_hi,graph_kind\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.n, p.mean_rounds, p.ci95_lo, p.ci95_hi, self.graph_kind
            ));
        }
        out
    }
}

/// Column log of a finished run plus everything recovery needs from it.
#[derive(Debug, Serialize, Deserialize)]
pub struct ColumnsArtifact {
    /// The exact spec the run built. Repetitions reseed the configured
    /// spec, so costs must be priced against this one, not the original.
    pub instance: InstanceSpec,
    /// Coupling target of the instance the columns came from.
    pub h: Vec<f64>,
    /// Final query point per node; the first coupling-dimension coordinates
    /// are each node's price estimate.
    pub final_query: Vec<Vec<f64>>,
    pub columns: Vec<Vec<Column<f64>>>,
}

fn max_final_gamma(log: &RunLog<f64>) -> f64 {
    (0..log.n)
        .filter_map(|i| log.last_gamma(i))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn max_final_dist(log: &RunLog<f64>) -> Option<f64> {
    let z_ref = log.z_ref.as_ref()?;
    let mut worst = 0.0f64;
    for q in &log.final_query {
        worst = worst.max(dist2(q, z_ref));
    }
    Some(worst)
}

/// Run every sweep point and repetition of `cfg`, writing artifacts under
/// `out_dir`:
///
/// - `runlog_n****_rep**[_dir*].csv` per run,
/// - `columns_n****_rep**.json` for column-generation families,
/// - `box_rep**.json` for localization repetitions,
/// - `summary.json` and `plot_data.csv`.
///
/// `base` resolves relative instance paths (the config file's directory).
pub fn run_experiment(
    cfg: &ExperimentConfig,
    base: &Path,
    out_dir: &Path,
) -> Result<ExperimentReport, CliError> {
    let problems = validate(cfg, base);
    if !problems.is_empty() {
        return Err(CliError::Config(problems.join("\n")));
    }
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let spec0 = cfg.instance.resolve(base)?;

    let mut points = Vec::new();
    for (pi, (n_over, n)) in node_counts(cfg, &spec0).into_iter().enumerate() {
        let wall_start = std::time::Instant::now();
        let mut reps = Vec::with_capacity(cfg.repetitions);
        for rep in 0..cfg.repetitions {
            let rep_seed = rng::stream(
                cfg.seed,
                "experiment-rep",
                (pi * cfg.repetitions + rep) as u64,
            )
            .gen::<u64>();
            let spec = respec(&spec0, n_over, rep_seed)?;
            let instances = spec.build_all()?;
            let graph_seed = rng::stream(rep_seed, "experiment-graph", 0).gen::<u64>();
            let graph = cfg.graph.build(n, graph_seed)?;
            let schedule = cfg.schedule.build();
            let faults =
                FaultPlan::new(n, cfg.faults.iter().map(|f| (f.node, f.round)).collect())?;

            let multi = instances.len() > 1;
            let mut rounds = 0u64;
            let mut reasons = Vec::new();
            let mut dist: Option<f64> = None;
            let mut gamma = f64::NEG_INFINITY;
            let mut messages = 0u64;
            let mut logs = Vec::new();
            let mut gammas = Vec::new();
            for (ii, mut instance) in instances.into_iter().enumerate() {
                if cfg.stop.plateau.is_none() {
                    instance.z_ref = Some(reference_solve(&instance)?);
                }
                let objective = instance.objective.clone();
                let opts = RunOptions {
                    stop: build_stop(&cfg.stop, instance.z_ref.clone()),
                    seed: rng::stream(rep_seed, "experiment-run", ii as u64).gen::<u64>(),
                    flood_after_stop: cfg.flood_after_stop,
                };
                let log = netsim::run(instance, &graph, &schedule, &faults, &opts)?;

                rounds = rounds.max(log.stop_round);
                reasons.push(log.stop_reason.as_str().to_string());
                if let Some(dm) = max_final_dist(&log) {
                    dist = Some(dist.unwrap_or(0.0).max(dm));
                }
                gamma = gamma.max(max_final_gamma(&log));
                gammas.push(max_final_gamma(&log));
                messages += log.messages_sent;

                let suffix = if multi { format!("_dir{ii}") } else { String::new() };
                let csv_name = format!("runlog_n{n:04}_rep{rep:02}{suffix}.csv");
                write_file(&out_dir.join(&csv_name), &log.to_csv())?;
                logs.push(csv_name);

                if matches!(spec, InstanceSpec::ColgenToy { .. } | InstanceSpec::Microgrid { .. })
                {
                    let r = log.dim - log.n;
                    let artifact = ColumnsArtifact {
                        instance: spec.clone(),
                        h: objective[..r].iter().map(|&c| -c).collect(),
                        final_query: log.final_query.clone(),
                        columns: log.columns.clone(),
                    };
                    let name = format!("columns_n{n:04}_rep{rep:02}.json");
                    let body = serde_json::to_string_pretty(&artifact)
                        .expect("columns artifact serializes");
                    write_file(&out_dir.join(&name), &body)?;
                    logs.push(name);
                }
            }
            if matches!(spec, InstanceSpec::Localization { .. }) && gammas.len() == 4 {
                let b = cpc_core::problems::localization::BoundingBox::from_gammas([
                    gammas[0], gammas[1], gammas[2], gammas[3],
                ]);
                let name = format!("box_rep{rep:02}.json");
                let body = serde_json::json!({
                    "x_min": b.x_min, "x_max": b.x_max,
                    "y_min": b.y_min, "y_max": b.y_max,
                });
                write_file(&out_dir.join(&name), &serde_json::to_string_pretty(&body).unwrap())?;
                logs.push(name);
            }
            reps.push(RepReport {
                rep,
                seed: rep_seed,
                rounds,
                stop_reasons: reasons,
                max_final_dist: dist,
                gamma_final: gamma,
                messages_sent: messages,
                logs,
            });
        }

        let rounds: Vec<f64> = reps.iter().map(|r| r.rounds as f64).collect();
        let (mean_rounds, ci95_lo, ci95_hi) = stats::mean_ci95(&rounds);
        let converged = reps
            .iter()
            .filter(|r| {
                r.stop_reasons.iter().all(|s| {
                    s == StopReason::Converged.as_str() || s == StopReason::Plateaued.as_str()
                })
            })
            .count();
        let mean_messages =
            stats::mean(&reps.iter().map(|r| r.messages_sent as f64).collect::<Vec<_>>());
        points.push(PointReport {
            n,
            repetitions: cfg.repetitions,
            converged,
            mean_rounds,
            ci95_lo,
            ci95_hi,
            mean_messages,
            wall_ms: wall_start.elapsed().as_millis(),
            reps,
        });
    }

    let report = ExperimentReport {
        name: cfg.name.clone().unwrap_or_else(|| "experiment".into()),
        graph_kind: cfg.graph.label(),
        points,
    };
    let summary = serde_json::json!({
        "config": cfg,
        "report": &report,
    });
    write_file(
        &out_dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    write_file(&out_dir.join("plot_data.csv"), &report.plot_data())?;
    Ok(report)
}

/// Solve every instance the spec describes centrally and report the
/// optimizers; localization additionally assembles its bounding box.
pub fn reference_report(spec: &InstanceSpec) -> Result<serde_json::Value, CliError> {
    let mut items = Vec::new();
    let mut gammas = Vec::new();
    for instance in spec.build_all()? {
        let z_ref = reference_solve(&instance)?;
        let gamma = dot(&instance.objective, &z_ref);
        gammas.push(gamma);
        items.push(serde_json::json!({
            "name": instance.name,
            "z_ref": z_ref,
            "gamma": gamma,
        }));
    }
    let mut out = serde_json::json!({ "instances": items });
    if matches!(spec, InstanceSpec::Localization { .. }) && gammas.len() == 4 {
        let b = cpc_core::problems::localization::BoundingBox::from_gammas([
            gammas[0], gammas[1], gammas[2], gammas[3],
        ]);
        out["bounding_box"] = serde_json::json!({
            "x_min": b.x_min, "x_max": b.x_max,
            "y_min": b.y_min, "y_max": b.y_max,
        });
    }
    Ok(out)
}

pub fn load_columns(path: &Path) -> Result<ColumnsArtifact, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Rebuild a primal point from a run's column log and price the result
/// against the best Lagrangian bound among the final node queries. For
/// microgrid instances a per-unit dispatch schedule CSV is also written.
///
/// `claimed` is the spec the caller believes produced the artifact; it must
/// at least agree on the family. Pricing always uses the spec embedded in
/// the artifact, which carries the repetition's reseed.
pub fn recover_report(
    artifact: &ColumnsArtifact,
    claimed: &InstanceSpec,
    out_dir: &Path,
) -> Result<serde_json::Value, CliError> {
    if std::mem::discriminant(claimed) != std::mem::discriminant(&artifact.instance) {
        return Err(CliError::Config(format!(
            "artifact was produced from a {:?} instance, not the given one",
            artifact.instance
        )));
    }
    let spec = &artifact.instance;
    let recovered = recover(&artifact.columns, &artifact.h, &RecoveryOptions::default())?;
    let r = artifact.h.len();

    let (primal_cost, dual_value) = match spec {
        InstanceSpec::ColgenToy { r: r0, n, seed } => {
            let inst = cpc_core::problems::colgen_toy::gen_colgen_toy(*r0, *n, *seed)?;
            let cost: f64 = recovered
                .x_star
                .iter()
                .enumerate()
                .map(|(i, x)| inst.cost_of(i, x))
                .sum();
            let dual = artifact
                .final_query
                .iter()
                .map(|q| inst.lagrangian_bound(&q[..r]))
                .fold(f64::NEG_INFINITY, f64::max);
            (Some(cost), Some(dual))
        }
        InstanceSpec::Microgrid { .. } => {
            let mg = spec.microgrid()?;
            let cost = mg.total_cost(&recovered.x_star);
            let dual = artifact
                .final_query
                .iter()
                .map(|q| mg.lagrangian_bound(&q[..r]))
                .fold(f64::NEG_INFINITY, f64::max);

            let mut csv = String::from("unit,kind,period,power\n");
            for (i, x) in recovered.x_star.iter().enumerate() {
                let inj = mg.injection_of(i, x);
                for (t, p) in inj.iter().enumerate() {
                    csv.push_str(&format!("{},{},{},{}\n", i, mg.units[i].label(), t, p));
                }
            }
            fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
            write_file(&out_dir.join("schedule.csv"), &csv)?;
            (Some(cost), Some(dual))
        }
        _ => (None, None),
    };

    let mut out = serde_json::json!({
        "master_value": recovered.master_value,
        "balance_residual": recovered.balance_residual,
        "convexity_residual": recovered.convexity_residual,
        "x_star": recovered.x_star,
    });
    if let (Some(cost), Some(dual)) = (primal_cost, dual_value) {
        out["primal_cost"] = cost.into();
        out["dual_value"] = dual.into();
        out["cost_gap"] = (cost - dual).into();
    }
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    write_file(
        &out_dir.join("recovered.json"),
        &serde_json::to_string_pretty(&out).expect("recovery report serializes"),
    )?;
    Ok(out)
}
