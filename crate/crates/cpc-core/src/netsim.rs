//! Deterministic simulator of the communication network.
//!
//! Rounds are numbered from 1. In round `t` the scheduled live nodes each
//! drain their mailbox, execute one step, and send their updated basis along
//! the directed edges of `E(t)`; a message sent in round `t` becomes readable
//! in round `t+1`. Nodes that are not scheduled keep accumulating mail.
//! Everything (graph sampling, schedules, node order) is deterministic given
//! the configuration and seed, so two identical runs produce bit-identical
//! trace CSVs.

use crate::geometry::CutCollection;
use crate::node::{BasisMessage, Node, TraceRecord};
use crate::oracles::{Column, SeparationOracle};
use crate::rng;
use crate::scalar::Scalar;
use std::collections::VecDeque;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetSimError {
    #[error("graph: {0}")]
    InvalidGraph(String),
    #[error("schedule: {0}")]
    InvalidSchedule(String),
    #[error("fault plan: {0}")]
    InvalidFaultPlan(String),
    #[error("diameter undefined: graph is not strongly connected")]
    NotStronglyConnected,
    #[error("diameter undefined: graph varies per round")]
    NotStatic,
    #[error("instance: {0}")]
    InvalidInstance(String),
}

/// Directed communication graph, possibly time-varying.
#[derive(Clone, Debug)]
pub enum GraphKind {
    /// Fixed directed edge list.
    Static { edges: Vec<(usize, usize)> },
    /// Node `i` sends to `i+1, ..., i+k` modulo `n`.
    Circulant { k: usize },
    /// Undirected pairs drawn with probability `p` (both directions added),
    /// resampled each round or fixed at round 1.
    ErdosRenyi { p: f64, seed: u64, resample_each_round: bool },
    /// Cycles through the listed edge sets, one per round.
    Script { rounds: Vec<Vec<(usize, usize)>> },
}

#[derive(Clone, Debug)]
pub struct CommGraph {
    pub n: usize,
    pub kind: GraphKind,
}

fn validate_edges(n: usize, edges: &[(usize, usize)]) -> Result<(), NetSimError> {
    for &(i, j) in edges {
        if i == j {
            return Err(NetSimError::InvalidGraph(format!("self-loop at node {i}")));
        }
        if i >= n || j >= n {
            return Err(NetSimError::InvalidGraph(format!(
                "edge ({i}, {j}) outside 0..{n}"
            )));
        }
    }
    Ok(())
}

/// Default edge probability for random graphs: 1.2 log(n) / n.
pub fn default_er_p(n: usize) -> f64 {
    (1.2 * (n as f64).ln() / n as f64).min(1.0)
}

impl CommGraph {
    pub fn new(n: usize, kind: GraphKind) -> Result<Self, NetSimError> {
        if n == 0 {
            return Err(NetSimError::InvalidGraph("empty graph".into()));
        }
        match &kind {
            GraphKind::Static { edges } => validate_edges(n, edges)?,
            GraphKind::Circulant { k } => {
                if *k == 0 || *k >= n {
                    return Err(NetSimError::InvalidGraph(format!(
                        "circulant degree {k} out of range 1..{n}"
                    )));
                }
            }
            GraphKind::ErdosRenyi { p, .. } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(NetSimError::InvalidGraph(format!("edge probability {p}")));
                }
            }
            GraphKind::Script { rounds } => {
                if rounds.is_empty() {
                    return Err(NetSimError::InvalidGraph("empty edge-set script".into()));
                }
                for r in rounds {
                    validate_edges(n, r)?;
                }
            }
        }
        Ok(CommGraph { n, kind })
    }

    pub fn complete(n: usize) -> Result<Self, NetSimError> {
        if n == 1 {
            return CommGraph::new(1, GraphKind::Static { edges: vec![] });
        }
        CommGraph::new(n, GraphKind::Circulant { k: n - 1 })
    }

    pub fn directed_ring(n: usize) -> Result<Self, NetSimError> {
        CommGraph::new(n, GraphKind::Circulant { k: 1 })
    }

    /// Edge set of round `t` (1-based), sorted by (sender, receiver).
    pub fn edges(&self, round: u64) -> Vec<(usize, usize)> {
        let mut e = match &self.kind {
            GraphKind::Static { edges } => edges.clone(),
            GraphKind::Circulant { k } => {
                let mut out = Vec::with_capacity(self.n * k);
                for i in 0..self.n {
                    for j in 1..=*k {
                        out.push((i, (i + j) % self.n));
                    }
                }
                out
            }
            GraphKind::ErdosRenyi { p, seed, resample_each_round } => {
                let index = if *resample_each_round { round } else { 1 };
                let mut rng = rng::stream(*seed, "er-graph", index);
                let mut out = Vec::new();
                for i in 0..self.n {
                    for j in (i + 1)..self.n {
                        if rand::Rng::gen::<f64>(&mut rng) < *p {
                            out.push((i, j));
                            out.push((j, i));
                        }
                    }
                }
                out
            }
            GraphKind::Script { rounds } => {
                rounds[((round.max(1) - 1) as usize) % rounds.len()].clone()
            }
        };
        e.sort_unstable();
        e.dedup();
        e
    }

    fn is_static(&self) -> bool {
        match &self.kind {
            GraphKind::Static { .. } | GraphKind::Circulant { .. } => true,
            GraphKind::ErdosRenyi { resample_each_round, .. } => !resample_each_round,
            GraphKind::Script { rounds } => rounds.len() == 1,
        }
    }

    /// Longest shortest directed path; requires a fixed, strongly
    /// connected graph.
    pub fn diameter(&self) -> Result<usize, NetSimError> {
        if !self.is_static() {
            return Err(NetSimError::NotStatic);
        }
        let adj = adjacency(self.n, &self.edges(1));
        let mut diam = 0usize;
        for start in 0..self.n {
            let dist = bfs(&adj, start);
            for (j, d) in dist.iter().enumerate() {
                match d {
                    None if j != start => return Err(NetSimError::NotStronglyConnected),
                    Some(d) => diam = diam.max(*d),
                    None => {}
                }
            }
        }
        Ok(diam)
    }

    /// Rounds needed to flood information everywhere: the diameter when it
    /// is defined, otherwise the trivial bound `n`.
    pub fn flood_bound(&self) -> usize {
        self.diameter().unwrap_or(self.n)
    }
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
    }
    adj
}

fn bfs(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        let base = dist[i].expect("queued nodes have distances");
        for &j in &adj[i] {
            if dist[j].is_none() {
                dist[j] = Some(base + 1);
                queue.push_back(j);
            }
        }
    }
    dist
}

/// Kosaraju strong-connectivity check on an explicit edge list.
pub fn strongly_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let adj = adjacency(n, edges);
    let mut radj = vec![Vec::new(); n];
    for &(i, j) in edges {
        radj[j].push(i);
    }
    // Iterative DFS order pass.
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if visited[root] {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        visited[root] = true;
        while let Some(&mut (i, ref mut next)) = stack.last_mut() {
            if *next < adj[i].len() {
                let j = adj[i][*next];
                *next += 1;
                if !visited[j] {
                    visited[j] = true;
                    stack.push((j, 0));
                }
            } else {
                order.push(i);
                stack.pop();
            }
        }
    }
    // One reverse sweep from the last finished vertex must reach everything.
    let mut seen = vec![false; n];
    let mut stack = vec![*order.last().expect("n > 0")];
    seen[stack[0]] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for &j in &radj[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == n
}

/// True when the union of `window` consecutive edge sets is strongly
/// connected for each sampled start round (a heuristic stand-in for the
/// joint-connectivity assumption, which concerns infinite unions).
pub fn check_joint_connectivity(graph: &CommGraph, window: u64) -> Result<bool, NetSimError> {
    if window == 0 {
        return Err(NetSimError::InvalidGraph("window must be at least 1".into()));
    }
    let starts: Vec<u64> = if graph.is_static() {
        vec![1]
    } else {
        (0..4).map(|s| 1 + s * window).collect()
    };
    for start in starts {
        let mut union: Vec<(usize, usize)> = Vec::new();
        for t in start..start + window {
            union.extend(graph.edges(t));
        }
        union.sort_unstable();
        union.dedup();
        if !strongly_connected(graph.n, &union) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which nodes execute a step in a given round.
#[derive(Clone, Debug)]
pub enum Schedule {
    /// Every node, every round.
    Synchronous,
    /// Consecutive blocks of `group_size` node ids, wrapping around.
    RoundRobin { group_size: usize },
    /// Each node independently with probability `q`; the round owner
    /// `(t-1) mod n` is always included so rounds are never empty.
    RandomSubset { q: f64 },
    /// Cycles through explicit activation sets.
    Script { rounds: Vec<Vec<usize>> },
}

impl Schedule {
    pub fn validate(&self, n: usize) -> Result<(), NetSimError> {
        match self {
            Schedule::Synchronous => Ok(()),
            Schedule::RoundRobin { group_size } => {
                if *group_size == 0 || *group_size > n {
                    return Err(NetSimError::InvalidSchedule(format!(
                        "group size {group_size} out of range 1..={n}"
                    )));
                }
                Ok(())
            }
            Schedule::RandomSubset { q } => {
                if !(*q > 0.0 && *q <= 1.0) {
                    return Err(NetSimError::InvalidSchedule(format!(
                        "activation probability {q}"
                    )));
                }
                Ok(())
            }
            Schedule::Script { rounds } => {
                if rounds.is_empty() {
                    return Err(NetSimError::InvalidSchedule("empty script".into()));
                }
                let mut appears = vec![false; n];
                for r in rounds {
                    for &i in r {
                        if i >= n {
                            return Err(NetSimError::InvalidSchedule(format!(
                                "node {i} outside 0..{n}"
                            )));
                        }
                        appears[i] = true;
                    }
                }
                if let Some(skipped) = appears.iter().position(|a| !a) {
                    return Err(NetSimError::InvalidSchedule(format!(
                        "node {skipped} never activates within the script period"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Active node ids for round `t` (1-based), ascending.
    pub fn active(&self, round: u64, n: usize, seed: u64) -> Vec<usize> {
        let mut ids = match self {
            Schedule::Synchronous => (0..n).collect::<Vec<_>>(),
            Schedule::RoundRobin { group_size } => {
                let start = ((round - 1) as usize * group_size) % n;
                (0..*group_size).map(|i| (start + i) % n).collect()
            }
            Schedule::RandomSubset { q } => {
                let mut rng = rng::stream(seed, "schedule", round);
                let mut ids: Vec<usize> =
                    (0..n).filter(|_| rand::Rng::gen::<f64>(&mut rng) < *q).collect();
                let owner = ((round - 1) as usize) % n;
                if !ids.contains(&owner) {
                    ids.push(owner);
                }
                ids
            }
            Schedule::Script { rounds } => {
                rounds[((round - 1) as usize) % rounds.len()].clone()
            }
        };
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Permanent node failures: node `id` executes rounds `t < fail_round` and
/// never sends afterwards.
#[derive(Clone, Debug, Default)]
pub struct FaultPlan {
    failures: Vec<(usize, u64)>,
}

impl FaultPlan {
    pub fn none() -> Self {
        FaultPlan::default()
    }

    pub fn new(n: usize, failures: Vec<(usize, u64)>) -> Result<Self, NetSimError> {
        let mut seen = vec![false; n];
        for &(id, _) in &failures {
            if id >= n {
                return Err(NetSimError::InvalidFaultPlan(format!("node {id} outside 0..{n}")));
            }
            if seen[id] {
                return Err(NetSimError::InvalidFaultPlan(format!("node {id} fails twice")));
            }
            seen[id] = true;
        }
        Ok(FaultPlan { failures })
    }

    pub fn fail_round(&self, node: usize) -> Option<u64> {
        self.failures.iter().find(|(id, _)| *id == node).map(|(_, t)| *t)
    }

    pub fn is_alive(&self, node: usize, round: u64) -> bool {
        self.fail_round(node).map_or(true, |t_f| round < t_f)
    }

    pub fn failures(&self) -> &[(usize, u64)] {
        &self.failures
    }
}

#[derive(Clone, Debug)]
pub enum StopRule<S> {
    MaxRounds { rounds: u64 },
    /// Stop when every live node's query is within `eps` of `z_ref`.
    AllWithin { eps: S, z_ref: Vec<S>, max_rounds: u64 },
    /// Stop when no live node's objective dropped by more than `delta`
    /// over its last `window` executed steps.
    Plateau { delta: S, window: usize, max_rounds: u64 },
}

impl<S: Scalar> StopRule<S> {
    fn cap(&self) -> u64 {
        match self {
            StopRule::MaxRounds { rounds } => *rounds,
            StopRule::AllWithin { max_rounds, .. } | StopRule::Plateau { max_rounds, .. } => {
                *max_rounds
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxRounds,
    Converged,
    Plateaued,
    NoLiveNodes,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::MaxRounds => "max_rounds",
            StopReason::Converged => "converged",
            StopReason::Plateaued => "plateaued",
            StopReason::NoLiveNodes => "no_live_nodes",
        }
    }
}

/// A ready-to-run problem: a common objective and one oracle per node.
pub struct Instance<S> {
    pub name: String,
    pub objective: Vec<S>,
    pub oracles: Vec<Box<dyn SeparationOracle<S>>>,
    /// Reference optimizer when known; used for trace distances.
    pub z_ref: Option<Vec<S>>,
    pub node_cfg: crate::node::NodeConfig<S>,
}

impl<S: Scalar> Instance<S> {
    pub fn n(&self) -> usize {
        self.oracles.len()
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord<S> {
    pub node: usize,
    pub rec: TraceRecord<S>,
}

#[derive(Debug)]
pub struct RunLog<S> {
    pub n: usize,
    pub dim: usize,
    pub stop_round: u64,
    pub stop_reason: StopReason,
    /// Every executed step, ordered by round then node id.
    pub records: Vec<RunRecord<S>>,
    pub final_query: Vec<Vec<S>>,
    /// Bases at the end of the run (after flooding when enabled).
    pub final_bases: Vec<CutCollection<S>>,
    /// Per-node witness columns, in generation order.
    pub columns: Vec<Vec<Column<S>>>,
    /// Nodes that entered an error state: (node, round, message).
    pub node_errors: Vec<(usize, u64, String)>,
    pub messages_sent: u64,
    pub scalars_sent: u64,
    pub wall: Duration,
    pub z_ref: Option<Vec<S>>,
}

fn fmt_scalar<S: Scalar>(x: S) -> String {
    let v = x.to_f64_lossy();
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

impl<S: Scalar> RunLog<S> {
    /// One row per executed step: `round,node,gamma,dist_to_ref,basis_size,verdict,slack`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,node,gamma,dist_to_ref,basis_size,verdict,slack\n");
        for r in &self.records {
            let dist = match &self.z_ref {
                Some(z_ref) => fmt_scalar(crate::linalg::dist2(&r.rec.z, z_ref)),
                None => "nan".into(),
            };
            let verdict = if r.rec.inside { "inside" } else { "cut" };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.rec.round,
                r.node,
                fmt_scalar(r.rec.gamma),
                dist,
                r.rec.basis_size,
                verdict,
                fmt_scalar(r.rec.violation),
            ));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "dim": self.dim,
            "stop_round": self.stop_round,
            "stop_reason": self.stop_reason.as_str(),
            "steps": self.records.len(),
            "messages_sent": self.messages_sent,
            "scalars_sent": self.scalars_sent,
            "node_errors": self.node_errors.iter()
                .map(|(n, r, m)| serde_json::json!({"node": n, "round": r, "error": m}))
                .collect::<Vec<_>>(),
            "final_query": self.final_query.iter()
                .map(|z| z.iter().map(|&v| v.to_f64_lossy()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "wall_ms": self.wall.as_secs_f64() * 1e3,
        })
    }

    pub fn node_records(&self, node: usize) -> impl Iterator<Item = &TraceRecord<S>> {
        self.records.iter().filter(move |r| r.node == node).map(|r| &r.rec)
    }

    /// Objective value of a node's last executed step.
    pub fn last_gamma(&self, node: usize) -> Option<S> {
        self.node_records(node).last().map(|r| r.gamma)
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions<S> {
    pub stop: StopRule<S>,
    pub seed: u64,
    /// After stopping, merge-propagate final bases for `flood_bound()`
    /// extra rounds so every node holds the union (used before recovery).
    pub flood_after_stop: bool,
}

/// Simulate per the module contract. Node errors do not abort the run: an
/// errored node stops executing and sending, like a failed one.
pub fn run<S: Scalar>(
    instance: Instance<S>,
    graph: &CommGraph,
    schedule: &Schedule,
    faults: &FaultPlan,
    opts: &RunOptions<S>,
) -> Result<RunLog<S>, NetSimError> {
    let start = Instant::now();
    let n = instance.n();
    if n != graph.n {
        return Err(NetSimError::InvalidInstance(format!(
            "instance has {n} nodes, graph has {}",
            graph.n
        )));
    }
    if n == 0 {
        return Err(NetSimError::InvalidInstance("no nodes".into()));
    }
    schedule.validate(n)?;
    FaultPlan::new(n, faults.failures().to_vec())?;

    let Instance { objective, oracles, z_ref, node_cfg, .. } = instance;
    let mut nodes: Vec<Node<S>> = Vec::with_capacity(n);
    for (id, oracle) in oracles.into_iter().enumerate() {
        let node = Node::new(id, objective.clone(), oracle, node_cfg)
            .map_err(|e| NetSimError::InvalidInstance(format!("node {id}: {e}")))?;
        nodes.push(node);
    }

    let mut mailboxes: Vec<Vec<BasisMessage<S>>> = vec![Vec::new(); n];
    let mut errored: Vec<Option<u64>> = vec![None; n];
    let mut records: Vec<RunRecord<S>> = Vec::new();
    let mut node_errors: Vec<(usize, u64, String)> = Vec::new();
    let mut messages_sent = 0u64;
    let mut scalars_sent = 0u64;
    let cap = opts.stop.cap();
    let mut stop_round = cap;
    let mut stop_reason = StopReason::MaxRounds;

    let live = |errored: &[Option<u64>], round: u64| -> Vec<usize> {
        (0..n)
            .filter(|&i| faults.is_alive(i, round) && errored[i].is_none())
            .collect()
    };

    for round in 1..=cap {
        let scheduled = schedule.active(round, n, opts.seed);
        let mut stepped: Vec<usize> = Vec::with_capacity(scheduled.len());
        for &i in &scheduled {
            if !faults.is_alive(i, round) || errored[i].is_some() {
                continue;
            }
            let inbox = std::mem::take(&mut mailboxes[i]);
            match nodes[i].step(round, &inbox) {
                Ok(rec) => {
                    records.push(RunRecord { node: i, rec: rec.clone() });
                    stepped.push(i);
                }
                Err(e) => {
                    errored[i] = Some(round);
                    node_errors.push((i, round, e.to_string()));
                }
            }
        }
        for (i, j) in graph.edges(round) {
            if stepped.binary_search(&i).is_ok() {
                let msg = nodes[i].message(round);
                messages_sent += 1;
                scalars_sent += msg.payload_len() as u64 + 2;
                mailboxes[j].push(msg);
            }
        }

        let live_now = live(&errored, round + 1);
        if live_now.is_empty() {
            stop_round = round;
            stop_reason = StopReason::NoLiveNodes;
            break;
        }
        match &opts.stop {
            StopRule::MaxRounds { .. } => {}
            StopRule::AllWithin { eps, z_ref, .. } => {
                if live_now.iter().all(|&i| nodes[i].has_converged(z_ref, *eps)) {
                    stop_round = round;
                    stop_reason = StopReason::Converged;
                    break;
                }
            }
            StopRule::Plateau { delta, window, .. } => {
                let settled = live_now.iter().all(|&i| {
                    let t = &nodes[i].trace;
                    t.len() > *window
                        && t[t.len() - 1 - window].gamma - t[t.len() - 1].gamma <= *delta
                });
                if settled {
                    stop_round = round;
                    stop_reason = StopReason::Plateaued;
                    break;
                }
            }
        }
    }

    let mut final_bases: Vec<CutCollection<S>> =
        nodes.iter().map(|nd| nd.basis().clone()).collect();
    if opts.flood_after_stop {
        let flood_rounds = graph.flood_bound() as u64;
        for extra in 1..=flood_rounds {
            let round = stop_round + extra;
            let snapshot = final_bases.clone();
            for (i, j) in graph.edges(round) {
                if faults.is_alive(i, round) && errored[i].is_none() {
                    final_bases[j]
                        .merge(&snapshot[i])
                        .map_err(|e| NetSimError::InvalidInstance(e.to_string()))?;
                }
            }
        }
    }

    Ok(RunLog {
        n,
        dim: nodes[0].dim(),
        stop_round,
        stop_reason,
        records,
        final_query: nodes.iter().map(|nd| nd.query().to_vec()).collect(),
        final_bases,
        columns: nodes.into_iter().map(|nd| nd.columns).collect(),
        node_errors,
        messages_sent,
        scalars_sent,
        wall: start.elapsed(),
        z_ref,
    })
}
