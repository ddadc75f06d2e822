//! A consensus node.
//!
//! Each node keeps a candidate basis of cuts. In every round it executes,
//! the node merges its basis with everything received from neighbors,
//! computes the min-norm maximizer of the common objective over the merged
//! collection, reduces the collection to a basis, and queries its local
//! separation oracle at the candidate point. A violated cut is added to the
//! basis before the next round; the basis is what the node transmits.
//!
//! The per-node objective value is non-increasing across rounds because a
//! node's next candidate is always optimal over a collection containing its
//! previous basis.

use crate::geometry::{box_basis, CutCollection, GeometryError, Provenance};
use crate::minnorm::{extract_basis, solve_min_norm, MinNormResult, SolverConfig};
use crate::oracles::{Column, SeparationOracle};
use crate::qp::SolveError;
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NodeError {
    #[error("node {node} round {round}: local program infeasible")]
    LocalInfeasible { node: usize, round: u64 },
    #[error("node {node} round {round}: program unbounded despite the initial box")]
    Unbounded { node: usize, round: u64 },
    #[error("node {node} dimension mismatch: objective {objective}, oracle {oracle}")]
    DimensionMismatch { node: usize, objective: usize, oracle: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug)]
pub struct NodeConfig<S> {
    pub solver: SolverConfig<S>,
    /// Membership slack granted to the oracle verdict.
    pub tol_mem: S,
    /// Half-width of the initial bounding box.
    pub box_bound: S,
}

impl<S: Scalar> Default for NodeConfig<S> {
    fn default() -> Self {
        NodeConfig { solver: SolverConfig::default(), tol_mem: S::of(1e-7), box_bound: S::of(1e5) }
    }
}

/// What a node did in one executed round.
#[derive(Clone, Debug)]
pub struct TraceRecord<S> {
    pub round: u64,
    /// Objective value of the candidate, before the oracle reacts.
    pub gamma: S,
    pub z: Vec<S>,
    pub inside: bool,
    /// Oracle constraint value at the candidate (positive when violated).
    pub violation: S,
    pub basis_size: usize,
    pub degenerate: bool,
}

/// One transmitted basis with its envelope.
#[derive(Clone, Debug)]
pub struct BasisMessage<S> {
    pub sender: usize,
    pub round: u64,
    pub cuts: CutCollection<S>,
}

impl<S: Scalar> BasisMessage<S> {
    /// Payload size in scalars (excluding the fixed header).
    pub fn payload_len(&self) -> usize {
        self.cuts.wire_len()
    }
}

pub struct Node<S> {
    pub id: usize,
    c: Vec<S>,
    basis: CutCollection<S>,
    query: Vec<S>,
    oracle: Box<dyn SeparationOracle<S>>,
    cfg: NodeConfig<S>,
    lambda_hint: Option<S>,
    /// Witness columns produced by the local oracle, in query order.
    pub columns: Vec<Column<S>>,
    pub trace: Vec<TraceRecord<S>>,
}

impl<S: Scalar> Node<S> {
    /// Initialize with a bounding box, reduce it to a basis for the
    /// objective, and compute the starting query point.
    pub fn new(
        id: usize,
        c: Vec<S>,
        oracle: Box<dyn SeparationOracle<S>>,
        cfg: NodeConfig<S>,
    ) -> Result<Self, NodeError> {
        if oracle.dim() != c.len() {
            return Err(NodeError::DimensionMismatch {
                node: id,
                objective: c.len(),
                oracle: oracle.dim(),
            });
        }
        let boxed = box_basis(c.len(), cfg.box_bound)?;
        let mut node = Node {
            id,
            c,
            basis: boxed,
            query: Vec::new(),
            oracle,
            cfg,
            lambda_hint: None,
            columns: Vec::new(),
            trace: Vec::new(),
        };
        let sol = node.solve_collection(&node.basis.clone(), 0)?;
        node.query = sol.z_star.clone();
        node.basis = extract_basis(&node.basis, &node.c, &sol, &node.cfg.solver)?.cuts;
        Ok(node)
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self) -> &[S] {
        &self.c
    }

    /// The message this node would transmit: its current basis.
    pub fn basis(&self) -> &CutCollection<S> {
        &self.basis
    }

    pub fn last_record(&self) -> Option<&TraceRecord<S>> {
        self.trace.last()
    }

    /// Query point of the most recent solve (the initial one before any
    /// step has executed).
    pub fn query(&self) -> &[S] {
        &self.query
    }

    pub fn has_converged(&self, z_ref: &[S], eps: S) -> bool {
        crate::linalg::dist2(&self.query, z_ref) <= eps
    }

    /// The message this node transmits after a round.
    pub fn message(&self, round: u64) -> BasisMessage<S> {
        BasisMessage { sender: self.id, round, cuts: self.basis.clone() }
    }

    fn solve_collection(
        &mut self,
        h: &CutCollection<S>,
        round: u64,
    ) -> Result<crate::minnorm::ApproxLpSolution<S>, NodeError> {
        match solve_min_norm(h, &self.c, &self.cfg.solver, self.lambda_hint)? {
            MinNormResult::Optimal(sol) => {
                self.lambda_hint = Some(sol.lambda);
                Ok(sol)
            }
            MinNormResult::Infeasible => {
                Err(NodeError::LocalInfeasible { node: self.id, round })
            }
            MinNormResult::Unbounded { .. } => Err(NodeError::Unbounded { node: self.id, round }),
        }
    }

    /// Execute one round with the given received messages.
    pub fn step(
        &mut self,
        round: u64,
        inbox: &[BasisMessage<S>],
    ) -> Result<&TraceRecord<S>, NodeError> {
        let mut h = self.basis.clone();
        for received in inbox {
            h.merge(&received.cuts)?;
        }
        let sol = self.solve_collection(&h, round)?;
        let gamma = sol.gamma;
        let z = sol.z_star.clone();
        let tmp = extract_basis(&h, &self.c, &sol, &self.cfg.solver)?;
        let reply = self.oracle.query(&z);
        let column = reply.witness.as_ref().map(|_| self.columns.len());
        if let Some(col) = reply.witness.clone() {
            self.columns.push(col);
        }
        let (next_basis, degenerate) = if reply.is_inside() {
            (tmp.cuts, tmp.degenerate)
        } else {
            let cut = reply.cut.as_ref().expect("violated reply carries a cut");
            let mut h2 = tmp.cuts;
            h2.insert(cut, Provenance { node: self.id, round, column })?;
            let sol2 = self.solve_collection(&h2, round)?;
            let b2 = extract_basis(&h2, &self.c, &sol2, &self.cfg.solver)?;
            (b2.cuts, b2.degenerate)
        };
        let basis_size = next_basis.len();
        self.basis = next_basis;
        self.query = z.clone();
        self.trace.push(TraceRecord {
            round,
            gamma,
            z,
            inside: reply.is_inside(),
            violation: reply.violation,
            basis_size,
            degenerate: degenerate || tmp.degenerate,
        });
        Ok(self.trace.last().expect("just pushed"))
    }
}
