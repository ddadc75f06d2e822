//! Separation oracles.
//!
//! An oracle answers membership queries for one node's constraint set: given
//! a query point it either confirms membership or returns a violated
//! half-space separating the point from the set, together with the violation
//! magnitude at the query point. Cuts are returned raw (unnormalized);
//! normalization happens when they enter a collection.

use crate::geometry::HalfSpace;
use crate::linalg::{dot, norm2, SymMat};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ellipsoidal uncertainty requires the affine form of the constraint")]
    MissingAffineForm,
    #[error("oracle needs at least one constituent")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Inside,
    Violated,
}

/// A witness column produced by a column-generation oracle: the subproblem
/// minimizer, its coupling contribution, and its cost. Columns stay local
/// to the node that produced them.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Column<S> {
    pub owner: usize,
    pub x: Vec<S>,
    pub gx: Vec<S>,
    pub cost: S,
}

#[derive(Clone, Debug)]
pub struct OracleReply<S> {
    pub verdict: Verdict,
    /// Violated half-space, raw. `None` when inside.
    pub cut: Option<HalfSpace<S>>,
    /// Constraint value at the query point; positive when violated.
    pub violation: S,
    /// Index of the constituent that decided the reply, when meaningful.
    pub branch: Option<usize>,
    pub witness: Option<Column<S>>,
}

impl<S: Scalar> OracleReply<S> {
    pub fn is_inside(&self) -> bool {
        self.verdict == Verdict::Inside
    }

    fn inside(violation: S) -> Self {
        OracleReply { verdict: Verdict::Inside, cut: None, violation, branch: None, witness: None }
    }

    fn violated(cut: HalfSpace<S>, violation: S) -> Self {
        OracleReply {
            verdict: Verdict::Violated,
            cut: Some(cut),
            violation,
            branch: None,
            witness: None,
        }
    }
}

pub trait SeparationOracle<S>: Send {
    fn dim(&self) -> usize;
    fn query(&self, z: &[S]) -> OracleReply<S>;
}

type ValueGrad<S> = Box<dyn Fn(&[S]) -> (S, Vec<S>) + Send + Sync>;

/// Pointwise maximum of finitely many smooth convex constraints
/// `f_i(z) <= 0`, separated by first-order cuts at the query point.
pub struct InequalityOracle<S> {
    dim: usize,
    components: Vec<ValueGrad<S>>,
    pub tol: S,
}

impl<S: Scalar> InequalityOracle<S> {
    pub fn new(dim: usize, components: Vec<ValueGrad<S>>, tol: S) -> Result<Self, OracleError> {
        if components.is_empty() {
            return Err(OracleError::Empty);
        }
        Ok(InequalityOracle { dim, components, tol })
    }
}

impl<S: Scalar> SeparationOracle<S> for InequalityOracle<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&self, z: &[S]) -> OracleReply<S> {
        debug_assert_eq!(z.len(), self.dim);
        let mut best: Option<(usize, S, Vec<S>)> = None;
        for (i, f) in self.components.iter().enumerate() {
            let (v, g) = f(z);
            if best.as_ref().map_or(true, |(_, bv, _)| v > *bv) {
                best = Some((i, v, g));
            }
        }
        let (branch, value, grad) = best.expect("nonempty family");
        if value <= self.tol {
            return OracleReply { branch: Some(branch), ..OracleReply::inside(value) };
        }
        let b = dot(&grad, z) - value;
        let cut = HalfSpace { a: grad, b };
        OracleReply { branch: Some(branch), ..OracleReply::violated(cut, value) }
    }
}

/// Linear matrix inequality `F0 + sum_k z_k F_k <= 0` (negative
/// semidefinite), separated through the leading eigenvector.
pub struct SemidefiniteOracle<S> {
    f0: SymMat<S>,
    fs: Vec<SymMat<S>>,
    pub tol: S,
}

impl<S: Scalar> SemidefiniteOracle<S> {
    pub fn new(f0: SymMat<S>, fs: Vec<SymMat<S>>, tol: S) -> Result<Self, OracleError> {
        if fs.is_empty() {
            return Err(OracleError::Empty);
        }
        for f in &fs {
            if f.n != f0.n {
                return Err(OracleError::DimensionMismatch { expected: f0.n, got: f.n });
            }
        }
        Ok(SemidefiniteOracle { f0, fs, tol })
    }
}

impl<S: Scalar> SeparationOracle<S> for SemidefiniteOracle<S> {
    fn dim(&self) -> usize {
        self.fs.len()
    }

    fn query(&self, z: &[S]) -> OracleReply<S> {
        debug_assert_eq!(z.len(), self.fs.len());
        let mut m = self.f0.clone();
        for (k, f) in self.fs.iter().enumerate() {
            m.add_scaled(z[k], f);
        }
        let (evals, evecs) = crate::linalg::jacobi_eigh(&m);
        let lam = evals[0];
        if lam <= self.tol {
            return OracleReply::inside(lam);
        }
        let v = &evecs[0];
        // v' (F0 + sum z_k F_k) v = lam, so a . z <= a . z_q - lam cuts z_q
        // off while every feasible point satisfies it.
        let a: Vec<S> = self.fs.iter().map(|f| f.quad_form(v)).collect();
        let b = dot(&a, z) - lam;
        OracleReply::violated(HalfSpace { a, b }, lam)
    }
}

/// Worst-case parameter sets for [`UncertainOracle`].
pub enum UncertaintySet<S> {
    /// `{ center + shape * u : |u| <= 1 }`; pessimized in closed form,
    /// which requires the affine form of the constraint.
    Ellipsoid { center: Vec<S>, shape: crate::linalg::Mat<S> },
    /// Finite vertex list; pessimized by enumeration (lowest index wins
    /// ties), exact for constraints affine in the parameter.
    Polytope { vertices: Vec<Vec<S>> },
    /// User-supplied maximizer mapping a query point to a worst parameter.
    Custom(Box<dyn Fn(&[S]) -> Vec<S> + Send + Sync>),
}

type ParamFn<S> = Box<dyn Fn(&[S], &[S]) -> S + Send + Sync>;
type ParamGradFn<S> = Box<dyn Fn(&[S], &[S]) -> Vec<S> + Send + Sync>;
type AffineFormFn<S> = Box<dyn Fn(&[S]) -> (Vec<S>, S) + Send + Sync>;

/// Robust constraint `f(z, theta) <= 0` for every `theta` in an uncertainty
/// set. The oracle pessimizes over the set, then separates with a
/// subgradient in `z` at the worst parameter.
pub struct UncertainOracle<S> {
    dim: usize,
    eval: ParamFn<S>,
    subgrad_z: ParamGradFn<S>,
    /// `z -> (alpha, beta)` with `f(z, theta) = alpha . theta + beta`;
    /// required for ellipsoidal sets.
    affine: Option<AffineFormFn<S>>,
    set: UncertaintySet<S>,
    pub tol: S,
}

impl<S: Scalar> UncertainOracle<S> {
    pub fn new(
        dim: usize,
        eval: ParamFn<S>,
        subgrad_z: ParamGradFn<S>,
        affine: Option<AffineFormFn<S>>,
        set: UncertaintySet<S>,
        tol: S,
    ) -> Result<Self, OracleError> {
        match &set {
            UncertaintySet::Ellipsoid { .. } if affine.is_none() => {
                return Err(OracleError::MissingAffineForm)
            }
            UncertaintySet::Polytope { vertices } if vertices.is_empty() => {
                return Err(OracleError::Empty)
            }
            _ => {}
        }
        Ok(UncertainOracle { dim, eval, subgrad_z, affine, set, tol })
    }

    /// Worst parameter for the constraint at `z` and its branch index
    /// (vertex index for polytopes).
    pub fn pessimize(&self, z: &[S]) -> (Vec<S>, Option<usize>) {
        match &self.set {
            UncertaintySet::Ellipsoid { center, shape } => {
                let (alpha, _) = (self.affine.as_ref().expect("checked at construction"))(z);
                let pta = shape.matvec_t(&alpha);
                let n = norm2(&pta);
                if n <= S::of(1e-300) {
                    return (center.clone(), None);
                }
                let u: Vec<S> = pta.iter().map(|&v| v / n).collect();
                let pu = shape.matvec(&u);
                (center.iter().zip(&pu).map(|(&c, &p)| c + p).collect(), None)
            }
            UncertaintySet::Polytope { vertices } => {
                let mut best = 0usize;
                let mut best_v = (self.eval)(z, &vertices[0]);
                for (i, th) in vertices.iter().enumerate().skip(1) {
                    let v = (self.eval)(z, th);
                    if v > best_v {
                        best_v = v;
                        best = i;
                    }
                }
                (vertices[best].clone(), Some(best))
            }
            UncertaintySet::Custom(f) => (f(z), None),
        }
    }
}

impl<S: Scalar> SeparationOracle<S> for UncertainOracle<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn query(&self, z: &[S]) -> OracleReply<S> {
        debug_assert_eq!(z.len(), self.dim);
        let (theta, branch) = self.pessimize(z);
        let value = (self.eval)(z, &theta);
        if value <= self.tol {
            return OracleReply { branch, ..OracleReply::inside(value) };
        }
        let a = (self.subgrad_z)(z, &theta);
        let b = dot(&a, z) - value;
        OracleReply { branch, ..OracleReply::violated(HalfSpace { a, b }, value) }
    }
}

/// Intersection of the constituents' sets: replies with the most violated
/// constituent's cut (lowest index on ties), or Inside with the largest
/// constituent value when all agree.
pub struct IntersectionOracle<S> {
    parts: Vec<Box<dyn SeparationOracle<S>>>,
}

impl<S: Scalar> IntersectionOracle<S> {
    pub fn new(parts: Vec<Box<dyn SeparationOracle<S>>>) -> Result<Self, OracleError> {
        if parts.is_empty() {
            return Err(OracleError::Empty);
        }
        let dim = parts[0].dim();
        for p in &parts {
            if p.dim() != dim {
                return Err(OracleError::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        Ok(IntersectionOracle { parts })
    }
}

impl<S: Scalar> SeparationOracle<S> for IntersectionOracle<S> {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn query(&self, z: &[S]) -> OracleReply<S> {
        let mut best: Option<(usize, OracleReply<S>)> = None;
        for (i, p) in self.parts.iter().enumerate() {
            let r = p.query(z);
            if best.as_ref().map_or(true, |(_, b)| r.violation > b.violation) {
                best = Some((i, r));
            }
        }
        let (i, reply) = best.expect("nonempty parts");
        OracleReply { branch: Some(i), ..reply }
    }
}

/// Subproblem answer for [`ColGenOracle`]: minimizer of
/// `cost(x) + pi . (G x)` over the local feasible set, reported as the
/// point, its coupling image `G x`, and its raw cost.
#[derive(Clone, Debug)]
pub struct SubproblemSolution<S> {
    pub x: Vec<S>,
    pub gx: Vec<S>,
    pub cost: S,
}

type SubproblemFn<S> = Box<dyn Fn(&[S]) -> SubproblemSolution<S> + Send + Sync>;

/// Epigraph oracle for dual decomposition. The decision vector is
/// `z = (pi, u)` with coupling prices `pi` and one epigraph variable per
/// agent; agent `owner` checks `u_owner <= min_x cost(x) + pi . (G x)` and
/// separates with the optimality cut of its subproblem minimizer. Every
/// query yields a witness column regardless of the verdict.
pub struct ColGenOracle<S> {
    pub owner: usize,
    pub coupling_dim: usize,
    pub n_agents: usize,
    solver: SubproblemFn<S>,
    pub tol: S,
}

impl<S: Scalar> ColGenOracle<S> {
    pub fn new(
        owner: usize,
        coupling_dim: usize,
        n_agents: usize,
        solver: SubproblemFn<S>,
        tol: S,
    ) -> Self {
        ColGenOracle { owner, coupling_dim, n_agents, solver, tol }
    }
}

impl<S: Scalar> SeparationOracle<S> for ColGenOracle<S> {
    fn dim(&self) -> usize {
        self.coupling_dim + self.n_agents
    }

    fn query(&self, z: &[S]) -> OracleReply<S> {
        debug_assert_eq!(z.len(), self.dim());
        let pi = &z[..self.coupling_dim];
        let u = z[self.coupling_dim + self.owner];
        let sub = (self.solver)(pi);
        let priced = sub.cost + dot(pi, &sub.gx);
        let s = u - priced;
        let witness =
            Column { owner: self.owner, x: sub.x.clone(), gx: sub.gx.clone(), cost: sub.cost };
        if s <= self.tol {
            return OracleReply { witness: Some(witness), ..OracleReply::inside(s) };
        }
        // u - (G x) . pi <= cost(x) holds for every feasible (pi, u).
        let mut a = vec![S::zero(); self.dim()];
        for (k, &g) in sub.gx.iter().enumerate() {
            a[k] = -g;
        }
        a[self.coupling_dim + self.owner] = S::one();
        let cut = HalfSpace { a, b: sub.cost };
        OracleReply { witness: Some(witness), ..OracleReply::violated(cut, s) }
    }
}
