//! Dense active-set solvers: projection onto a polyhedron and nonnegative
//! least squares.
//!
//! `project` computes `argmin |x - g|` subject to `a_i . x <= b_i` with a
//! dual active-set method in the Goldfarb-Idnani style, specialized to a
//! unit Hessian: it starts from the unconstrained optimum `g` and adds the
//! most violated constraint until none remains, maintaining a QR
//! factorization of the active normals. No feasible starting point is
//! needed, infeasibility is detected exactly (Farkas-style), and the final
//! active set is linearly independent with nonnegative multipliers.
//!
//! All tie-breaking is deterministic (most violated constraint, then lowest
//! index), so identical inputs produce identical outputs.

use crate::geometry::HalfSpace;
use crate::linalg::{axpy, dot, norm2, Mat};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("active-set iteration cap {cap} exceeded (worst violation {violation})")]
    IterationCap { cap: usize, violation: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Result of a feasible projection.
#[derive(Clone, Debug)]
pub struct Projection<S> {
    pub x: Vec<S>,
    /// Indices of active constraints, linearly independent.
    pub active: Vec<usize>,
    /// Multipliers aligned with `active`; all nonnegative, and
    /// `x = g - sum mu_j a_j`.
    pub multipliers: Vec<S>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub enum ProjectOutcome<S> {
    Feasible(Projection<S>),
    Infeasible,
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectOptions<S> {
    /// A constraint counts as satisfied when its violation is at most this.
    pub feas_tol: S,
    pub iter_cap: usize,
}

/// QR factorization of the active normal matrix, updated incrementally.
/// `y` holds orthonormal columns; `r` is upper triangular, stored by
/// columns (`r[j]` has `j + 1` entries).
struct ActiveQr<S> {
    dim: usize,
    y: Vec<Vec<S>>,
    r: Vec<Vec<S>>,
}

impl<S: Scalar> ActiveQr<S> {
    fn new(dim: usize) -> Self {
        ActiveQr { dim, y: Vec::new(), r: Vec::new() }
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    /// Coefficients of `v` in the orthonormal basis, and the residual
    /// component orthogonal to it (with one reorthogonalization pass).
    fn split(&self, v: &[S]) -> (Vec<S>, Vec<S>) {
        let mut w: Vec<S> = self.y.iter().map(|col| dot(col, v)).collect();
        let mut z = v.to_vec();
        for (col, &wj) in self.y.iter().zip(&w) {
            axpy(-wj, col, &mut z);
        }
        for (j, col) in self.y.iter().enumerate() {
            let c = dot(col, &z);
            w[j] = w[j] + c;
            axpy(-c, col, &mut z);
        }
        (w, z)
    }

    /// Solve `R r = w` by back substitution.
    fn solve_r(&self, w: &[S]) -> Vec<S> {
        let q = self.len();
        let mut out = vec![S::zero(); q];
        for i in (0..q).rev() {
            let mut s = w[i];
            for j in i + 1..q {
                s = s - self.r[j][i] * out[j];
            }
            out[i] = s / self.r[i][i];
        }
        out
    }

    /// Append a column whose orthogonal residual `z` has norm `rho`.
    fn push(&mut self, mut w: Vec<S>, z: &[S], rho: S) {
        let col: Vec<S> = z.iter().map(|&v| v / rho).collect();
        self.y.push(col);
        w.push(rho);
        self.r.push(w);
    }

    /// Remove column `j`, re-triangularizing with Givens rotations.
    fn remove(&mut self, j: usize) {
        let q = self.len();
        self.r.remove(j);
        for k in j..q - 1 {
            // r[k] (old column k+1) currently has k + 2 entries; rotate rows
            // (k, k+1) to zero the subdiagonal entry.
            let a = self.r[k][k];
            let b = self.r[k][k + 1];
            let h = (a * a + b * b).sqrt();
            if h <= S::of(1e-300) {
                self.r[k].truncate(k + 1);
                continue;
            }
            let (c, s) = (a / h, b / h);
            self.r[k][k] = h;
            self.r[k].truncate(k + 1);
            for col in self.r.iter_mut().skip(k + 1) {
                let a = col[k];
                let b = col[k + 1];
                col[k] = c * a + s * b;
                col[k + 1] = -s * a + c * b;
            }
            for i in 0..self.dim {
                let a = self.y[k][i];
                let b = self.y[k + 1][i];
                self.y[k][i] = c * a + s * b;
                self.y[k + 1][i] = -s * a + c * b;
            }
        }
        self.y.pop();
    }
}

/// Project `g` onto `{ x : a_i . x <= b_i }`.
///
/// Constraint normals should be of comparable magnitude (callers pass
/// normalized cuts); tolerances are absolute.
pub fn project<S: Scalar>(
    g: &[S],
    cuts: &[HalfSpace<S>],
    opts: &ProjectOptions<S>,
) -> Result<ProjectOutcome<S>, SolveError> {
    let dim = g.len();
    let mut x = g.to_vec();
    let mut qr = ActiveQr::new(dim);
    let mut active: Vec<usize> = Vec::new();
    let mut mult: Vec<S> = Vec::new();
    let mut in_active = vec![false; cuts.len()];
    let dep_tol = S::epsilon().powf(S::of(2.0 / 3.0));
    let mut iterations = 0usize;

    loop {
        // Most violated constraint, lowest index on ties.
        let mut p = usize::MAX;
        let mut worst = opts.feas_tol;
        for (i, cut) in cuts.iter().enumerate() {
            if in_active[i] {
                continue;
            }
            let v = cut.violation(&x);
            if v > worst {
                worst = v;
                p = i;
            }
        }
        if p == usize::MAX {
            return Ok(ProjectOutcome::Feasible(Projection {
                x,
                active,
                multipliers: mult,
                iterations,
            }));
        }

        let a_p = &cuts[p].a;
        let mut u_plus = S::zero();
        loop {
            iterations += 1;
            if iterations > opts.iter_cap {
                return Err(SolveError::IterationCap {
                    cap: opts.iter_cap,
                    violation: worst.to_f64_lossy(),
                });
            }
            let (w, z) = qr.split(a_p);
            let rho = norm2(&z);
            let r = qr.solve_r(&w);
            let viol = cuts[p].violation(&x);
            if viol <= opts.feas_tol {
                // Resolved by dual steps alone (degenerate geometry).
                break;
            }
            // Dual blocking step: first active multiplier driven to zero.
            let mut t1 = S::infinity();
            let mut block = usize::MAX;
            for (j, &rj) in r.iter().enumerate() {
                if rj > S::epsilon() {
                    let t = mult[j] / rj;
                    if t < t1 {
                        t1 = t;
                        block = j;
                    }
                }
            }
            if rho > dep_tol {
                let zn2 = rho * rho;
                let t2 = viol / zn2;
                if t1 < t2 {
                    axpy(-t1, &z, &mut x);
                    for (m, &rj) in mult.iter_mut().zip(&r) {
                        *m = *m - t1 * rj;
                    }
                    u_plus = u_plus + t1;
                    in_active[active[block]] = false;
                    active.remove(block);
                    mult.remove(block);
                    qr.remove(block);
                } else {
                    axpy(-t2, &z, &mut x);
                    for (m, &rj) in mult.iter_mut().zip(&r) {
                        *m = *m - t2 * rj;
                    }
                    u_plus = u_plus + t2;
                    qr.push(w, &z, rho);
                    active.push(p);
                    mult.push(u_plus);
                    in_active[p] = true;
                    break;
                }
            } else {
                // New normal is dependent on the active ones.
                if block == usize::MAX {
                    return Ok(ProjectOutcome::Infeasible);
                }
                for (m, &rj) in mult.iter_mut().zip(&r) {
                    *m = *m - t1 * rj;
                }
                u_plus = u_plus + t1;
                in_active[active[block]] = false;
                active.remove(block);
                mult.remove(block);
                qr.remove(block);
            }
        }
    }
}

/// Nonnegative least squares by the Lawson-Hanson active-set method:
/// `argmin |sum_j y_j col_j - target|` over `y >= 0`.
#[derive(Clone, Debug)]
pub struct NnlsSolution<S> {
    pub y: Vec<S>,
    pub residual_norm: S,
}

pub fn nnls<S: Scalar>(cols: &[&[S]], target: &[S], tol: S, iter_cap: usize) -> Result<NnlsSolution<S>, SolveError> {
    let m = cols.len();
    let dim = target.len();
    let mut y = vec![S::zero(); m];
    let mut passive: Vec<usize> = Vec::new();
    let mut resid = target.to_vec();
    let mut iters = 0usize;
    loop {
        iters += 1;
        if iters > iter_cap {
            return Err(SolveError::IterationCap { cap: iter_cap, violation: f64::NAN });
        }
        // Most positive gradient among zero variables.
        let mut best = tol;
        let mut enter = usize::MAX;
        for j in 0..m {
            if passive.contains(&j) {
                continue;
            }
            let gj = dot(cols[j], &resid);
            if gj > best {
                best = gj;
                enter = j;
            }
        }
        if enter == usize::MAX {
            return Ok(NnlsSolution { y, residual_norm: norm2(&resid) });
        }
        passive.push(enter);
        loop {
            // Unconstrained least squares on the passive set.
            let a = Mat {
                rows: dim,
                cols: passive.len(),
                data: {
                    let mut d = vec![S::zero(); dim * passive.len()];
                    for (jj, &j) in passive.iter().enumerate() {
                        for i in 0..dim {
                            d[i * passive.len() + jj] = cols[j][i];
                        }
                    }
                    d
                },
            };
            let trial = crate::linalg::lstsq_min_norm(&a, target);
            if trial.iter().all(|&v| v > S::zero()) {
                for (&j, &v) in passive.iter().zip(&trial) {
                    y[j] = v;
                }
                break;
            }
            // Interpolate back toward the last feasible y and drop a zeroed
            // variable (lowest index on ties).
            let mut alpha = S::one();
            for (&j, &v) in passive.iter().zip(&trial) {
                if v <= S::zero() {
                    let yj = y[j];
                    let step = yj / (yj - v);
                    if step < alpha {
                        alpha = step;
                    }
                }
            }
            for (&j, &v) in passive.iter().zip(&trial) {
                y[j] = y[j] + alpha * (v - y[j]);
            }
            let drop_tol = S::of(1e-14);
            let mut keep = Vec::new();
            for &j in &passive {
                if y[j] > drop_tol {
                    keep.push(j);
                } else {
                    y[j] = S::zero();
                }
            }
            if keep.len() == passive.len() {
                // Numerical stall; force-drop the smallest.
                let mut worst = S::infinity();
                let mut victim = keep[0];
                for &j in &keep {
                    if y[j] < worst {
                        worst = y[j];
                        victim = j;
                    }
                }
                keep.retain(|&j| j != victim);
                y[victim] = S::zero();
            }
            passive = keep;
            if passive.is_empty() {
                break;
            }
        }
        resid = target.to_vec();
        for &j in &passive {
            axpy(-y[j], cols[j], &mut resid);
        }
    }
}
