//! Primal recovery for column-generation runs. The witness columns that
//! nodes accumulate define a restricted master problem: pick convex weights
//! per node so the combined coupling images meet the target exactly at
//! minimum combined cost. Its linear-programming dual has exactly the shape
//! the consensus nodes optimize, so the same min-norm solver computes it
//! and the cone certificate doubles as the master's optimal weights.

use crate::geometry::{CutCollection, HalfSpace, Provenance};
use crate::linalg::{lstsq_min_norm, Mat};
use crate::minnorm::{solve_min_norm, MinNormResult, SolverConfig};
use crate::oracles::Column;
use crate::qp::SolveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("collected columns cannot reproduce the coupling target")]
    InsufficientColumns,
    #[error("column claims owner {claimed} but was logged under node {node}")]
    BadOwner { node: usize, claimed: usize },
    #[error("column has coupling dimension {got}, target has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

#[derive(Clone, Copy, Debug)]
pub struct RecoveryOptions {
    /// Only this many of the most recent columns per node enter the master.
    pub k_max: usize,
    pub solver: SolverConfig<f64>,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions { k_max: 200, solver: SolverConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct RecoveredPrimal {
    /// Convex weights per node, aligned with that node's column list
    /// (zero outside the support).
    pub lambda: Vec<Vec<f64>>,
    /// Weighted local points, one per node.
    pub x_star: Vec<Vec<f64>>,
    /// Master objective: weighted sum of column costs.
    pub master_value: f64,
    /// Worst coordinate of `sum_j lambda_j G x_j - h`.
    pub balance_residual: f64,
    /// Worst deviation of a node's weight sum from one, before the final
    /// renormalization.
    pub convexity_residual: f64,
}

/// Solve the restricted master over the logged columns.
///
/// `columns[i]` are node `i`'s witnesses; `h` is the coupling target. The
/// dual is unbounded exactly when the columns cannot combine into `h`, in
/// which case the run simply has not produced enough variety yet.
pub fn recover(
    columns: &[Vec<Column<f64>>],
    h: &[f64],
    opts: &RecoveryOptions,
) -> Result<RecoveredPrimal, RecoveryError> {
    let r = h.len();
    let n = columns.len();
    if n == 0 || columns.iter().any(|c| c.is_empty()) {
        return Err(RecoveryError::InsufficientColumns);
    }
    let d = r + n;

    let mut cuts = CutCollection::with_tau_dup(d, 1e-12);
    let mut meta: Vec<(usize, usize)> = Vec::new();
    for (i, cols) in columns.iter().enumerate() {
        let start = cols.len().saturating_sub(opts.k_max);
        for (local, col) in cols.iter().enumerate().skip(start) {
            if col.owner != i {
                return Err(RecoveryError::BadOwner { node: i, claimed: col.owner });
            }
            if col.gx.len() != r {
                return Err(RecoveryError::DimensionMismatch { expected: r, got: col.gx.len() });
            }
            let mut a = vec![0.0; d];
            for (k, &g) in col.gx.iter().enumerate() {
                a[k] = -g;
            }
            a[r + i] = 1.0;
            let idx = cuts.insert(
                &HalfSpace { a, b: col.cost },
                Provenance { node: i, round: 0, column: Some(local) },
            )?;
            if idx == meta.len() {
                meta.push((i, local));
            }
        }
    }

    let mut c: Vec<f64> = h.iter().map(|&v| -v).collect();
    c.extend(std::iter::repeat(1.0).take(n));
    let sol = match solve_min_norm(&cuts, &c, &opts.solver, None)? {
        MinNormResult::Optimal(s) => s,
        _ => return Err(RecoveryError::InsufficientColumns),
    };

    // The cone certificate writes `c` as a nonnegative combination of the
    // active normalized cuts; un-normalizing those weights gives feasible
    // master weights. Refit on the support by least squares for precision,
    // keeping the certificate weights if the refit leaves the cone.
    let mut support: Vec<usize> = Vec::new();
    let mut lam: Vec<f64> = Vec::new();
    for (j, &idx) in sol.active_set.iter().enumerate() {
        let w = sol.cone_weights[j];
        if w > 1e-12 {
            let (owner, local) = meta[idx];
            let col = &columns[owner][local];
            let raw_norm =
                (col.gx.iter().map(|g| g * g).sum::<f64>() + 1.0).sqrt();
            support.push(idx);
            lam.push(w / raw_norm);
        }
    }
    if support.is_empty() {
        return Err(RecoveryError::InsufficientColumns);
    }
    let mut rows = vec![vec![0.0; support.len()]; d];
    for (j, &idx) in support.iter().enumerate() {
        let (owner, local) = meta[idx];
        let col = &columns[owner][local];
        for k in 0..r {
            rows[k][j] = -col.gx[k];
        }
        rows[r + owner][j] = 1.0;
    }
    let refit = lstsq_min_norm(&Mat::from_rows(&rows), &c);
    if refit.iter().all(|&v| v >= -1e-9) {
        lam = refit.into_iter().map(|v| v.max(0.0)).collect();
    }

    // Group weights per node, renormalize the simplex constraint, and
    // average the local points.
    let mut sums = vec![0.0; n];
    for (j, &idx) in support.iter().enumerate() {
        sums[meta[idx].0] += lam[j];
    }
    let convexity_residual =
        sums.iter().map(|&s| (s - 1.0).abs()).fold(0.0, f64::max);
    if sums.iter().any(|&s| s < 1e-6) {
        return Err(RecoveryError::InsufficientColumns);
    }

    let mut lambda: Vec<Vec<f64>> = columns.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut x_star: Vec<Vec<f64>> =
        (0..n).map(|i| vec![0.0; columns[i][0].x.len()]).collect();
    let mut master_value = 0.0;
    let mut balance: Vec<f64> = h.iter().map(|&v| -v).collect();
    for (j, &idx) in support.iter().enumerate() {
        let (owner, local) = meta[idx];
        let w = lam[j] / sums[owner];
        lambda[owner][local] += w;
        let col = &columns[owner][local];
        master_value += w * col.cost;
        if x_star[owner].len() != col.x.len() {
            return Err(RecoveryError::DimensionMismatch {
                expected: x_star[owner].len(),
                got: col.x.len(),
            });
        }
        for (acc, &v) in x_star[owner].iter_mut().zip(&col.x) {
            *acc += w * v;
        }
        for (acc, &g) in balance.iter_mut().zip(&col.gx) {
            *acc += w * g;
        }
    }
    let balance_residual = balance.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    Ok(RecoveredPrimal { lambda, x_star, master_value, balance_residual, convexity_residual })
}
