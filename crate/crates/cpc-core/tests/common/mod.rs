//! Shared brute-force reference computations for integration tests.
//!
//! Everything here deliberately avoids the production solver's machinery:
//! vertices come from enumerating square subsystems, optimal-face minimum
//! norm points from enumerating active subsets, and the multiplier form
//! from an equality solve plus a nonnegative cone fit. Slow, but
//! independent.

use cpc_core::geometry::{box_basis, CutCollection, Provenance};
use cpc_core::linalg::{dot, lstsq_min_norm, norm2, solve_dense, Mat};
use rand::Rng;
use rand_distr::StandardNormal;

/// Independent solution of the approximate program: optimal value and the
/// minimum-norm point of the optimal face.
pub struct BruteForce {
    pub z_star: Vec<f64>,
    pub gamma: f64,
}

fn feasible(h: &CutCollection<f64>, z: &[f64], tol: f64) -> bool {
    h.cuts().iter().all(|cut| cut.violation(z) <= tol)
}

/// Enumerate all vertices of the (assumed bounded, nonempty) polyhedron,
/// take the best objective value, then search every active subset of the
/// optimal face for the minimum-norm point. Only sensible for small `d`.
///
/// Returns None when no vertex exists (empty or degenerate input).
pub fn brute_force_min_norm(h: &CutCollection<f64>, c: &[f64]) -> Option<BruteForce> {
    let d = h.dim();
    let m = h.len();
    let cuts = h.cuts();
    if m < d {
        return None;
    }

    // Vertices: feasible solutions of square subsystems.
    let mut gamma = f64::NEG_INFINITY;
    for subset in subsets(m, d) {
        let rows: Vec<Vec<f64>> = subset.iter().map(|&i| cuts[i].a.clone()).collect();
        let rhs: Vec<f64> = subset.iter().map(|&i| cuts[i].b).collect();
        let a = Mat::from_rows(&rows);
        let Some(v) = solve_dense(&a, &rhs) else { continue };
        if feasible(h, &v, 1e-7) {
            gamma = gamma.max(dot(c, &v));
        }
    }
    if !gamma.is_finite() {
        return None;
    }

    // Minimum-norm point of the optimal face: its active set is some cut
    // subset, and on that affine piece the point is the least-norm solution
    // of the equalities (it lies in the row space of its tight constraints).
    let mut best: Option<Vec<f64>> = None;
    for size in 0..=d.min(m) {
        for subset in subsets(m, size) {
            let mut rows: Vec<Vec<f64>> = subset.iter().map(|&i| cuts[i].a.clone()).collect();
            let mut rhs: Vec<f64> = subset.iter().map(|&i| cuts[i].b).collect();
            rows.push(c.to_vec());
            rhs.push(gamma);
            let a = Mat::from_rows(&rows);
            let z = lstsq_min_norm(&a, &rhs);
            // Drop inconsistent systems: the equalities must actually hold.
            let consistent = rows
                .iter()
                .zip(&rhs)
                .all(|(row, &want)| (dot(row, &z) - want).abs() <= 1e-7 * (1.0 + want.abs()));
            if !consistent || !feasible(h, &z, 1e-7) {
                continue;
            }
            if best.as_ref().is_none_or(|b| norm2(&z) < norm2(b) - 1e-12) {
                best = Some(z);
            }
        }
    }
    best.map(|z_star| BruteForce { z_star, gamma })
}

/// Multiplier-form reconstruction: the optimizer must satisfy the tight
/// rows `a_i z = b_i`, `c z = gamma`, and be expressible as
/// `z = -(sum u_i a_i) - alpha c` with `u >= 0` and `alpha` free.
///
/// Well-posed means the tight rows pin `z` on their own (full rank): then
/// `z` comes from plain linear algebra and the weight condition reduces to
/// a nonnegative fit of `-z` over the active normals and `±c`, which is
/// checked independently. Rank-deficient active sets and degenerate
/// complementarity return None. `z_star` is only used to decide which cuts
/// count as tight.
pub fn dual_form_reconstruct(
    h: &CutCollection<f64>,
    c: &[f64],
    z_star: &[f64],
    gamma: f64,
) -> Option<Vec<f64>> {
    let cuts = h.cuts();
    let active: Vec<usize> = (0..h.len())
        .filter(|&i| {
            let s = dot(&cuts[i].a, z_star) - cuts[i].b;
            s.abs() <= 1e-6 * (1.0 + cuts[i].b.abs())
        })
        .collect();
    let d = c.len();

    let mut rows: Vec<Vec<f64>> = active.iter().map(|&i| cuts[i].a.clone()).collect();
    let mut rhs: Vec<f64> = active.iter().map(|&i| cuts[i].b).collect();
    rows.push(c.to_vec());
    rhs.push(gamma);

    // Uniqueness of the equality solution: the normal matrix of the rows
    // must be invertible.
    let mut normal = vec![vec![0.0; d]; d];
    for row in &rows {
        for (i, nrow) in normal.iter_mut().enumerate() {
            for (j, cell) in nrow.iter_mut().enumerate() {
                *cell += row[i] * row[j];
            }
        }
    }
    solve_dense(&Mat::from_rows(&normal), &vec![1.0; d])?;

    let z = lstsq_min_norm(&Mat::from_rows(&rows), &rhs);
    let consistent = rows
        .iter()
        .zip(&rhs)
        .all(|(row, &want)| (dot(row, &z) - want).abs() <= 1e-6 * (1.0 + want.abs()));
    if !consistent {
        return None;
    }

    // Cone certificate for the weights: -z = sum u_i a_i + alpha c with
    // u >= 0, alpha free (split into two nonnegative columns).
    let mut cols: Vec<Vec<f64>> = active.iter().map(|&i| cuts[i].a.clone()).collect();
    cols.push(c.to_vec());
    cols.push(c.iter().map(|&v| -v).collect());
    let col_refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    let target: Vec<f64> = z.iter().map(|&v| -v).collect();
    let fit = cpc_core::qp::nnls(&col_refs, &target, 1e-10, 10_000).ok()?;
    if fit.residual_norm > 1e-6 * (1.0 + norm2(&z)) {
        return None;
    }
    Some(z)
}

/// All `size`-subsets of `0..m` in lexicographic order.
pub fn subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        let remaining = size - cur.len();
        for i in start..=m.saturating_sub(remaining) {
            cur.push(i);
            rec(i + 1, m, size, cur, out);
            cur.pop();
        }
    }
    rec(0, m, size, &mut cur, &mut out);
    out
}

/// Random bounded nonempty collection plus an objective: a box of random
/// size and up to `3d` extra cuts, each kept loose around a common interior
/// point so the polytope never empties out.
pub fn random_bounded_collection<R: Rng>(
    d: usize,
    rng: &mut R,
) -> (CutCollection<f64>, Vec<f64>) {
    let m_box = rng.gen_range(1.5..3.0);
    let mut h = CutCollection::new(d);
    for (cut, prov) in box_basis(d, m_box).unwrap().iter() {
        h.insert(cut, prov).unwrap();
    }
    let interior: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let extra = rng.gen_range(0..=3 * d);
    for j in 0..extra {
        let mut a: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm2(&a);
        if n < 1e-6 {
            continue;
        }
        for ai in &mut a {
            *ai /= n;
        }
        let b = dot(&a, &interior) + rng.gen_range(0.05..1.2);
        h.insert(
            &cpc_core::geometry::HalfSpace { a, b },
            Provenance::new(usize::MAX, j as u64),
        )
        .unwrap();
    }
    let mut c: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let n = norm2(&c);
    let target = rng.gen_range(0.5..2.0);
    if n > 1e-9 {
        for ci in &mut c {
            *ci *= target / n;
        }
    } else {
        c[0] = target;
    }
    (h, c)
}
