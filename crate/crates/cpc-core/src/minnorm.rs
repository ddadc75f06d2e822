//! Minimum-norm linear programming over cut collections.
//!
//! `solve_min_norm` computes the minimum-Euclidean-norm element of the set
//! of maximizers of `c . z` over a polyhedron given as a cut collection.
//! The solver works in two stages:
//!
//! 1. Project `lambda * c` onto the polyhedron for a growing scale
//!    `lambda`. For every polyhedron with a finite optimum there is a finite
//!    threshold beyond which this projection is exactly the min-norm
//!    optimizer; the threshold is detected by checking that the objective
//!    lies in the nonnegative cone of the tight cut normals (a small
//!    nonnegative least-squares problem). This yields the optimal value.
//! 2. Project the origin onto the optimal face (tight cuts plus the
//!    objective level row). This recomputes the optimizer at its natural
//!    scale, independent of `lambda`.
//!
//! Infeasibility is reported by the projection itself; unboundedness is
//! certified by projecting `c` onto the recession cone `{ r : A r <= 0 }`
//! (the projection is nonzero exactly when the program is unbounded, and it
//! is itself an improving recession direction).

use crate::geometry::{CutCollection, HalfSpace};
use crate::linalg::{dist2, dot, norm2, norm_inf};
use crate::qp::{nnls, project, ProjectOptions, ProjectOutcome, SolveError};
use crate::scalar::Scalar;

/// Solver tolerances and caps. All comparisons on normalized cuts.
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig<S> {
    /// Feasibility slack accepted on returned optimizers.
    pub tol_feas: S,
    /// Two optimizers within this (relative to scale) count as equal.
    pub tol_opt: S,
    /// A cut is tight when its violation exceeds `-tol_act`.
    pub tol_act: S,
    /// Residual (relative to `1 + |c|`) accepted by the cone certificate.
    pub tol_cone: S,
    /// Active-set iteration cap factor: cap = factor * (m + d).
    pub iter_cap_factor: usize,
    /// Growth factor of the objective scale between certification attempts.
    pub lambda_growth: S,
    pub max_escalations: usize,
}

impl<S: Scalar> Default for SolverConfig<S> {
    fn default() -> Self {
        SolverConfig {
            tol_feas: S::of(1e-8),
            tol_opt: S::of(1e-7),
            tol_act: S::of(1e-7),
            tol_cone: S::of(1e-8),
            iter_cap_factor: 100,
            lambda_growth: S::of(8.0),
            max_escalations: 40,
        }
    }
}

/// Optimal outcome of `solve_min_norm`.
#[derive(Clone, Debug)]
pub struct ApproxLpSolution<S> {
    /// Minimum-norm maximizer.
    pub z_star: Vec<S>,
    /// Optimal value `c . z_star`.
    pub gamma: S,
    /// Indices (into the collection) of cuts tight at `z_star`.
    pub active_set: Vec<usize>,
    /// Nonnegative weights expressing `c` over the active normals
    /// (aligned with `active_set`); the LP dual on normalized cuts.
    pub cone_weights: Vec<S>,
    /// Multipliers of the face projection (aligned with `active_set`);
    /// positive entries pin the min-norm point on the optimal face.
    pub pin_weights: Vec<S>,
    /// Certified objective scale; reusable as a hint for nearby solves.
    pub lambda: S,
    /// Total active-set iterations spent.
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub enum MinNormResult<S> {
    Optimal(ApproxLpSolution<S>),
    /// `direction` satisfies `A r <= 0`, `c . r > 0`, `|r| = 1`.
    Unbounded { direction: Vec<S> },
    Infeasible,
}

impl<S> MinNormResult<S> {
    pub fn optimal(self) -> Option<ApproxLpSolution<S>> {
        match self {
            MinNormResult::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn optimal_ref(&self) -> Option<&ApproxLpSolution<S>> {
        match self {
            MinNormResult::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

/// The concave objective `c . z - eps/2 |z|^2`. For small enough `eps` its
/// unique maximizer over a polyhedron with finite LP value is the min-norm
/// LP optimizer.
#[derive(Clone, Debug)]
pub struct PerturbedObjective<S> {
    pub c: Vec<S>,
    pub eps: S,
}

impl<S: Scalar> PerturbedObjective<S> {
    pub fn new(c: Vec<S>, eps: S) -> Self {
        PerturbedObjective { c, eps }
    }

    pub fn eval(&self, z: &[S]) -> S {
        dot(&self.c, z) - self.eps / S::of(2.0) * dot(z, z)
    }
}

pub fn eval_perturbed<S: Scalar>(c: &[S], eps: S, z: &[S]) -> S {
    dot(c, z) - eps / S::of(2.0) * dot(z, z)
}

fn tight_set<S: Scalar>(h: &CutCollection<S>, z: &[S], tol: S) -> Vec<usize> {
    h.cuts()
        .iter()
        .enumerate()
        .filter(|(_, cut)| cut.violation(z) >= -tol)
        .map(|(i, _)| i)
        .collect()
}

/// See module docs. `lambda_hint` carries the certified scale of a previous
/// solve of a nearby problem and usually avoids any escalation.
pub fn solve_min_norm<S: Scalar>(
    h: &CutCollection<S>,
    c: &[S],
    cfg: &SolverConfig<S>,
    lambda_hint: Option<S>,
) -> Result<MinNormResult<S>, SolveError> {
    let d = h.dim();
    if c.len() != d {
        return Err(SolveError::Numerical(format!(
            "objective has dimension {}, cuts have dimension {}",
            c.len(),
            d
        )));
    }
    let m = h.len();
    let cap = cfg.iter_cap_factor * (m + d).max(8);
    let cnorm = norm2(c);
    let origin = vec![S::zero(); d];

    if cnorm <= S::of(1e-300) {
        // Degenerate objective: the min-norm feasible point.
        let tol = S::of(100.0) * S::epsilon();
        return match project(&origin, h.cuts(), &ProjectOptions { feas_tol: tol, iter_cap: cap })? {
            ProjectOutcome::Infeasible => Ok(MinNormResult::Infeasible),
            ProjectOutcome::Feasible(p) => {
                let act = tight_set(h, &p.x, cfg.tol_act);
                let mut pin = vec![S::zero(); act.len()];
                for (j, &i) in act.iter().enumerate() {
                    if let Some(k) = p.active.iter().position(|&v| v == i) {
                        pin[j] = p.multipliers[k];
                    }
                }
                Ok(MinNormResult::Optimal(ApproxLpSolution {
                    gamma: S::zero(),
                    cone_weights: vec![S::zero(); act.len()],
                    pin_weights: pin,
                    active_set: act,
                    z_star: p.x,
                    lambda: S::one(),
                    iterations: p.iterations,
                }))
            }
        };
    }

    if m == 0 {
        let direction: Vec<S> = c.iter().map(|&v| v / cnorm).collect();
        return Ok(MinNormResult::Unbounded { direction });
    }

    let mut lambda = lambda_hint
        .filter(|l| l.is_finite() && *l > S::zero())
        .unwrap_or_else(|| S::one() / (S::one() + cnorm));
    let mut iterations = 0usize;
    let mut recession_checked = false;

    for esc in 0..cfg.max_escalations {
        let g: Vec<S> = c.iter().map(|&v| v * lambda).collect();
        let stage1_tol = S::of(50.0) * S::epsilon() * (S::one() + lambda * cnorm);
        let outcome = project(&g, h.cuts(), &ProjectOptions { feas_tol: stage1_tol, iter_cap: cap })?;
        let proj = match outcome {
            ProjectOutcome::Infeasible => return Ok(MinNormResult::Infeasible),
            ProjectOutcome::Feasible(p) => p,
        };
        iterations += proj.iterations;
        let z1 = proj.x;
        let act_tol = cfg
            .tol_act
            .max(S::of(4.0) * stage1_tol + S::of(50.0) * S::epsilon() * (S::one() + norm_inf(&z1)));
        let act = tight_set(h, &z1, act_tol);
        let cols: Vec<&[S]> = act.iter().map(|&i| h.cut(i).a.as_slice()).collect();
        let cert = nnls(&cols, c, S::of(10.0) * S::epsilon() * (S::one() + cnorm), cap)?;
        if cert.residual_norm <= cfg.tol_cone * (S::one() + cnorm) {
            let gamma1 = dot(c, &z1);
            // Stage 2: origin projection onto the optimal face.
            let mut face: Vec<HalfSpace<S>> = act.iter().map(|&i| h.cut(i).clone()).collect();
            let mut in_face: Vec<bool> = (0..m).map(|i| act.contains(&i)).collect();
            let level_pos = face.len();
            let mut margin = S::of(100.0) * S::epsilon() * (S::one() + gamma1.abs());
            // The stage-1 value carries an error of order eps * lambda, so
            // the level row may ask for more than the cuts allow; cap how
            // far it can be relaxed before giving up on polishing.
            let margin_cap = S::of(10.0)
                * stage1_tol
                * cnorm
                * S::of((d as f64).sqrt())
                + margin;
            face.push(HalfSpace {
                a: c.iter().map(|&v| -v / cnorm).collect(),
                b: -(gamma1 - margin) / cnorm,
            });
            let stage2_tol = S::of(100.0) * S::epsilon() * (S::one() + norm_inf(&z1));
            // Projecting the origin (instead of the large stage-1 target)
            // restores full precision, but cuts outside the working face can
            // resurface at the polished point; fold them in and re-project.
            let mut pin_src = None;
            let mut z_star = z1.clone();
            for _ in 0..16 {
                let p2 = project(
                    &origin,
                    &face,
                    &ProjectOptions { feas_tol: stage2_tol, iter_cap: cap },
                )?;
                let p = match p2 {
                    ProjectOutcome::Feasible(p) => p,
                    ProjectOutcome::Infeasible => {
                        if margin >= margin_cap {
                            break;
                        }
                        margin = (margin * S::of(10.0)).min(margin_cap);
                        face[level_pos].b = -(gamma1 - margin) / cnorm;
                        continue;
                    }
                };
                iterations += p.iterations;
                let mut grew = false;
                for i in 0..m {
                    if !in_face[i] && h.cut(i).violation(&p.x) > cfg.tol_feas {
                        face.push(h.cut(i).clone());
                        in_face[i] = true;
                        grew = true;
                    }
                }
                if !grew {
                    z_star = p.x.clone();
                    pin_src = Some((p.active, p.multipliers));
                    break;
                }
            }
            let mut pin = vec![S::zero(); act.len()];
            if let Some((pact, pmult)) = pin_src {
                for (k, &fi) in pact.iter().enumerate() {
                    if fi < act.len() {
                        pin[fi] = pmult[k];
                    }
                }
            }
            let gamma = dot(c, &z_star);
            return Ok(MinNormResult::Optimal(ApproxLpSolution {
                z_star,
                gamma,
                cone_weights: cert.y,
                pin_weights: pin,
                active_set: act,
                lambda,
                iterations,
            }));
        }
        // Certificate failed: either lambda is still short of the threshold
        // or the program is unbounded. Check the recession cone once the
        // cheap escalations run out.
        if !recession_checked && (esc >= 5 || esc + 2 >= cfg.max_escalations) {
            recession_checked = true;
            let cone: Vec<HalfSpace<S>> = h
                .cuts()
                .iter()
                .map(|cut| HalfSpace { a: cut.a.clone(), b: S::zero() })
                .collect();
            let tol = S::of(50.0) * S::epsilon() * (S::one() + cnorm);
            if let ProjectOutcome::Feasible(p) =
                project(c, &cone, &ProjectOptions { feas_tol: tol, iter_cap: cap })?
            {
                iterations += p.iterations;
                let rn = norm2(&p.x);
                if rn > S::of(1e-6) * (S::one() + cnorm) {
                    let direction = p.x.iter().map(|&v| v / rn).collect();
                    return Ok(MinNormResult::Unbounded { direction });
                }
            }
        }
        lambda = lambda * cfg.lambda_growth;
    }
    Err(SolveError::Numerical(
        "objective scale escalation exhausted without an optimality certificate".into(),
    ))
}

/// A minimal subset of cuts preserving the min-norm optimizer.
///
/// At most `d` cuts unless `degenerate` is set, in which case pruning could
/// not reach `d` cuts within tolerance and the full tight set is returned.
#[derive(Clone, Debug)]
pub struct Basis<S> {
    pub cuts: CutCollection<S>,
    pub degenerate: bool,
}

impl<S: Scalar> Basis<S> {
    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }
}

/// Extract a basis from a solved collection.
///
/// Tight cuts carrying weight in either dual system (the cone certificate
/// or the face projection) pin the optimizer and are kept outright; the
/// rest are pruned in order of increasing weight, re-solving after each
/// tentative removal and keeping only removals that leave the optimizer
/// unchanged within `tol_opt`.
pub fn extract_basis<S: Scalar>(
    h: &CutCollection<S>,
    c: &[S],
    sol: &ApproxLpSolution<S>,
    cfg: &SolverConfig<S>,
) -> Result<Basis<S>, SolveError> {
    let d = h.dim();
    let scale = S::one() + norm2(&sol.z_star);
    let cnorm = norm2(c);
    let weight = |j: usize| -> S {
        let yw = sol.cone_weights[j] / (S::one() + cnorm);
        let pw = sol.pin_weights[j] / scale;
        yw.max(pw)
    };
    let weak_tol = S::of(1e-9);
    let same_optimizer = |keep: &[usize]| -> Result<bool, SolveError> {
        let reduced = h.subset(keep);
        match solve_min_norm(&reduced, c, cfg, Some(sol.lambda))? {
            MinNormResult::Optimal(s) => {
                Ok(dist2(&s.z_star, &sol.z_star) <= cfg.tol_opt * scale)
            }
            _ => Ok(false),
        }
    };

    let mut keep: Vec<usize> = sol.active_set.clone();
    // Pass 1: drop cuts with negligible weight in both dual systems.
    let mut weak: Vec<usize> = (0..sol.active_set.len())
        .filter(|&j| weight(j) <= weak_tol)
        .collect();
    weak.sort_by(|&a, &b| weight(a).partial_cmp(&weight(b)).unwrap().then(a.cmp(&b)));
    for j in weak {
        let cut_idx = sol.active_set[j];
        if keep.len() <= 1 {
            break;
        }
        let trial: Vec<usize> = keep.iter().copied().filter(|&i| i != cut_idx).collect();
        if same_optimizer(&trial)? {
            keep = trial;
        }
    }
    // Pass 2: if still above dimension, prune by increasing weight.
    if keep.len() > d {
        let mut order: Vec<usize> = (0..sol.active_set.len())
            .filter(|&j| keep.contains(&sol.active_set[j]))
            .collect();
        order.sort_by(|&a, &b| weight(a).partial_cmp(&weight(b)).unwrap().then(a.cmp(&b)));
        for j in order {
            if keep.len() <= d {
                break;
            }
            let cut_idx = sol.active_set[j];
            let trial: Vec<usize> = keep.iter().copied().filter(|&i| i != cut_idx).collect();
            if same_optimizer(&trial)? {
                keep = trial;
            }
        }
    }
    let degenerate = keep.len() > d;
    Ok(Basis { cuts: h.subset(&keep), degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{box_basis, Provenance};
    use approx::assert_abs_diff_eq;

    fn hs(a: &[f64], b: f64) -> HalfSpace<f64> {
        HalfSpace::new(a.to_vec(), b).unwrap()
    }

    fn collection(cuts: &[HalfSpace<f64>]) -> CutCollection<f64> {
        let mut h = CutCollection::new(cuts[0].dim());
        for c in cuts {
            h.insert(c, Provenance::new(0, 0)).unwrap();
        }
        h
    }

    fn cfg() -> SolverConfig<f64> {
        SolverConfig::default()
    }

    #[test]
    fn box_vertex_objective() {
        let h = box_basis(2, 1.0).unwrap();
        let sol = solve_min_norm(&h, &[1.0, 1.0], &cfg(), None).unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.z_star[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.z_star[1], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.gamma, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn box_face_objective_picks_min_norm_point() {
        let h = box_basis(2, 1.0).unwrap();
        let sol = solve_min_norm(&h, &[1.0, 0.0], &cfg(), None).unwrap().optimal().unwrap();
        // Optimal face is {1} x [-1, 1]; min-norm point is (1, 0).
        assert_abs_diff_eq!(sol.z_star[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.z_star[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.gamma, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn unbounded_face_still_has_min_norm_optimizer() {
        let h = collection(&[hs(&[1.0, 0.0], 1.0)]);
        let sol = solve_min_norm(&h, &[1.0, 0.0], &cfg(), None).unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.z_star[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.z_star[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn unbounded_objective_detected_with_direction() {
        let h = collection(&[hs(&[-1.0, 0.0], 0.0)]);
        match solve_min_norm(&h, &[1.0, 0.0], &cfg(), None).unwrap() {
            MinNormResult::Unbounded { direction } => {
                assert!(dot(&direction, &[1.0, 0.0]) > 1e-6);
                assert!(-direction[0] <= 1e-9);
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_collection_detected() {
        let h = collection(&[hs(&[1.0], 1.0), hs(&[-1.0], -2.0)]);
        assert!(matches!(
            solve_min_norm(&h, &[1.0], &cfg(), None).unwrap(),
            MinNormResult::Infeasible
        ));
    }

    #[test]
    fn large_box_scale() {
        let h = box_basis(2, 1e5).unwrap();
        let sol = solve_min_norm(&h, &[1.0, 1.0], &cfg(), None).unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.z_star[0], 1e5, epsilon = 1e-3);
        assert_abs_diff_eq!(sol.z_star[1], 1e5, epsilon = 1e-3);
    }

    #[test]
    fn zero_objective_returns_min_norm_feasible_point() {
        let h = collection(&[hs(&[1.0, 0.0], -1.0), hs(&[-1.0, 0.0], 2.0)]);
        // Feasible set: x <= -1 (shifted); nearest point to origin is (-1, 0).
        let sol = solve_min_norm(&h, &[0.0, 0.0], &cfg(), None).unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.z_star[0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.gamma, 0.0);
    }

    #[test]
    fn basis_of_box_plus_redundant_cut() {
        let mut h = box_basis(2, 1.0).unwrap();
        h.insert(&hs(&[1.0, 0.0], 2.0), Provenance::new(1, 1)).unwrap();
        let sol = solve_min_norm(&h, &[1.0, 1.0], &cfg(), None).unwrap().optimal().unwrap();
        let basis = extract_basis(&h, &[1.0, 1.0], &sol, &cfg()).unwrap();
        assert!(!basis.degenerate);
        assert_eq!(basis.len(), 2);
        // The basis is exactly {x <= 1, y <= 1}.
        let mut normals: Vec<(i32, i32)> = basis
            .cuts
            .cuts()
            .iter()
            .map(|c| (c.a[0].round() as i32, c.a[1].round() as i32))
            .collect();
        normals.sort_unstable();
        assert_eq!(normals, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn degenerate_tight_set_prunes_to_dimension() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = collection(&[hs(&[1.0, 0.0], 1.0), hs(&[s, s], s), hs(&[s, -s], s)]);
        let sol = solve_min_norm(&h, &[1.0, 0.0], &cfg(), None).unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.z_star[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.z_star[1], 0.0, epsilon = 1e-8);
        assert_eq!(sol.active_set.len(), 3);
        let basis = extract_basis(&h, &[1.0, 0.0], &sol, &cfg()).unwrap();
        assert!(basis.len() <= 2, "basis kept {} cuts", basis.len());
        // Whatever pair survived still pins (1, 0).
        let sol2 = solve_min_norm(&basis.cuts, &[1.0, 0.0], &cfg(), None)
            .unwrap()
            .optimal()
            .unwrap();
        assert_abs_diff_eq!(sol2.z_star[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol2.z_star[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn weakly_active_cut_pruned_for_minimality() {
        let h = collection(&[hs(&[1.0, 0.0], 1.0), hs(&[0.0, -1.0], 0.0)]);
        let sol = solve_min_norm(&h, &[1.0, 0.0], &cfg(), None).unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.z_star[1], 0.0, epsilon = 1e-9);
        let basis = extract_basis(&h, &[1.0, 0.0], &sol, &cfg()).unwrap();
        assert_eq!(basis.len(), 1);
        assert_abs_diff_eq!(basis.cuts.cut(0).a[0], 1.0);
    }

    #[test]
    fn pinning_cut_without_cone_weight_is_kept() {
        // Optimal face of {x <= 1, -y <= -2} under c = (1, 0) is the ray
        // {(1, y) : y >= 2}; the min-norm point (1, 2) needs the second cut
        // even though it carries no weight in the objective cone.
        let h = collection(&[hs(&[1.0, 0.0], 1.0), hs(&[0.0, -1.0], -2.0)]);
        let sol = solve_min_norm(&h, &[1.0, 0.0], &cfg(), None).unwrap().optimal().unwrap();
        assert_abs_diff_eq!(sol.z_star[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.z_star[1], 2.0, epsilon = 1e-9);
        let basis = extract_basis(&h, &[1.0, 0.0], &sol, &cfg()).unwrap();
        assert_eq!(basis.len(), 2);
    }

    #[test]
    fn basis_extraction_idempotent() {
        let mut h = box_basis(2, 1.0).unwrap();
        h.insert(&hs(&[1.0, 1.0], 1.8), Provenance::new(1, 1)).unwrap();
        let c = [1.0, 0.3];
        let sol = solve_min_norm(&h, &c, &cfg(), None).unwrap().optimal().unwrap();
        let b1 = extract_basis(&h, &c, &sol, &cfg()).unwrap();
        let sol2 = solve_min_norm(&b1.cuts, &c, &cfg(), None).unwrap().optimal().unwrap();
        let b2 = extract_basis(&b1.cuts, &c, &sol2, &cfg()).unwrap();
        assert_eq!(b1.len(), b2.len());
        for (c1, c2) in b1.cuts.cuts().iter().zip(b2.cuts.cuts()) {
            assert_eq!(c1, c2);
        }
    }

    #[test]
    fn adding_cuts_never_increases_gamma() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = rng.gen_range(1..=3);
            let mut h = box_basis(d, 2.0).unwrap();
            let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s0 = solve_min_norm(&h, &c, &cfg(), None).unwrap().optimal().unwrap();
            let mut prev_gamma = s0.gamma;
            let mut prev_j = eval_perturbed(&c, 1e-4, &s0.z_star);
            for _ in 0..5 {
                let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if norm2(&a) < 1e-3 {
                    continue;
                }
                // Keep the box center feasible so the program stays feasible.
                let b = rng.gen_range(0.1..1.5);
                h.insert(&HalfSpace::new(a, b).unwrap(), Provenance::new(0, 0)).unwrap();
                let s = solve_min_norm(&h, &c, &cfg(), None).unwrap().optimal().unwrap();
                assert!(s.gamma <= prev_gamma + 1e-8, "gamma increased");
                let j = eval_perturbed(&c, 1e-4, &s.z_star);
                assert!(j <= prev_j + 1e-8, "perturbed objective increased");
                prev_gamma = s.gamma;
                prev_j = j;
            }
        }
    }

    #[test]
    fn f32_instantiation_solves_box() {
        let h = box_basis::<f32>(2, 1.0).unwrap();
        let sol = solve_min_norm(&h, &[1.0f32, 1.0], &SolverConfig::default(), None)
            .unwrap()
            .optimal()
            .unwrap();
        assert!((sol.z_star[0] - 1.0).abs() < 1e-3);
        assert!((sol.z_star[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn perturbed_objective_eval() {
        let p = PerturbedObjective::new(vec![1.0, 2.0], 0.5);
        // 1*1 + 2*2 - 0.25*(1 + 4) = 5 - 1.25
        assert_abs_diff_eq!(p.eval(&[1.0, 2.0]), 3.75);
    }
}
