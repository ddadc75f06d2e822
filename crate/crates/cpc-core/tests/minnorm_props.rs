//! Randomized equivalence checks of the production min-norm solver against
//! the brute-force routes in `common`.

mod common;

use cpc_core::linalg::{dist2, dot, norm2};
use cpc_core::minnorm::{extract_basis, solve_min_norm, MinNormResult, SolverConfig};
use cpc_core::rng;
use rand::Rng;

fn solve(h: &cpc_core::geometry::CutCollection<f64>, c: &[f64]) -> cpc_core::minnorm::ApproxLpSolution<f64> {
    match solve_min_norm(h, c, &SolverConfig::default(), None).expect("solver runs") {
        MinNormResult::Optimal(sol) => sol,
        other => panic!("bounded instance not optimal: {other:?}"),
    }
}

#[test]
fn matches_brute_force_on_random_bounded_instances() {
    let mut rng = rng::stream(901, "minnorm-props", 0);
    let mut checked = 0;
    while checked < 80 {
        let d = rng.gen_range(1..=4usize);
        let (h, c) = common::random_bounded_collection(d, &mut rng);
        let Some(expect) = common::brute_force_min_norm(&h, &c) else { continue };
        let sol = solve(&h, &c);
        let scale = 1.0 + expect.gamma.abs();
        assert!(
            (sol.gamma - expect.gamma).abs() <= 1e-6 * scale,
            "gamma {} vs brute force {} (d={d}, m={})",
            sol.gamma,
            expect.gamma,
            h.len()
        );
        assert!(
            dist2(&sol.z_star, &expect.z_star) <= 1e-6,
            "optimizer {:?} vs brute force {:?} (d={d}, m={})",
            sol.z_star,
            expect.z_star,
            h.len()
        );
        checked += 1;
    }
}

#[test]
fn multiplier_form_reconstructs_the_optimizer_when_well_posed() {
    let mut rng = rng::stream(902, "minnorm-dual", 0);
    let mut well_posed = 0;
    let mut total = 0;
    while total < 80 {
        let d = rng.gen_range(1..=4usize);
        let (h, c) = common::random_bounded_collection(d, &mut rng);
        let Some(expect) = common::brute_force_min_norm(&h, &c) else { continue };
        total += 1;
        let Some(z) = common::dual_form_reconstruct(&h, &c, &expect.z_star, expect.gamma) else {
            continue;
        };
        well_posed += 1;
        assert!(
            dist2(&z, &expect.z_star) <= 1e-6,
            "multiplier form {:?} vs {:?}",
            z,
            expect.z_star
        );
    }
    // The form degenerates only on unlucky active sets; if most instances
    // were skipped the check would be vacuous.
    assert!(well_posed * 2 >= total, "only {well_posed}/{total} instances were well-posed");
}

#[test]
fn extracted_bases_reproduce_the_optimizer_with_at_most_d_cuts() {
    let cfg = SolverConfig::default();
    let mut rng = rng::stream(903, "minnorm-basis", 0);
    let mut checked = 0;
    while checked < 40 {
        let d = rng.gen_range(1..=4usize);
        let (h, c) = common::random_bounded_collection(d, &mut rng);
        if common::brute_force_min_norm(&h, &c).is_none() {
            continue;
        }
        let sol = solve(&h, &c);
        let basis = extract_basis(&h, &c, &sol, &cfg).expect("extraction runs");
        if !basis.degenerate {
            assert!(basis.cuts.len() <= d, "basis has {} cuts in d={d}", basis.cuts.len());
        }
        let again = solve(&basis.cuts, &c);
        assert!(
            dist2(&again.z_star, &sol.z_star) <= 1e-6,
            "basis re-solve drifted: {:?} vs {:?}",
            again.z_star,
            sol.z_star
        );
        checked += 1;
    }
}

#[test]
fn perturbed_objective_maximizer_agrees_for_small_epsilon() {
    // The min-norm optimizer is the unique maximizer of
    // c.z - (eps/2)|z|^2 over the polyhedron once eps is small enough;
    // solve that concave program independently as a projection of c/eps.
    let mut rng = rng::stream(904, "minnorm-perturbed", 0);
    let mut checked = 0;
    while checked < 25 {
        let d = rng.gen_range(1..=3usize);
        let (h, c) = common::random_bounded_collection(d, &mut rng);
        if common::brute_force_min_norm(&h, &c).is_none() {
            continue;
        }
        let sol = solve(&h, &c);
        // argmax c.z - (eps/2)|z|^2 = argmin |z - c/eps|^2 over the cuts.
        let mut best: Option<Vec<f64>> = None;
        for eps in [1e-3, 1e-4, 1e-5] {
            let target: Vec<f64> = c.iter().map(|&ci| ci / eps).collect();
            let proj = cpc_core::qp::project(
                &target,
                h.cuts(),
                &cpc_core::qp::ProjectOptions { feas_tol: 1e-10, iter_cap: 10_000 },
            )
            .expect("projection runs");
            if let cpc_core::qp::ProjectOutcome::Feasible(p) = proj {
                if dist2(&p.x, &sol.z_star) <= 1e-6 {
                    best = Some(p.x);
                    break;
                }
                best = Some(p.x);
            }
        }
        let got = best.expect("some epsilon produced a maximizer");
        assert!(
            dist2(&got, &sol.z_star) <= 1e-5,
            "perturbed maximizer {:?} vs min-norm {:?} (c={:?}, |c|={})",
            got,
            sol.z_star,
            c,
            norm2(&c)
        );
        checked += 1;
    }
}

#[test]
fn gamma_never_increases_when_cuts_are_added() {
    let mut rng = rng::stream(905, "minnorm-monotone", 0);
    for _ in 0..25 {
        let d = rng.gen_range(1..=3usize);
        let (h, c) = common::random_bounded_collection(d, &mut rng);
        let mut partial = cpc_core::geometry::CutCollection::new(d);
        let mut last = f64::INFINITY;
        for (i, (cut, prov)) in h.iter().enumerate() {
            partial.insert(cut, prov).unwrap();
            if i + 1 < 2 * d {
                continue; // wait until the box bounds every direction
            }
            let sol = match solve_min_norm(&partial, &c, &SolverConfig::default(), None).unwrap() {
                MinNormResult::Optimal(sol) => sol,
                MinNormResult::Unbounded { .. } => continue,
                MinNormResult::Infeasible => panic!("interior point construction failed"),
            };
            assert!(
                sol.gamma <= last + 1e-7 * (1.0 + last.abs()),
                "gamma rose from {last} to {} after adding cut {i}",
                sol.gamma
            );
            last = sol.gamma;
            let _ = dot(&c, &sol.z_star);
        }
    }
}
