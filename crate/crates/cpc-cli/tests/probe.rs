use std::time::Instant;

use cpc_core::geometry::Provenance;
use cpc_core::problems::InstanceSpec;
use cpc_core::{box_basis, rng, solve_min_norm, CutCollection, MinNormResult};
use rand::Rng;

#[test]
fn probe_rep8_reference() {
    let rep_seed = rng::stream(42, "experiment-rep", 28).gen::<u64>();
    println!("rep_seed = {rep_seed}");
    let spec = InstanceSpec::RobustLp { d: 10, n: 100, seed: rep_seed };
    let instance = spec.build_all().unwrap().pop().unwrap();
    let d = instance.dim();

    let t0 = Instant::now();
    let mut h = CutCollection::with_tau_dup(d, 1e-12);
    for (cut, prov) in box_basis(d, instance.node_cfg.box_bound).unwrap().iter() {
        h.insert(cut, prov).unwrap();
    }
    let cfg = instance.node_cfg.solver;
    let mut hint = None;
    let mut iters = 0usize;
    loop {
        let sol = match solve_min_norm(&h, &instance.objective, &cfg, hint).unwrap() {
            MinNormResult::Optimal(s) => s,
            other => panic!("unexpected: {other:?}"),
        };
        hint = Some(sol.lambda);
        iters += 1;
        let mut worst = f64::NEG_INFINITY;
        let mut violated = 0usize;
        for oracle in &instance.oracles {
            let reply = oracle.query(&sol.z_star);
            if !reply.is_inside() {
                violated += 1;
                worst = worst.max(reply.violation);
                let cut = reply.cut.as_ref().unwrap();
                h.insert(cut, Provenance::new(usize::MAX - 1, 0)).unwrap();
            }
        }
        if iters % 25 == 0 || violated == 0 {
            println!(
                "iter {iters:5}  cuts {:6}  violated {violated:3}  worst {worst:10.3e}  t {:7.1}s",
                h.len(),
                t0.elapsed().as_secs_f64()
            );
        }
        if violated == 0 {
            break;
        }
        if t0.elapsed().as_secs_f64() > 150.0 {
            println!("probe timeout after {iters} iters, {} cuts", h.len());
            break;
        }
    }
}

#[test]
fn probe_rep8_run() {
    use cpc_core::problems::reference_solve;
    use cpc_core::{netsim, CommGraph, FaultPlan, GraphKind, RunOptions, Schedule, StopRule};

    let rep_seed = rng::stream(42, "experiment-rep", 28).gen::<u64>();
    let spec = InstanceSpec::RobustLp { d: 10, n: 100, seed: rep_seed };
    let mut instance = spec.build_all().unwrap().pop().unwrap();
    instance.z_ref = Some(reference_solve(&instance).unwrap());
    let graph_seed = rng::stream(rep_seed, "experiment-graph", 0).gen::<u64>();
    let graph = CommGraph::new(100, GraphKind::Circulant { k: 5 }).unwrap();
    let _ = graph_seed;
    let opts = RunOptions {
        stop: StopRule::AllWithin {
            eps: 0.1,
            z_ref: instance.z_ref.clone().unwrap(),
            max_rounds: 500,
        },
        seed: rng::stream(rep_seed, "experiment-run", 0).gen::<u64>(),
        flood_after_stop: false,
    };
    let t0 = Instant::now();
    let log = netsim::run(instance, &graph, &Schedule::Synchronous, &FaultPlan::none(), &opts)
        .unwrap();
    println!(
        "stop {:?} at round {} after {:.1}s, records {}",
        log.stop_reason,
        log.stop_round,
        t0.elapsed().as_secs_f64(),
        log.records.len()
    );
}

#[test]
fn probe_rep8_manual() {
    use cpc_core::node::{BasisMessage, Node};
    use cpc_core::{CommGraph, GraphKind};

    let rep_seed = rng::stream(42, "experiment-rep", 28).gen::<u64>();
    let spec = InstanceSpec::RobustLp { d: 10, n: 100, seed: rep_seed };
    let instance = spec.build_all().unwrap().pop().unwrap();
    let n = instance.n();
    let graph = CommGraph::new(n, GraphKind::Circulant { k: 5 }).unwrap();

    let mut nodes: Vec<Node<f64>> = instance
        .oracles
        .into_iter()
        .enumerate()
        .map(|(i, o)| Node::new(i, instance.objective.clone(), o, instance.node_cfg).unwrap())
        .collect();
    let mut mailboxes: Vec<Vec<BasisMessage<f64>>> = vec![Vec::new(); n];
    let t0 = Instant::now();
    'outer: for round in 1..=200u64 {
        for i in 0..n {
            let inbox = std::mem::take(&mut mailboxes[i]);
            let mut h = nodes[i].basis().clone();
            for m in &inbox {
                h.merge(&m.cuts).unwrap();
            }
            match nodes[i].step(round, &inbox) {
                Ok(rec) => {
                    if !rec.z.iter().all(|v| v.is_finite()) || !rec.gamma.is_finite() {
                        println!("round {round} node {i}: NON-FINITE solve output");
                        println!("  z = {:?}", rec.z);
                        dump(&h, &instance.objective, "/tmp/bad_h.txt");
                        break 'outer;
                    }
                }
                Err(e) => {
                    println!("round {round} node {i}: step error {e}");
                    let bad_cuts = h
                        .iter()
                        .filter(|(c, _)| {
                            !c.b.is_finite() || !c.a.iter().all(|v| v.is_finite())
                        })
                        .count();
                    println!("  merged {} cuts, {} non-finite", h.len(), bad_cuts);
                    dump(&h, &instance.objective, "/tmp/bad_h.txt");
                    break 'outer;
                }
            }
        }
        for &(src, dst) in graph.edges(round).iter() {
            let msg = nodes[src].message(round);
            mailboxes[dst].push(msg);
        }
        if round % 10 == 0 {
            println!("round {round:3}  total {:7.1}s", t0.elapsed().as_secs_f64());
        }
        if t0.elapsed().as_secs_f64() > 240.0 {
            println!("manual probe timeout");
            break;
        }
    }
}

fn dump(h: &cpc_core::CutCollection<f64>, c: &[f64], path: &str) {
    use std::fmt::Write as _;
    let mut out = String::new();
    writeln!(out, "{}", c.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" "))
        .unwrap();
    for (cut, _) in h.iter() {
        writeln!(
            out,
            "{} {}",
            format!("{:.17e}", cut.b),
            cut.a.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" ")
        )
        .unwrap();
    }
    std::fs::write(path, out).unwrap();
    println!("  dumped to {path}");
}
