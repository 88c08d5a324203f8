use redistnet::genlab::{gen_graph, gen_tree, run_sweep, sample_valuations, Family, SweepConfig, ValuationLaw};
use redistnet::mechanisms::Mechanism;
use redistnet::{build_generated_graph, Error, Money, StrategyProfile};

fn config(sizes: Vec<usize>, trials: usize, seed: u64) -> SweepConfig {
    SweepConfig {
        family: Family::Tree,
        sizes,
        extra_edge_factor: Money::zero(),
        law: "uniform:0:100".parse().unwrap(),
        trials_per_size: trials,
        seed,
        mechanisms: vec![Mechanism::Nrm],
        record_runtime: false,
    }
}

#[test]
fn large_tree_structure() {
    let net = gen_tree(500, 11).unwrap();
    let g = build_generated_graph(&net, &StrategyProfile::truthful(&net)).unwrap();
    assert_eq!(g.bidder_count(), 500);
    assert_eq!(net.undirected_edges().len(), 500);
    // Every bidder has exactly one neighbour one level up.
    for v in g.bidders() {
        let d = g.depth(v).unwrap();
        let ups = net.neighbours(v).iter().filter(|u| g.depth(u).unwrap() + 1 == d).count();
        assert_eq!(ups, 1);
    }
}

#[test]
fn dense_graphs_lose_ancestors() {
    let net = gen_graph(60, &Money::from_int(4), 2).unwrap();
    let g = build_generated_graph(&net, &StrategyProfile::truthful(&net)).unwrap();
    let loose = g.bidders().filter(|v| g.ancestor_sequence(v).unwrap().is_empty()).count();
    assert!(loose > g.child_neighbours(g.owner()).unwrap().len());
}

#[test]
fn uniform_mean_concentrates() {
    let net = gen_tree(1000, 4).unwrap();
    let law: ValuationLaw = "uniform:0:100".parse().unwrap();
    let net = sample_valuations(&net, &law, 99).unwrap();
    let mean = net.agents().values().map(|a| a.valuation.to_f64()).sum::<f64>() / 1000.0;
    let tol = 100.0 / (12.0f64 * 1000.0).sqrt() * 4.0;
    assert!((mean - 50.0).abs() < tol, "mean {mean}");
    let again = sample_valuations(&gen_tree(1000, 4).unwrap(), &law, 99).unwrap();
    assert_eq!(net, again);
}

#[test]
fn single_record_sweep() {
    let recs = run_sweep(&config(vec![10], 1, 1)).unwrap();
    assert_eq!(recs.len(), 1);
    assert!(!recs[0].surplus.is_negative());
    assert!(recs[0].social_welfare <= recs[0].optimal_welfare);
    assert!(recs[0].runtime.is_none());
}

#[test]
fn sweeps_are_reproducible_and_ordered() {
    let mut cfg = config(vec![5, 20, 40], 6, 77);
    cfg.family = Family::ConnectedGraph;
    cfg.extra_edge_factor = Money::ratio(1, 2);
    cfg.mechanisms = vec![Mechanism::CavalloNeighbours, Mechanism::Nrm, Mechanism::Cavallo];
    let a = run_sweep(&cfg).unwrap();
    let b = run_sweep(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 3 * 6 * 3);
    let keys: Vec<_> = a.iter().map(|r| (r.n, r.trial, r.mechanism)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in a.iter().filter(|r| r.mechanism == Mechanism::Nrm) {
        assert!(!r.surplus.is_negative());
    }
    cfg.seed = 78;
    assert_ne!(run_sweep(&cfg).unwrap(), a);
}

#[test]
fn timing_is_opt_in() {
    let mut cfg = config(vec![8], 2, 3);
    cfg.record_runtime = true;
    assert!(run_sweep(&cfg).unwrap().iter().all(|r| r.runtime.is_some()));
}

#[test]
fn invalid_configs() {
    for cfg in [config(vec![], 1, 0), config(vec![10, 10], 1, 0), config(vec![0], 1, 0), config(vec![5], 0, 0)] {
        assert!(matches!(run_sweep(&cfg), Err(Error::Config(_))));
    }
    assert!("uniform:5:1".parse::<ValuationLaw>().is_err());
    assert!("exponential:0".parse::<ValuationLaw>().is_err());
    assert!(matches!(gen_tree(0, 1), Err(Error::EmptyInstance(_))));
}
