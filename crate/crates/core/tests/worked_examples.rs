//! Per-operation examples on the bundled fixtures.

use std::collections::BTreeSet;

use redistnet::dominators::oracle_dominated_set;
use redistnet::fixtures;
use redistnet::mechanisms::{
    counterfactual_block_surplus, efficient_social_welfare, nrm_step, run_cavallo, run_cavallo_neighbours, run_nrm,
};
use redistnet::{build_generated_graph, AgentId, GeneratedGraph, Money, StrategyProfile};

fn id(s: &str) -> AgentId {
    AgentId::from(s)
}

fn ids(list: &[&str]) -> BTreeSet<AgentId> {
    list.iter().map(|s| id(s)).collect()
}

fn m(s: &str) -> Money {
    s.parse().unwrap()
}

fn graph_of(text: &str) -> GeneratedGraph {
    let (net, profile) = fixtures::load(text);
    build_generated_graph(&net, &profile).unwrap()
}

#[test]
fn generation_drops_uninvited_branch() {
    let g = graph_of(fixtures::DIFFUSION_EXAMPLE);
    for absent in ["e", "g", "h"] {
        assert!(!g.contains(&id(absent)), "{absent} should be absent");
    }
    assert_eq!(g.bidder_count(), 5);
    assert_eq!(g.reported_valuation(&id("b")).unwrap(), &Money::from_int(5));
}

#[test]
fn tree_structure() {
    let g = graph_of(fixtures::TREE);
    assert_eq!(g.ancestor_sequence(&id("q")).unwrap(), vec![id("b"), id("g"), id("l")]);
    assert_eq!(g.sibling_block(&id("o"), &id("b")).unwrap(), ids(&["a", "c"]));
    assert_eq!(g.sibling_block(&id("b"), &id("g")).unwrap(), ids(&["f", "h"]));
    assert_eq!(g.sibling_block(&id("g"), &id("l")).unwrap(), ids(&["k", "m"]));
    let sizes: Vec<usize> = ["a", "b", "c", "f", "g", "h", "k", "l", "m"]
        .iter()
        .map(|s| g.dominated_size(&id(s)).unwrap())
        .collect();
    assert_eq!(sizes, vec![4, 8, 4, 1, 5, 1, 1, 2, 1]);
    let vb = g.dominated_set(&id("b")).unwrap();
    assert_eq!(g.top_bid_excluding(&vb).0, Money::from_int(10));
    assert_eq!(efficient_social_welfare(&g).unwrap(), Money::from_int(18));
}

#[test]
fn graph_structure() {
    let g = graph_of(fixtures::GRAPH);
    assert_eq!(g.dominated_set(&id("a")).unwrap(), ids(&["a", "d", "e"]));
    assert_eq!(g.ancestor_sequence(&id("r")).unwrap(), vec![id("g"), id("p")]);
    assert_eq!(g.sibling_block(&id("o"), &id("g")).unwrap(), ids(&["a", "b", "c"]));
    assert_eq!(g.sibling_block(&id("g"), &id("p")).unwrap(), ids(&["j", "k", "l", "m"]));
    assert_eq!(oracle_dominated_set(&g, &id("g")).unwrap().len(), 9);
    assert_eq!(g.dominated_size(&id("g")).unwrap(), 9);
    let vg = g.dominated_set(&id("g")).unwrap();
    assert_eq!(g.top_bid_excluding(&vg).0, Money::from_int(12));
    assert_eq!(efficient_social_welfare(&g).unwrap(), *g.reported_valuation(&id("r")).unwrap());
}

#[test]
fn tree_steps() {
    let g = graph_of(fixtures::TREE);
    let zero = Money::zero();
    assert_eq!(counterfactual_block_surplus(&g, &id("b"), 1, &id("o"), &zero).unwrap(), 8);
    for k in ["k", "l", "m"] {
        assert_eq!(counterfactual_block_surplus(&g, &id(k), 3, &id("g"), &Money::from_int(17)).unwrap(), 0);
    }
    let s1 = nrm_step(&g, &id("b"), &id("o"), 1, &zero).unwrap();
    assert_eq!(s1.required_payment, 10);
    assert_eq!(s1.rebate(&id("a")), m("2.5"));
    assert_eq!(s1.rebate(&id("b")), 4);
    assert_eq!(s1.rebate(&id("c")), 2);
    assert_eq!(s1.step_surplus, m("1.5"));
    assert!(!s1.allocated_here);
}

#[test]
fn graph_steps() {
    let g = graph_of(fixtures::GRAPH);
    let zero = Money::zero();
    assert_eq!(counterfactual_block_surplus(&g, &id("a"), 1, &id("o"), &zero).unwrap(), 12);
    let s1 = nrm_step(&g, &id("g"), &id("o"), 1, &zero).unwrap();
    let expect = [("a", "2.4"), ("b", "0.8"), ("c", "1.2"), ("g", "5.4")];
    for (k, r) in expect {
        assert_eq!(s1.rebate(&id(k)), m(r), "R_{k}");
    }
    assert_eq!(s1.step_surplus, m("2.2"));
    let s2 = nrm_step(&g, &id("p"), &id("g"), 2, &Money::from_int(12)).unwrap();
    assert_eq!(s2.required_payment, 15);
    for k in ["j", "k", "l", "m"] {
        assert_eq!(s2.rebate(&id(k)), m("0.5"));
    }
    assert_eq!(s2.rebate(&id("p")), 1);
    assert_eq!(s2.step_surplus, 0);
    assert!(s2.allocated_here);
}

#[test]
fn full_runs() {
    let tree = run_nrm(&graph_of(fixtures::TREE)).unwrap();
    assert_eq!(tree.winner, Some(id("l")));
    assert_eq!(tree.payment(&id("l")), 17);
    assert_eq!(tree.surplus, m("1.5"));
    assert_eq!(tree.social_welfare, 18);

    let graph = run_nrm(&graph_of(fixtures::GRAPH)).unwrap();
    assert_eq!(graph.winner, Some(id("p")));
    assert_eq!(graph.payment(&id("p")), 14);
    assert_eq!(graph.surplus, m("2.2"));
    assert_eq!(graph.social_welfare, 16);

    let line = run_nrm(&graph_of(fixtures::LINE)).unwrap();
    assert_eq!(line.winner, Some(id("a")));
    assert_eq!(line.payment(&id("a")), 0);
    assert_eq!(line.surplus, 0);
    assert_eq!(line.social_welfare, 1);
}

#[test]
fn cavallo_examples() {
    let deficit = run_cavallo(&graph_of(fixtures::CAVALLO_DEFICIT)).unwrap();
    assert_eq!(deficit.winner, Some(id("c")));
    assert_eq!(deficit.payment(&id("a")), -1);
    assert_eq!(deficit.surplus, -1);

    let diffusion = run_cavallo(&graph_of(fixtures::CAVALLO_DIFFUSION)).unwrap();
    assert_eq!(diffusion.winner, Some(id("c")));
    assert_eq!(diffusion.payment(&id("c")), Money::from_int(3) - m("2/5"));
    assert_eq!(diffusion.payment(&id("b")), -m("2/5"));
    for k in ["a", "d", "e"] {
        assert_eq!(diffusion.payment(&id(k)), -m("3/5"));
    }

    for fixture in [fixtures::TREE, fixtures::GRAPH] {
        let (net, _) = fixtures::load(fixture);
        let base = run_cavallo_neighbours(&net).unwrap();
        assert_eq!(base.winner, Some(id("b")));
        assert_eq!(base.social_welfare, 7);
    }
}

#[test]
fn single_neighbour_cavallo() {
    let (net, _) = redistnet::instance::parse_instance(
        "owner = \"o\"\n[[agents]]\nid = \"a\"\nvaluation = 4\nneighbours = [\"o\"]\n",
    )
    .unwrap();
    let g = build_generated_graph(&net, &StrategyProfile::truthful(&net)).unwrap();
    let out = run_cavallo(&g).unwrap();
    assert_eq!(out.winner, Some(id("a")));
    assert_eq!(out.payment(&id("a")), 0);
    assert_eq!(out.surplus, 0);
}

#[test]
fn tree_later_steps() {
    let g = graph_of(fixtures::TREE);
    let out = run_nrm(&g).unwrap();
    assert_eq!(out.trace.len(), 3);
    let s2 = &out.trace[1];
    assert_eq!((s2.required_payment.clone(), s2.prev_required_payment.clone()), (17.into(), 10.into()));
    for (k, r) in [("f", 1), ("g", 5), ("h", 1)] {
        assert_eq!(s2.rebate(&id(k)), r);
    }
    assert_eq!(s2.step_surplus, 0);
    let s3 = &out.trace[2];
    assert!(s3.allocated_here);
    assert_eq!(s3.rebate_total(), 0);
    assert_eq!(s3.step_surplus, 0);
}

#[test]
fn top_bidder_outside_the_owner_block() {
    // v3 is reached through v1 or v2, so nobody but the owner dominates her.
    let text = "owner = \"o\"\n\
        [[agents]]\nid = \"v1\"\nvaluation = 19\nneighbours = [\"o\", \"v3\"]\n\
        [[agents]]\nid = \"v2\"\nvaluation = 11\nneighbours = [\"o\", \"v3\", \"v4\"]\n\
        [[agents]]\nid = \"v3\"\nvaluation = 20\nneighbours = [\"v1\", \"v2\"]\n\
        [[agents]]\nid = \"v4\"\nvaluation = 10\nneighbours = [\"o\", \"v2\"]\n";
    let g = graph_of(text);
    assert!(g.ancestor_sequence(&id("v3")).unwrap().is_empty());
    assert_eq!(redistnet::mechanisms::step_block(&g, &id("o"), &id("v3")).unwrap(), ids(&["v1", "v2", "v4"]));
    let out = run_nrm(&g).unwrap();
    assert_eq!(out.winner, Some(id("v3")));
    assert_eq!(out.trace[0].rebate(&id("v3")), 0);
    assert_eq!(out.payment(&id("v3")), 19);
    assert!(!out.surplus.is_negative());
}
