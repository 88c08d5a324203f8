//! Cavallo's redistribution mechanism run directly on the generated graph.
//!
//! The VCG part is diffusion-aware: removing agent `i` also removes every
//! agent only she brought in. This is what makes the naive extension run a
//! deficit.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::GeneratedGraph;
use crate::mechanisms::Outcome;
use crate::money::Money;
use crate::network::{SocialNetwork, StrategyProfile};

pub fn run_cavallo(g: &GeneratedGraph) -> Result<Outcome> {
    let order = g.bid_order();
    let Some(&winner) = order.first() else {
        return Err(Error::EmptyInstance("no bidders in the generated graph"));
    };
    let n = Money::from_usize(g.bidder_count());
    let welfare = g.value(winner).clone();
    let nth = |k: usize| order.get(k).map(|&v| g.value(v).clone()).unwrap_or_default();
    let second = nth(1);
    let third = nth(2);
    let top_two_rebate = &third / &n;
    let other_rebate = &second / &n;

    let dom = g.dom();
    let mut payments = BTreeMap::new();
    for (rank, &i) in order.iter().enumerate() {
        let (without_i, _) = g.top_excluding(|v| dom.dominates(i, v));
        let others_with_i = if i == winner { Money::zero() } else { welfare.clone() };
        let vcg = without_i - others_with_i;
        let rebate = if rank < 2 { &top_two_rebate } else { &other_rebate };
        payments.insert(g.id(i).clone(), vcg - rebate);
    }
    let surplus = payments.values().sum();
    Ok(Outcome { winner: Some(g.id(winner).clone()), payments, surplus, social_welfare: welfare, trace: Vec::new() })
}

/// Cavallo restricted to the owner's direct neighbours, without diffusion.
pub fn run_cavallo_neighbours(network: &SocialNetwork) -> Result<Outcome> {
    if network.neighbours(network.owner()).is_empty() {
        return Err(Error::EmptyInstance("owner has no neighbours"));
    }
    let g = crate::graph::build_generated_graph(network, &StrategyProfile::truthful(network))?;
    run_cavallo(&g.neighbour_restriction())
}
