//! Network-based redistribution.
//!
//! The item travels down the ancestor sequence of the highest bidder. Each
//! ancestor `a_j` must pay the best bid outside her dominated set; the first
//! one whose bid covers that price keeps the item. The increment over the
//! previous ancestor's price is shared among `a_j` and her sibling block, each
//! member receiving her dominated-set share of the increment that would remain
//! had she (and everyone she alone brought in) stayed away.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{GeneratedGraph, OWNER};
use crate::mechanisms::{Outcome, StepRecord};
use crate::money::Money;
use crate::network::AgentId;

pub fn run_nrm(g: &GeneratedGraph) -> Result<Outcome> {
    let Some(top) = g.top_bidder_index() else {
        return Err(Error::EmptyInstance("no bidders in the generated graph"));
    };
    let mut sequence = g.ancestors_of(top);
    sequence.push(top);

    let mut payments: BTreeMap<AgentId, Money> = g.bidders().map(|id| (id.clone(), Money::zero())).collect();
    let mut trace = Vec::with_capacity(sequence.len());
    let mut surplus = Money::zero();
    let mut winner = None;
    let mut prev = OWNER;
    let mut p_prev = Money::zero();
    for (pos, &a) in sequence.iter().enumerate() {
        let step = step_at(g, a, prev, pos + 1, &p_prev);
        for (k, r) in &step.rebates {
            *payments.get_mut(k).expect("block members are bidders") -= r;
        }
        surplus += &step.step_surplus;
        let allocated = step.allocated_here;
        p_prev = step.required_payment.clone();
        trace.push(step);
        if allocated {
            *payments.get_mut(g.id(a)).expect("bidder") += &p_prev;
            winner = Some(a);
            break;
        }
        prev = a;
    }
    // The last sequence member is the global maximum, so it always accepts.
    let winner = winner.expect("highest bidder covers her required payment");
    Ok(Outcome {
        winner: Some(g.id(winner).clone()),
        payments,
        surplus,
        social_welfare: g.value(winner).clone(),
        trace,
    })
}

/// The members sharing step `j`: the child neighbours of `a_prev` that
/// `a_prev` dominates.
///
/// On trees, and whenever `a_j` is a child neighbour of `a_prev`, this is
/// `B_{a_j} ∪ {a_j}`. When the dominator chain skips a depth level, `a_j` is
/// not in the block; she still faces the required payment but takes no share
/// of the step, so overbidding to become the top bidder buys no rebate. A
/// child neighbour also reachable around `a_prev` is left out, so withholding
/// invitations to turn `a_prev` into a dominator buys none either.
pub fn step_block(g: &GeneratedGraph, a_prev: &AgentId, a_j: &AgentId) -> Result<BTreeSet<AgentId>> {
    let prev = g.require(a_prev)?;
    let a = g.require_bidder(a_j)?;
    check_chain(g, prev, a)?;
    Ok(block_indices(g, prev).into_iter().map(|v| g.id(v).clone()).collect())
}

fn check_chain(g: &GeneratedGraph, prev: usize, a: usize) -> Result<()> {
    if prev == a || !g.dom().dominates(prev, a) {
        return Err(Error::Structural(format!("`{}` does not precede `{}` in a dominator chain", g.id(prev), g.id(a))));
    }
    Ok(())
}

fn block_indices(g: &GeneratedGraph, prev: usize) -> Vec<usize> {
    let dom = g.dom();
    let mut block: Vec<usize> = g.child_neighbours_of(prev).filter(|&k| dom.dominates(prev, k)).collect();
    block.sort_unstable();
    block
}

/// `S_{-k}` for block member `k` at step `j`.
///
/// Recomputes the run on the graph without `k`'s dominated set. If the
/// counterfactual sequence still has `a_prev` at position `j - 1` and has a
/// position `j`, returns the clamped increment of that position's price over
/// `p_prev`; otherwise 0.
pub fn counterfactual_block_surplus(
    g: &GeneratedGraph,
    k: &AgentId,
    j: usize,
    a_prev: &AgentId,
    p_prev: &Money,
) -> Result<Money> {
    let kv = g.require_bidder(k)?;
    if j == 0 {
        return Err(Error::Structural("step positions start at 1".into()));
    }
    Ok(counterfactual(g, kv, j, a_prev, p_prev))
}

fn counterfactual(g: &GeneratedGraph, k: usize, j: usize, a_prev: &AgentId, p_prev: &Money) -> Money {
    let dom = g.dom();
    let reduced = g.without(|v| dom.dominates(k, v));
    let Some(top) = reduced.top_bidder_index() else {
        return Money::zero();
    };
    // Augmented sequence (owner, ancestors..., top) in the reduced graph.
    let mut seq = Vec::with_capacity(8);
    seq.push(OWNER);
    seq.extend(reduced.ancestors_of(top));
    seq.push(top);
    match (seq.get(j - 1), seq.get(j)) {
        (Some(&p), Some(&a)) if reduced.id(p) == a_prev => {
            let rdom = reduced.dom();
            let (best, _) = reduced.top_excluding(|v| rdom.dominates(a, v));
            (best - p_prev).clamp_non_negative()
        }
        _ => Money::zero(),
    }
}

/// One redistribution step for ancestor `a_j` following `a_prev` (the owner
/// for `j = 1`), whose required payment was `p_prev`.
pub fn nrm_step(g: &GeneratedGraph, a_j: &AgentId, a_prev: &AgentId, j: usize, p_prev: &Money) -> Result<StepRecord> {
    let a = g.require_bidder(a_j)?;
    let prev = g.require(a_prev)?;
    check_chain(g, prev, a)?;
    if j == 0 {
        return Err(Error::Structural("step positions start at 1".into()));
    }
    Ok(step_at(g, a, prev, j, p_prev))
}

fn step_at(g: &GeneratedGraph, a: usize, prev: usize, j: usize, p_prev: &Money) -> StepRecord {
    let dom = g.dom();
    let (required, _) = g.top_excluding(|v| dom.dominates(a, v));
    let block = block_indices(g, prev);
    let block_total: usize = block.iter().map(|&k| dom.subtree_size(k)).sum();
    let block_total = Money::from_usize(block_total);
    let prev_id = g.id(prev);

    let mut block_sizes = BTreeMap::new();
    let mut counterfactual_surplus = BTreeMap::new();
    let mut rebates = BTreeMap::new();
    for &k in &block {
        let size = dom.subtree_size(k);
        let s = counterfactual(g, k, j, prev_id, p_prev);
        let r = Money::from_usize(size) * &s / &block_total;
        let id = g.id(k).clone();
        block_sizes.insert(id.clone(), size);
        counterfactual_surplus.insert(id.clone(), s);
        rebates.insert(id, r);
    }
    let rebate_total: Money = rebates.values().sum();
    let step_surplus = &required - p_prev - rebate_total;
    StepRecord {
        ancestor: g.id(a).clone(),
        allocated_here: *g.value(a) >= required,
        required_payment: required,
        prev_required_payment: p_prev.clone(),
        block: block.iter().map(|&v| g.id(v).clone()).collect(),
        block_sizes,
        counterfactual_surplus,
        rebates,
        step_surplus,
    }
}
