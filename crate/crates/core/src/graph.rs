//! The graph generated by a reported type profile, and the structural
//! quantities the mechanisms consume: depths, child neighbours, dominated
//! sets, ancestor sequences, sibling blocks and exclusion maxima.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::dominators::DomTree;
use crate::error::{Error, Result};
use crate::money::Money;
use crate::network::{AgentId, SocialNetwork, StrategyProfile};

/// Vertex index of the owner in every [`GeneratedGraph`].
pub(crate) const OWNER: usize = 0;

/// The participants reached by invitations and the directed invitation
/// edges between them. Immutable after construction.
///
/// Bidder vertices are indexed in ascending [`AgentId`] order after the owner,
/// so index order is id order.
#[derive(Debug, Clone)]
pub struct GeneratedGraph {
    ids: Vec<AgentId>,
    index: HashMap<AgentId, usize>,
    valuation: Vec<Money>,
    out: Vec<Vec<usize>>,
    depth: Vec<usize>,
    /// Bidders sorted by (valuation desc, id asc).
    order: Vec<usize>,
    dom: DomTree,
}

/// Dominated sets, their sizes and ancestor sequences for every bidder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominationView {
    pub dominated: BTreeMap<AgentId, BTreeSet<AgentId>>,
    pub size: BTreeMap<AgentId, usize>,
    pub ancestors: BTreeMap<AgentId, Vec<AgentId>>,
}

/// Closure of the owner's invitations under `profile`.
///
/// The owner invites all her true neighbours. A present agent invites her
/// reported `invited` set; an invited agent joins if she has a report.
/// Edges run from inviter to invitee between present vertices.
pub fn build_generated_graph(network: &SocialNetwork, profile: &StrategyProfile) -> Result<GeneratedGraph> {
    profile.validate(network)?;
    let owner = network.owner();
    let invites = |id: &AgentId| -> Vec<AgentId> {
        if id == owner {
            network.neighbours(owner).iter().cloned().collect()
        } else {
            profile.get(id).map(|r| r.invited.iter().cloned().collect()).unwrap_or_default()
        }
    };

    let mut present: BTreeSet<AgentId> = BTreeSet::new();
    let mut queue = VecDeque::from([owner.clone()]);
    while let Some(u) = queue.pop_front() {
        for v in invites(&u) {
            if v != *owner && profile.get(&v).is_some() && present.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }

    let mut ids = Vec::with_capacity(present.len() + 1);
    ids.push(owner.clone());
    ids.extend(present.iter().cloned());
    let index: HashMap<AgentId, usize> = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
    let valuation: Vec<Money> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| if i == OWNER { Money::zero() } else { profile.get(id).expect("present").valuation.clone() })
        .collect();
    let out: Vec<Vec<usize>> = ids
        .iter()
        .map(|u| {
            let mut targets: Vec<usize> = invites(u).iter().filter_map(|v| index.get(v).copied()).collect();
            targets.sort_unstable();
            targets.dedup();
            targets
        })
        .collect();
    Ok(GeneratedGraph::assemble(ids, index, valuation, out))
}

impl GeneratedGraph {
    /// All vertices must be reachable from the owner via `out`.
    fn assemble(ids: Vec<AgentId>, index: HashMap<AgentId, usize>, valuation: Vec<Money>, out: Vec<Vec<usize>>) -> Self {
        let n = ids.len();
        let mut depth = vec![usize::MAX; n];
        depth[OWNER] = 0;
        let mut queue = VecDeque::from([OWNER]);
        while let Some(u) = queue.pop_front() {
            for &v in &out[u] {
                if depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        debug_assert!(depth.iter().all(|&d| d != usize::MAX));
        let mut order: Vec<usize> = (1..n).collect();
        // Index order is id order, so a stable sort on valuation alone keeps
        // the smallest id first among ties.
        order.sort_by(|&a, &b| valuation[b].cmp(&valuation[a]));
        let dom = DomTree::compute(&out, OWNER);
        GeneratedGraph { ids, index, valuation, out, depth, order, dom }
    }

    /// The graph with `removed` vertices deleted, keeping only what is still
    /// reachable from the owner. The owner itself cannot be removed.
    pub(crate) fn without(&self, removed: impl Fn(usize) -> bool) -> GeneratedGraph {
        let n = self.ids.len();
        let mut keep = vec![false; n];
        keep[OWNER] = true;
        let mut queue = VecDeque::from([OWNER]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.out[u] {
                if !keep[v] && !removed(v) {
                    keep[v] = true;
                    queue.push_back(v);
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut ids = Vec::new();
        let mut valuation = Vec::new();
        for v in 0..n {
            if keep[v] {
                remap[v] = ids.len();
                ids.push(self.ids[v].clone());
                valuation.push(self.valuation[v].clone());
            }
        }
        let out = (0..n)
            .filter(|&v| keep[v])
            .map(|v| self.out[v].iter().filter(|&&w| keep[w]).map(|&w| remap[w]).collect())
            .collect();
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        GeneratedGraph::assemble(ids, index, valuation, out)
    }

    /// Owner plus her child neighbours, with no further diffusion.
    pub fn neighbour_restriction(&self) -> GeneratedGraph {
        let mut keep = vec![false; self.ids.len()];
        keep[OWNER] = true;
        for &v in &self.out[OWNER] {
            keep[v] = true;
        }
        let mut ids = Vec::new();
        let mut valuation = Vec::new();
        for (v, &k) in keep.iter().enumerate() {
            if k {
                ids.push(self.ids[v].clone());
                valuation.push(self.valuation[v].clone());
            }
        }
        let mut out = vec![Vec::new(); ids.len()];
        out[OWNER] = (1..ids.len()).collect();
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        GeneratedGraph::assemble(ids, index, valuation, out)
    }

    // ---- index-level accessors used by the mechanisms ----

    pub(crate) fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub(crate) fn id(&self, v: usize) -> &AgentId {
        &self.ids[v]
    }

    pub(crate) fn lookup(&self, id: &AgentId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn require(&self, id: &AgentId) -> Result<usize> {
        self.lookup(id).ok_or_else(|| Error::MissingAgent(id.clone()))
    }

    pub(crate) fn require_bidder(&self, id: &AgentId) -> Result<usize> {
        let v = self.require(id)?;
        if v == OWNER {
            return Err(Error::Structural(format!("`{id}` is the owner, not a bidder")));
        }
        Ok(v)
    }

    pub(crate) fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub(crate) fn value(&self, v: usize) -> &Money {
        &self.valuation[v]
    }

    pub(crate) fn dom(&self) -> &DomTree {
        &self.dom
    }

    /// Bidders in (valuation desc, id asc) order.
    pub(crate) fn bid_order(&self) -> &[usize] {
        &self.order
    }

    pub(crate) fn top_bidder_index(&self) -> Option<usize> {
        self.order.first().copied()
    }

    pub(crate) fn child_neighbours_of(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let d = self.depth[v] + 1;
        self.out[v].iter().copied().filter(move |&w| self.depth[w] == d)
    }

    /// Strict dominators of `v` other than the owner, by increasing depth.
    pub(crate) fn ancestors_of(&self, v: usize) -> Vec<usize> {
        let mut chain = Vec::new();
        let mut cur = self.dom.idom[v];
        while v != OWNER && cur != OWNER {
            chain.push(cur);
            cur = self.dom.idom[cur];
        }
        chain.reverse();
        chain
    }

    /// Highest bid among vertices not matching `excluded`, ties to the
    /// smallest id; `(0, None)` when nothing remains.
    pub(crate) fn top_excluding(&self, excluded: impl Fn(usize) -> bool) -> (Money, Option<usize>) {
        match self.order.iter().copied().find(|&v| !excluded(v)) {
            Some(v) => (self.valuation[v].clone(), Some(v)),
            None => (Money::zero(), None),
        }
    }

    // ---- public, id-level API ----

    pub fn owner(&self) -> &AgentId {
        &self.ids[OWNER]
    }

    /// Owner and bidders.
    pub fn vertices(&self) -> impl Iterator<Item = &AgentId> {
        self.ids.iter()
    }

    /// Bidders in ascending id order.
    pub fn bidders(&self) -> impl Iterator<Item = &AgentId> {
        self.ids[1..].iter()
    }

    pub fn bidder_count(&self) -> usize {
        self.ids.len() - 1
    }

    pub fn contains(&self, id: &AgentId) -> bool {
        self.index.contains_key(id)
    }

    pub fn edges(&self) -> BTreeSet<(AgentId, AgentId)> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, outs)| outs.iter().map(move |&v| (self.ids[u].clone(), self.ids[v].clone())))
            .collect()
    }

    pub fn reported_valuation(&self, id: &AgentId) -> Result<&Money> {
        Ok(&self.valuation[self.require(id)?])
    }

    pub fn depth(&self, id: &AgentId) -> Result<usize> {
        Ok(self.depth[self.require(id)?])
    }

    pub fn child_neighbours(&self, id: &AgentId) -> Result<BTreeSet<AgentId>> {
        let v = self.require(id)?;
        Ok(self.child_neighbours_of(v).map(|w| self.ids[w].clone()).collect())
    }

    /// `i` together with every vertex that loses its connection to the owner
    /// once `i` is deleted.
    pub fn dominated_set(&self, id: &AgentId) -> Result<BTreeSet<AgentId>> {
        let v = self.require_bidder(id)?;
        Ok(self.dom.subtree(v).iter().map(|&w| self.ids[w].clone()).collect())
    }

    pub fn dominated_size(&self, id: &AgentId) -> Result<usize> {
        Ok(self.dom.subtree_size(self.require_bidder(id)?))
    }

    /// Every non-owner vertex whose removal cuts `id` off from the owner,
    /// ordered by increasing depth. Empty for the owner's own neighbours.
    pub fn ancestor_sequence(&self, id: &AgentId) -> Result<Vec<AgentId>> {
        let v = self.require(id)?;
        Ok(self.ancestors_of(v).into_iter().map(|w| self.ids[w].clone()).collect())
    }

    /// Other child neighbours of `prev`, given that `a` is one of them.
    pub fn sibling_block(&self, prev: &AgentId, a: &AgentId) -> Result<BTreeSet<AgentId>> {
        let p = self.require(prev)?;
        let x = self.require(a)?;
        if !self.child_neighbours_of(p).any(|w| w == x) {
            return Err(Error::Structural(format!("`{a}` is not a child neighbour of `{prev}`")));
        }
        Ok(self.child_neighbours_of(p).filter(|&w| w != x).map(|w| self.ids[w].clone()).collect())
    }

    /// Highest reported valuation outside `excluded` and its holder.
    pub fn top_bid_excluding(&self, excluded: &BTreeSet<AgentId>) -> (Money, Option<AgentId>) {
        let (value, holder) = self.top_excluding(|v| excluded.contains(&self.ids[v]));
        (value, holder.map(|v| self.ids[v].clone()))
    }

    pub fn top_bidder(&self) -> Option<&AgentId> {
        self.top_bidder_index().map(|v| &self.ids[v])
    }

    pub fn domination_view(&self) -> DominationView {
        let mut view = DominationView { dominated: BTreeMap::new(), size: BTreeMap::new(), ancestors: BTreeMap::new() };
        for v in 1..self.ids.len() {
            let id = self.ids[v].clone();
            view.dominated.insert(id.clone(), self.dom.subtree(v).iter().map(|&w| self.ids[w].clone()).collect());
            view.size.insert(id.clone(), self.dom.subtree_size(v));
            view.ancestors.insert(id, self.ancestors_of(v).into_iter().map(|w| self.ids[w].clone()).collect());
        }
        view
    }
}
