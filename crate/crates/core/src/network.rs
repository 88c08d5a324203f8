//! Ground-truth social networks and reported strategy profiles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;

/// Opaque agent identifier. Ordering is lexicographic on the underlying
/// string and doubles as the tie-break rule everywhere an arg-max is taken.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSpec {
    pub valuation: Money,
    pub neighbours: BTreeSet<AgentId>,
}

/// The simulator's world state: the owner, every potential bidder, their
/// true valuations and their (undirected) neighbour sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialNetwork {
    owner: AgentId,
    agents: BTreeMap<AgentId, AgentSpec>,
    owner_neighbours: BTreeSet<AgentId>,
}

impl SocialNetwork {
    /// Validates and symmetrizes an undirected declaration.
    ///
    /// `edges` may mention the owner on either side. Self-loops, unknown ids,
    /// negative valuations and agents disconnected from the owner are
    /// rejected.
    pub fn new(
        owner: AgentId,
        valuations: BTreeMap<AgentId, Money>,
        edges: impl IntoIterator<Item = (AgentId, AgentId)>,
    ) -> Result<Self> {
        if valuations.contains_key(&owner) {
            return Err(Error::MalformedInput(format!("owner `{owner}` is also declared as an agent")));
        }
        let mut agents: BTreeMap<AgentId, AgentSpec> = BTreeMap::new();
        for (id, valuation) in valuations {
            if valuation.is_negative() {
                return Err(Error::MalformedInput(format!("agent `{id}` has negative valuation {valuation}")));
            }
            agents.insert(id, AgentSpec { valuation, neighbours: BTreeSet::new() });
        }
        let mut owner_neighbours = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::MalformedInput(format!("self-loop on `{u}`")));
            }
            for x in [&u, &v] {
                if *x != owner && !agents.contains_key(x) {
                    return Err(Error::MalformedInput(format!("edge references unknown agent `{x}`")));
                }
            }
            for (a, b) in [(&u, &v), (&v, &u)] {
                if *a == owner {
                    owner_neighbours.insert(b.clone());
                } else {
                    agents.get_mut(a).expect("checked above").neighbours.insert(b.clone());
                }
            }
        }
        let net = SocialNetwork { owner, agents, owner_neighbours };
        if let Some(lost) = net.unreachable_agents().into_iter().next() {
            return Err(Error::MalformedInput(format!("agent `{lost}` is not connected to the owner")));
        }
        Ok(net)
    }

    fn unreachable_agents(&self) -> Vec<AgentId> {
        let mut seen: BTreeSet<&AgentId> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(&self.owner);
        queue.push_back(&self.owner);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbours(u) {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        self.agents.keys().filter(|id| !seen.contains(id)).cloned().collect()
    }

    pub fn owner(&self) -> &AgentId {
        &self.owner
    }

    pub fn agents(&self) -> &BTreeMap<AgentId, AgentSpec> {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn contains(&self, id: &AgentId) -> bool {
        self.agents.contains_key(id)
    }

    pub fn valuation(&self, id: &AgentId) -> Option<&Money> {
        self.agents.get(id).map(|a| &a.valuation)
    }

    /// True neighbour set; for the owner, the agents adjacent to her.
    pub fn neighbours(&self, id: &AgentId) -> &BTreeSet<AgentId> {
        static EMPTY: BTreeSet<AgentId> = BTreeSet::new();
        if *id == self.owner {
            &self.owner_neighbours
        } else {
            self.agents.get(id).map(|a| &a.neighbours).unwrap_or(&EMPTY)
        }
    }

    /// Every undirected edge once, as `(smaller, larger)`.
    pub fn undirected_edges(&self) -> BTreeSet<(AgentId, AgentId)> {
        let mut out = BTreeSet::new();
        for v in &self.owner_neighbours {
            out.insert(ordered(&self.owner, v));
        }
        for (id, spec) in &self.agents {
            for v in &spec.neighbours {
                out.insert(ordered(id, v));
            }
        }
        out
    }

    /// Copy with valuations replaced; ids must match exactly.
    pub fn with_valuations(&self, valuations: &BTreeMap<AgentId, Money>) -> Result<Self> {
        let mut next = self.clone();
        for (id, spec) in next.agents.iter_mut() {
            let v = valuations.get(id).ok_or_else(|| Error::MissingAgent(id.clone()))?;
            if v.is_negative() {
                return Err(Error::MalformedInput(format!("agent `{id}` has negative valuation {v}")));
            }
            spec.valuation = v.clone();
        }
        Ok(next)
    }
}

fn ordered(a: &AgentId, b: &AgentId) -> (AgentId, AgentId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// One agent's reported type: a valuation and the neighbours she invites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub valuation: Money,
    pub invited: BTreeSet<AgentId>,
}

/// Reported types for every agent. An agent without an entry is absent:
/// she does not join even if invited.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StrategyProfile {
    reports: BTreeMap<AgentId, Report>,
}

impl StrategyProfile {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every agent reports her true valuation and invites all neighbours.
    pub fn truthful(network: &SocialNetwork) -> Self {
        let reports = network
            .agents()
            .iter()
            .map(|(id, spec)| {
                (id.clone(), Report { valuation: spec.valuation.clone(), invited: spec.neighbours.clone() })
            })
            .collect();
        StrategyProfile { reports }
    }

    pub fn get(&self, id: &AgentId) -> Option<&Report> {
        self.reports.get(id)
    }

    pub fn set(&mut self, id: AgentId, report: Report) {
        self.reports.insert(id, report);
    }

    pub fn remove(&mut self, id: &AgentId) -> Option<Report> {
        self.reports.remove(id)
    }

    pub fn with(mut self, id: AgentId, report: Report) -> Self {
        self.set(id, report);
        self
    }

    pub fn reports(&self) -> &BTreeMap<AgentId, Report> {
        &self.reports
    }

    /// Checks the profile against the network: known ids, non-negative
    /// valuations, invitations within true neighbour sets.
    pub fn validate(&self, network: &SocialNetwork) -> Result<()> {
        for (id, report) in &self.reports {
            if !network.contains(id) {
                return Err(Error::MalformedInput(format!("profile entry for unknown agent `{id}`")));
            }
            if report.valuation.is_negative() {
                return Err(Error::MalformedInput(format!("agent `{id}` reports negative valuation")));
            }
            let nbrs = network.neighbours(id);
            if let Some(bad) = report.invited.iter().find(|v| !nbrs.contains(*v)) {
                return Err(Error::MalformedInput(format!("agent `{id}` invites `{bad}` who is not her neighbour")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::from(s)
    }

    fn vals(pairs: &[(&str, i64)]) -> BTreeMap<AgentId, Money> {
        pairs.iter().map(|(k, v)| (id(k), Money::from_int(*v))).collect()
    }

    #[test]
    fn symmetrizes_declarations() {
        let net = SocialNetwork::new(id("o"), vals(&[("a", 1), ("b", 2)]), [(id("o"), id("a")), (id("b"), id("a"))]).unwrap();
        assert!(net.neighbours(&id("a")).contains(&id("b")));
        assert!(net.neighbours(&id("a")).contains(&id("o")));
        assert!(net.neighbours(&id("o")).contains(&id("a")));
        assert_eq!(net.undirected_edges().len(), 2);
    }

    #[test]
    fn rejects_bad_networks() {
        let disconnected = SocialNetwork::new(id("o"), vals(&[("a", 1), ("b", 2)]), [(id("o"), id("a"))]);
        assert!(matches!(disconnected, Err(Error::MalformedInput(_))));
        let self_loop = SocialNetwork::new(id("o"), vals(&[("a", 1)]), [(id("o"), id("a")), (id("a"), id("a"))]);
        assert!(self_loop.is_err());
        let unknown = SocialNetwork::new(id("o"), vals(&[("a", 1)]), [(id("o"), id("z"))]);
        assert!(unknown.is_err());
        let negative = SocialNetwork::new(id("o"), vals(&[("a", -1)]), [(id("o"), id("a"))]);
        assert!(negative.is_err());
        let owner_dup = SocialNetwork::new(id("o"), vals(&[("o", 1)]), []);
        assert!(owner_dup.is_err());
    }

    #[test]
    fn profile_validation() {
        let net = SocialNetwork::new(id("o"), vals(&[("a", 1), ("b", 2)]), [(id("o"), id("a")), (id("a"), id("b"))]).unwrap();
        let truthful = StrategyProfile::truthful(&net);
        truthful.validate(&net).unwrap();
        let bad = truthful
            .clone()
            .with(id("b"), Report { valuation: Money::from_int(1), invited: [id("o")].into() });
        assert!(bad.validate(&net).is_err());
        let unknown = truthful.with(id("z"), Report { valuation: Money::zero(), invited: BTreeSet::new() });
        assert!(unknown.validate(&net).is_err());
    }
}
