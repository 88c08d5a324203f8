//! Instance files and outcome rendering.
//!
//! An instance is a TOML document:
//!
//! ```toml
//! owner = "o"
//!
//! [[agents]]
//! id = "a"
//! valuation = 2          # integer, float, or string such as "2.5" or "2/3"
//! neighbours = ["o", "b"]
//!
//! [[strategy]]           # optional; agents not listed are truthful
//! id = "b"
//! reported_valuation = 5 # defaults to the true valuation
//! invited = []           # defaults to every neighbour
//! # absent = true        # the agent does not take part at all
//! ```
//!
//! Neighbour lists are undirected declarations and are symmetrized on load.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Deserialize;
use thiserror::Error;

use crate::error::Error;
use crate::mechanisms::Outcome;
use crate::money::Money;
use crate::network::{AgentId, Report, SocialNetwork, StrategyProfile};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("agent `{0}` is declared more than once")]
    DuplicateId(String),
    #[error("agent `{agent}` references unknown agent `{reference}`")]
    UnknownId { agent: String, reference: String },
    #[error("agent `{agent}` has a negative {field}")]
    NegativeValuation { agent: String, field: &'static str },
    #[error("agent `{agent}` invites `{invited}`, who is not her neighbour")]
    InvitedNotNeighbour { agent: String, invited: String },
    #[error("agent `{agent}` lists `{neighbour}` more than once")]
    DuplicateNeighbour { agent: String, neighbour: String },
    #[error("agent `{0}` lists herself as a neighbour")]
    SelfLoop(String),
    #[error("agent `{0}` is not connected to the owner")]
    Disconnected(String),
    #[error("owner `{0}` is also declared as an agent")]
    OwnerDeclared(String),
    #[error("agent `{agent}`: `{field}` is not a valid amount: {value}")]
    BadMoney { agent: String, field: &'static str, value: String },
    #[error("strategy for `{0}` is given more than once")]
    DuplicateStrategy(String),
    #[error("strategy for `{0}` is marked absent but also sets a report")]
    AbsentWithReport(String),
    #[error("no agents declared")]
    NoAgents,
}

impl InstanceError {
    /// Stable diagnostic code, one per failure class.
    pub fn code(&self) -> &'static str {
        match self {
            InstanceError::Syntax { .. } => "E100",
            InstanceError::DuplicateId(_) => "E201",
            InstanceError::UnknownId { .. } => "E202",
            InstanceError::NegativeValuation { .. } => "E203",
            InstanceError::InvitedNotNeighbour { .. } => "E204",
            InstanceError::DuplicateNeighbour { .. } => "E205",
            InstanceError::SelfLoop(_) => "E206",
            InstanceError::Disconnected(_) => "E207",
            InstanceError::OwnerDeclared(_) => "E208",
            InstanceError::BadMoney { .. } => "E209",
            InstanceError::DuplicateStrategy(_) => "E210",
            InstanceError::AbsentWithReport(_) => "E211",
            InstanceError::NoAgents => "E212",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    owner: String,
    #[serde(default)]
    agents: Vec<RawAgent>,
    #[serde(default)]
    strategy: Vec<RawStrategy>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    id: String,
    valuation: RawMoney,
    #[serde(default)]
    neighbours: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    id: String,
    reported_valuation: Option<RawMoney>,
    invited: Option<Vec<String>>,
    #[serde(default)]
    absent: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawMoney {
    Int(i64),
    Float(f64),
    Text(String),
}

impl RawMoney {
    fn resolve(&self, agent: &str, field: &'static str) -> Result<Money, InstanceError> {
        let text = match self {
            RawMoney::Int(i) => return Ok(Money::from_int(*i)),
            // Shortest round-trip rendering, then exact decimal parsing.
            RawMoney::Float(f) if f.is_finite() => f.to_string(),
            RawMoney::Float(f) => f.to_string(),
            RawMoney::Text(s) => s.clone(),
        };
        text.parse().map_err(|_| InstanceError::BadMoney { agent: agent.to_string(), field, value: text })
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text.as_bytes()[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = before.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
    (line, column)
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<(SocialNetwork, StrategyProfile), InstanceError> {
    let raw: RawInstance = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_column(text, s.start)).unwrap_or((0, 0));
        InstanceError::Syntax { line, column, message: e.message().to_string() }
    })?;
    if raw.agents.is_empty() {
        return Err(InstanceError::NoAgents);
    }
    let owner = raw.owner.clone();

    let mut valuations: BTreeMap<AgentId, Money> = BTreeMap::new();
    for a in &raw.agents {
        if a.id == owner {
            return Err(InstanceError::OwnerDeclared(owner));
        }
        let v = a.valuation.resolve(&a.id, "valuation")?;
        if v.is_negative() {
            return Err(InstanceError::NegativeValuation { agent: a.id.clone(), field: "valuation" });
        }
        if valuations.insert(AgentId::new(a.id.clone()), v).is_some() {
            return Err(InstanceError::DuplicateId(a.id.clone()));
        }
    }
    let known = |s: &str| s == owner || valuations.contains_key(&AgentId::from(s));

    let mut edges = Vec::new();
    for a in &raw.agents {
        let mut seen = BTreeSet::new();
        for nb in &a.neighbours {
            if *nb == a.id {
                return Err(InstanceError::SelfLoop(a.id.clone()));
            }
            if !known(nb) {
                return Err(InstanceError::UnknownId { agent: a.id.clone(), reference: nb.clone() });
            }
            if !seen.insert(nb.as_str()) {
                return Err(InstanceError::DuplicateNeighbour { agent: a.id.clone(), neighbour: nb.clone() });
            }
            edges.push((AgentId::new(a.id.clone()), AgentId::new(nb.clone())));
        }
    }
    let network = SocialNetwork::new(AgentId::new(owner.clone()), valuations, edges).map_err(|e| match e {
        Error::MalformedInput(_) => {
            let lost = first_disconnected(&raw, &owner);
            InstanceError::Disconnected(lost)
        }
        other => InstanceError::Syntax { line: 0, column: 0, message: other.to_string() },
    })?;

    let mut profile = StrategyProfile::truthful(&network);
    let mut seen = BTreeSet::new();
    for s in &raw.strategy {
        let id = AgentId::new(s.id.clone());
        if !network.contains(&id) {
            return Err(InstanceError::UnknownId { agent: s.id.clone(), reference: s.id.clone() });
        }
        if !seen.insert(s.id.as_str()) {
            return Err(InstanceError::DuplicateStrategy(s.id.clone()));
        }
        if s.absent {
            if s.reported_valuation.is_some() || s.invited.is_some() {
                return Err(InstanceError::AbsentWithReport(s.id.clone()));
            }
            profile.remove(&id);
            continue;
        }
        let valuation = match &s.reported_valuation {
            Some(raw) => raw.resolve(&s.id, "reported_valuation")?,
            None => network.valuation(&id).expect("known").clone(),
        };
        if valuation.is_negative() {
            return Err(InstanceError::NegativeValuation { agent: s.id.clone(), field: "reported_valuation" });
        }
        let nbrs = network.neighbours(&id);
        let invited = match &s.invited {
            Some(list) => {
                let mut set = BTreeSet::new();
                for v in list {
                    let v = AgentId::new(v.clone());
                    if !nbrs.contains(&v) {
                        return Err(InstanceError::InvitedNotNeighbour { agent: s.id.clone(), invited: v.to_string() });
                    }
                    if !set.insert(v.clone()) {
                        return Err(InstanceError::DuplicateNeighbour { agent: s.id.clone(), neighbour: v.to_string() });
                    }
                }
                set
            }
            None => nbrs.clone(),
        };
        profile.set(id, Report { valuation, invited });
    }
    Ok((network, profile))
}

/// Smallest agent id not reachable from the owner in the raw declaration.
fn first_disconnected(raw: &RawInstance, owner: &str) -> String {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for a in &raw.agents {
        for nb in &a.neighbours {
            adj.entry(a.id.as_str()).or_default().push(nb.as_str());
            adj.entry(nb.as_str()).or_default().push(a.id.as_str());
        }
    }
    let mut seen: BTreeSet<&str> = BTreeSet::from([owner]);
    let mut stack = vec![owner];
    while let Some(u) = stack.pop() {
        for &v in adj.get(u).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    raw.agents.iter().map(|a| a.id.as_str()).filter(|id| !seen.contains(id)).min().unwrap_or("?").to_string()
}

fn toml_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn toml_money(m: &Money) -> String {
    if m.denom() == &num_bigint::BigInt::from(1) {
        m.to_string()
    } else {
        toml_str(&m.to_string())
    }
}

fn toml_list<'a>(items: impl IntoIterator<Item = &'a AgentId>) -> String {
    let parts: Vec<String> = items.into_iter().map(|i| toml_str(i.as_str())).collect();
    format!("[{}]", parts.join(", "))
}

/// Writes an instance document that [`parse_instance`] reads back to the
/// same network and profile. Only non-truthful strategies are listed.
pub fn format_instance(network: &SocialNetwork, profile: &StrategyProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "owner = {}", toml_str(network.owner().as_str()));
    for (id, spec) in network.agents() {
        let _ = writeln!(out, "\n[[agents]]");
        let _ = writeln!(out, "id = {}", toml_str(id.as_str()));
        let _ = writeln!(out, "valuation = {}", toml_money(&spec.valuation));
        let _ = writeln!(out, "neighbours = {}", toml_list(&spec.neighbours));
    }
    for (id, spec) in network.agents() {
        match profile.get(id) {
            None => {
                let _ = writeln!(out, "\n[[strategy]]\nid = {}\nabsent = true", toml_str(id.as_str()));
            }
            Some(r) if r.valuation == spec.valuation && r.invited == spec.neighbours => {}
            Some(r) => {
                let _ = writeln!(out, "\n[[strategy]]\nid = {}", toml_str(id.as_str()));
                if r.valuation != spec.valuation {
                    let _ = writeln!(out, "reported_valuation = {}", toml_money(&r.valuation));
                }
                if r.invited != spec.neighbours {
                    let _ = writeln!(out, "invited = {}", toml_list(&r.invited));
                }
            }
        }
    }
    out
}

/// Stable text rendering of an outcome; with `trace`, every redistribution
/// step is listed.
pub fn format_outcome(outcome: &Outcome, trace: bool) -> String {
    let mut out = String::new();
    match &outcome.winner {
        Some(w) => {
            let _ = writeln!(out, "winner: {w}");
        }
        None => out.push_str("winner: none (no winner)\n"),
    }
    out.push_str("payments:\n");
    for (id, p) in &outcome.payments {
        let _ = writeln!(out, "  {id} = {p}");
    }
    let _ = writeln!(out, "surplus: {}", outcome.surplus);
    let _ = writeln!(out, "social_welfare: {}", outcome.social_welfare);
    if trace && !outcome.trace.is_empty() {
        out.push_str("trace:\n");
        for (j, step) in outcome.trace.iter().enumerate() {
            let _ = writeln!(
                out,
                "  step {}: ancestor {}, p_auc = {} (previous {}){}",
                j + 1,
                step.ancestor,
                step.required_payment,
                step.prev_required_payment,
                if step.allocated_here { ", allocated" } else { "" }
            );
            let block: Vec<&str> = step.block.iter().map(AgentId::as_str).collect();
            let _ = writeln!(out, "    block: {}", block.join(", "));
            for k in &step.block {
                let _ = writeln!(
                    out,
                    "    R_{k} = {}  (n_{k} = {}, S_-{k} = {})",
                    step.rebate(k),
                    step.block_sizes[k],
                    step.counterfactual_surplus[k]
                );
            }
            let _ = writeln!(out, "    step surplus = {}", step.step_surplus);
        }
    }
    out
}
