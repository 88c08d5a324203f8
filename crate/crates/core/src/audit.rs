//! Executable checks of individual rationality, incentive compatibility,
//! non-deficit, efficiency and budget balance.
//!
//! IC and IR are checked by unilateral deviation search: one agent changes
//! her report, everyone else keeps the base profile, and the generated graph
//! is rebuilt so that agents no longer reached drop out. Single-item outcomes
//! only change when the bid order changes, so valuations are probed at every
//! distinct reported value, every midpoint between consecutive values, zero,
//! and one above the maximum.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genlab::mix64;
use crate::graph::build_generated_graph;
use crate::mechanisms::{efficient_social_welfare, run_cavallo_neighbours, run_nrm, Mechanism, Outcome};
use crate::money::Money;
use crate::network::{AgentId, Report, SocialNetwork, StrategyProfile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditConfig {
    /// Agents with at most this many neighbours get every invitation subset.
    pub degree_cap: usize,
    /// Random subsets drawn for agents above the cap.
    pub samples: usize,
    pub seed: u64,
    /// Additional valuation probes on top of the order-statistic grid.
    pub extra_valuations: Vec<Money>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { degree_cap: 8, samples: 512, seed: 0, extra_valuations: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub agent: AgentId,
    pub reported_valuation: Money,
    pub invited: BTreeSet<AgentId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IcViolation {
    pub deviation: Deviation,
    pub truthful_utility: Money,
    pub deviant_utility: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IcAudit {
    pub violations: Vec<IcViolation>,
    /// Agents whose invitation subsets were sampled rather than enumerated.
    pub sampled_agents: Vec<AgentId>,
    pub deviations_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IrWitness {
    pub agent: AgentId,
    pub invited: BTreeSet<AgentId>,
    pub utility: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IrVerdict {
    pub holds: bool,
    pub witness: Option<IrWitness>,
    pub sampled_agents: Vec<AgentId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EfficiencyRecord {
    pub mechanism_sw: Money,
    pub neighbour_baseline_sw: Money,
    pub optimal_sw: Money,
}

impl EfficiencyRecord {
    pub fn beats_baseline(&self) -> bool {
        self.mechanism_sw >= self.neighbour_baseline_sw
    }

    /// Mechanism welfare over the optimum; 1 when the optimum is 0.
    pub fn ratio(&self) -> Money {
        if self.optimal_sw.is_zero() {
            Money::from_int(1)
        } else {
            &self.mechanism_sw / &self.optimal_sw
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub mechanism: Mechanism,
    pub ir: IrVerdict,
    pub nd_holds: bool,
    pub ic: IcAudit,
    pub efficiency: EfficiencyRecord,
    pub budget_ratio: Money,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.ir.holds && self.nd_holds && self.ic.violations.is_empty()
    }
}

/// `π_i v_i − p_i`; agents absent from the outcome get 0.
pub fn agent_utility(outcome: &Outcome, agent: &AgentId, true_valuation: &Money) -> Money {
    let won = if outcome.winner.as_ref() == Some(agent) { true_valuation.clone() } else { Money::zero() };
    won - outcome.payment(agent)
}

pub fn check_non_deficit(outcome: &Outcome) -> bool {
    !outcome.surplus.is_negative()
}

/// Surplus over social welfare, 0 when welfare is 0.
pub fn budget_ratio(surplus: &Money, social_welfare: &Money) -> Money {
    if social_welfare.is_zero() {
        Money::zero()
    } else {
        surplus / social_welfare
    }
}

/// Evaluates `mechanism` under `profile`; `None` when nobody takes part.
fn evaluate(network: &SocialNetwork, profile: &StrategyProfile, mechanism: Mechanism) -> Result<Option<Outcome>> {
    let g = build_generated_graph(network, profile)?;
    if g.bidder_count() == 0 {
        return Ok(None);
    }
    mechanism.run(&g).map(Some)
}

fn utility_under(
    network: &SocialNetwork,
    profile: &StrategyProfile,
    mechanism: Mechanism,
    agent: &AgentId,
    true_valuation: &Money,
) -> Result<(bool, Money)> {
    let g = build_generated_graph(network, profile)?;
    if !g.contains(agent) {
        return Ok((false, Money::zero()));
    }
    let outcome = mechanism.run(&g)?;
    Ok((true, agent_utility(&outcome, agent, true_valuation)))
}

/// Invitation subsets to try for `agent`, and whether they are exhaustive.
///
/// Only bidder neighbours vary; an invitation to the owner changes nothing
/// and is kept whenever the owner is a neighbour, so the truthful report is
/// one of the subsets.
fn invitation_subsets(network: &SocialNetwork, agent: &AgentId, config: &AuditConfig) -> (Vec<BTreeSet<AgentId>>, bool) {
    let all = network.neighbours(agent);
    let owner = network.owner();
    let nbrs: Vec<&AgentId> = all.iter().filter(|v| *v != owner).collect();
    let base: BTreeSet<AgentId> = all.iter().filter(|v| *v == owner).cloned().collect();
    let with = |picked: &mut dyn Iterator<Item = &AgentId>| -> BTreeSet<AgentId> {
        let mut set = base.clone();
        set.extend(picked.cloned());
        set
    };
    if nbrs.len() <= config.degree_cap && nbrs.len() < 63 {
        let subsets = (0..1u64 << nbrs.len())
            .map(|mask| with(&mut nbrs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v)))
            .collect();
        return (subsets, true);
    }
    let agent_salt = agent.as_str().bytes().fold(0u64, |h, b| mix64(h ^ b as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(config.seed ^ agent_salt));
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(config.samples);
    for _ in 0..config.samples {
        let set = with(&mut nbrs.iter().filter(|_| rng.random_bool(0.5)).copied());
        if seen.insert(set.clone()) {
            out.push(set);
        }
    }
    (out, false)
}

/// Valuation probes: 0, every distinct true or reported valuation, midpoints
/// between consecutive distinct values, maximum + 1, and configured extras.
pub fn valuation_grid(network: &SocialNetwork, base: &StrategyProfile, config: &AuditConfig) -> Vec<Money> {
    let mut values: BTreeSet<Money> = BTreeSet::new();
    values.insert(Money::zero());
    values.extend(network.agents().values().map(|a| a.valuation.clone()));
    values.extend(base.reports().values().map(|r| r.valuation.clone()));
    let sorted: Vec<Money> = values.iter().cloned().collect();
    for w in sorted.windows(2) {
        values.insert((&w[0] + &w[1]) / Money::from_int(2));
    }
    let max = sorted.last().cloned().unwrap_or_default();
    values.insert(max + Money::from_int(1));
    values.extend(config.extra_valuations.iter().filter(|v| !v.is_negative()).cloned());
    values.into_iter().collect()
}

fn truthful_report(network: &SocialNetwork, agent: &AgentId) -> Report {
    Report {
        valuation: network.valuation(agent).cloned().unwrap_or_default(),
        invited: network.neighbours(agent).clone(),
    }
}

/// IR: with a truthful valuation and any invitation subset (others
/// truthful), no participating agent ends up with negative utility.
pub fn check_ir(network: &SocialNetwork, mechanism: Mechanism, config: &AuditConfig) -> Result<IrVerdict> {
    let base = StrategyProfile::truthful(network);
    let agents: Vec<&AgentId> = network.agents().keys().collect();
    let per_agent: Vec<Result<(Option<IrWitness>, bool)>> = agents
        .par_iter()
        .map(|&agent| {
            let v = network.valuation(agent).cloned().unwrap_or_default();
            let (subsets, exhaustive) = invitation_subsets(network, agent, config);
            for invited in subsets {
                let profile = base.clone().with(agent.clone(), Report { valuation: v.clone(), invited: invited.clone() });
                let (present, u) = utility_under(network, &profile, mechanism, agent, &v)?;
                if present && u.is_negative() {
                    return Ok((Some(IrWitness { agent: agent.clone(), invited, utility: u }), exhaustive));
                }
            }
            Ok((None, exhaustive))
        })
        .collect();
    let mut witness = None;
    let mut sampled_agents = Vec::new();
    for (agent, r) in agents.iter().zip(per_agent) {
        let (w, exhaustive) = r?;
        if !exhaustive {
            sampled_agents.push((*agent).clone());
        }
        if witness.is_none() {
            witness = w;
        }
    }
    Ok(IrVerdict { holds: witness.is_none(), witness, sampled_agents })
}

/// Unilateral deviation search from the all-truthful profile.
pub fn audit_ic(network: &SocialNetwork, mechanism: Mechanism, config: &AuditConfig) -> Result<IcAudit> {
    audit_ic_from(network, &StrategyProfile::truthful(network), mechanism, config)
}

/// Unilateral deviation search from `base`: for each agent, compare her
/// utility when truthful (others as in `base`) against every probed
/// deviation. Violations are ordered by agent, then valuation, then subset.
pub fn audit_ic_from(
    network: &SocialNetwork,
    base: &StrategyProfile,
    mechanism: Mechanism,
    config: &AuditConfig,
) -> Result<IcAudit> {
    base.validate(network)?;
    let grid = valuation_grid(network, base, config);
    let agents: Vec<&AgentId> = network.agents().keys().collect();
    let per_agent: Vec<Result<(Vec<IcViolation>, bool, usize)>> = agents
        .par_iter()
        .map(|&agent| {
            let truthful = truthful_report(network, agent);
            let v = truthful.valuation.clone();
            let honest = base.clone().with(agent.clone(), truthful.clone());
            let (present, u0) = utility_under(network, &honest, mechanism, agent, &v)?;
            let (subsets, exhaustive) = invitation_subsets(network, agent, config);
            if !present {
                // Nobody invites her; her report is never read.
                return Ok((Vec::new(), exhaustive, 0));
            }
            let mut found = Vec::new();
            let mut checked = 0;
            for val in &grid {
                for invited in &subsets {
                    if *val == truthful.valuation && *invited == truthful.invited {
                        continue;
                    }
                    checked += 1;
                    let report = Report { valuation: val.clone(), invited: invited.clone() };
                    let profile = base.clone().with(agent.clone(), report);
                    let (_, u) = utility_under(network, &profile, mechanism, agent, &v)?;
                    if u > u0 {
                        found.push(IcViolation {
                            deviation: Deviation {
                                agent: agent.clone(),
                                reported_valuation: val.clone(),
                                invited: invited.clone(),
                            },
                            truthful_utility: u0.clone(),
                            deviant_utility: u,
                        });
                    }
                }
            }
            Ok((found, exhaustive, checked))
        })
        .collect();
    let mut audit = IcAudit { violations: Vec::new(), sampled_agents: Vec::new(), deviations_checked: 0 };
    for (agent, r) in agents.iter().zip(per_agent) {
        let (found, exhaustive, checked) = r?;
        audit.violations.extend(found);
        audit.deviations_checked += checked;
        if !exhaustive {
            audit.sampled_agents.push((*agent).clone());
        }
    }
    Ok(audit)
}

/// Re-evaluates a reported violation from scratch; true if the deviation
/// still strictly improves the agent's utility over `base`.
pub fn recheck_violation(
    network: &SocialNetwork,
    base: &StrategyProfile,
    mechanism: Mechanism,
    violation: &IcViolation,
) -> Result<bool> {
    let agent = &violation.deviation.agent;
    let truthful = truthful_report(network, agent);
    let v = truthful.valuation.clone();
    let (_, honest) = utility_under(network, &base.clone().with(agent.clone(), truthful), mechanism, agent, &v)?;
    let deviant = base.clone().with(
        agent.clone(),
        Report { valuation: violation.deviation.reported_valuation.clone(), invited: violation.deviation.invited.clone() },
    );
    let (_, dev) = utility_under(network, &deviant, mechanism, agent, &v)?;
    Ok(dev > honest)
}

/// NRM welfare against the neighbours-only Cavallo baseline and the
/// full-information optimum, all under truthful reports.
pub fn efficiency_report(network: &SocialNetwork) -> Result<EfficiencyRecord> {
    let g = build_generated_graph(network, &StrategyProfile::truthful(network))?;
    Ok(EfficiencyRecord {
        mechanism_sw: run_nrm(&g)?.social_welfare,
        neighbour_baseline_sw: run_cavallo_neighbours(network)?.social_welfare,
        optimal_sw: efficient_social_welfare(&g)?,
    })
}

/// All checks for one mechanism on one network, with IC searched from
/// `base` (normally the truthful profile).
pub fn audit(
    network: &SocialNetwork,
    base: &StrategyProfile,
    mechanism: Mechanism,
    config: &AuditConfig,
) -> Result<AuditReport> {
    let outcome = evaluate(network, base, mechanism)?.ok_or(Error::EmptyInstance("no bidders in the generated graph"))?;
    let g = build_generated_graph(network, base)?;
    let efficiency = EfficiencyRecord {
        mechanism_sw: outcome.social_welfare.clone(),
        neighbour_baseline_sw: Mechanism::CavalloNeighbours.run(&g)?.social_welfare,
        optimal_sw: efficient_social_welfare(&g)?,
    };
    Ok(AuditReport {
        mechanism,
        ir: check_ir(network, mechanism, config)?,
        nd_holds: check_non_deficit(&outcome),
        ic: audit_ic_from(network, base, mechanism, config)?,
        budget_ratio: budget_ratio(&outcome.surplus, &outcome.social_welfare),
        efficiency,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetBucket {
    pub n: usize,
    pub records: usize,
    pub mean_ratio: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetTrend {
    pub buckets: Vec<BudgetBucket>,
}

impl BudgetTrend {
    pub fn strictly_decreasing(&self) -> bool {
        self.buckets.windows(2).all(|w| w[1].mean_ratio < w[0].mean_ratio)
    }

    pub fn final_ratio(&self) -> &Money {
        &self.buckets.last().expect("at least two buckets").mean_ratio
    }
}

/// Mean surplus/welfare ratio per participant count, ascending in `n`.
pub fn measure_budget_balance(records: &[(usize, Money, Money)]) -> Result<BudgetTrend> {
    let mut by_n: BTreeMap<usize, (usize, Money)> = BTreeMap::new();
    for (n, surplus, sw) in records {
        let entry = by_n.entry(*n).or_insert((0, Money::zero()));
        entry.0 += 1;
        entry.1 += budget_ratio(surplus, sw);
    }
    if by_n.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 size buckets, got {}", by_n.len())));
    }
    let buckets = by_n
        .into_iter()
        .map(|(n, (count, total))| BudgetBucket { n, records: count, mean_ratio: total / Money::from_usize(count) })
        .collect();
    Ok(BudgetTrend { buckets })
}
