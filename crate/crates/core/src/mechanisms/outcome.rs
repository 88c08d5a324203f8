use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::money::Money;
use crate::network::AgentId;

/// Result of one mechanism evaluation.
///
/// `payments` has an entry for every bidder of the evaluated graph; positive
/// values are paid to the owner, negative values are received from her.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub winner: Option<AgentId>,
    pub payments: BTreeMap<AgentId, Money>,
    pub surplus: Money,
    pub social_welfare: Money,
    pub trace: Vec<StepRecord>,
}

impl Outcome {
    pub fn payment(&self, agent: &AgentId) -> Money {
        self.payments.get(agent).cloned().unwrap_or_default()
    }

    pub fn payment_sum(&self) -> Money {
        self.payments.values().sum()
    }
}

/// One pass of the redistribution loop: ancestor `a_j` of the highest bidder
/// together with the sibling block sharing the payment increment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub ancestor: AgentId,
    pub required_payment: Money,
    pub prev_required_payment: Money,
    pub block: BTreeSet<AgentId>,
    pub block_sizes: BTreeMap<AgentId, usize>,
    pub counterfactual_surplus: BTreeMap<AgentId, Money>,
    pub rebates: BTreeMap<AgentId, Money>,
    pub step_surplus: Money,
    pub allocated_here: bool,
}

impl StepRecord {
    pub fn rebate(&self, agent: &AgentId) -> Money {
        self.rebates.get(agent).cloned().unwrap_or_default()
    }

    pub fn rebate_total(&self) -> Money {
        self.rebates.values().sum()
    }
}
