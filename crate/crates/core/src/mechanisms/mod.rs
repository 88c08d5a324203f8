//! Allocation-and-payment mechanisms over a generated graph.

mod cavallo;
mod nrm;
mod outcome;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cavallo::{run_cavallo, run_cavallo_neighbours};
pub use nrm::{counterfactual_block_surplus, nrm_step, run_nrm, step_block};
pub use outcome::{Outcome, StepRecord};

use crate::error::{Error, Result};
use crate::graph::GeneratedGraph;

/// Full-information benchmark: the highest reported valuation.
pub fn efficient_social_welfare(g: &GeneratedGraph) -> Result<crate::money::Money> {
    g.top_bidder_index()
        .map(|v| g.value(v).clone())
        .ok_or(Error::EmptyInstance("no bidders in the generated graph"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    Nrm,
    Cavallo,
    CavalloNeighbours,
}

impl Mechanism {
    pub const ALL: [Mechanism; 3] = [Mechanism::Nrm, Mechanism::Cavallo, Mechanism::CavalloNeighbours];

    /// Evaluates on `g`. The neighbours-only baseline looks at the owner's
    /// child neighbours in `g` and ignores everyone further out.
    pub fn run(self, g: &GeneratedGraph) -> Result<Outcome> {
        match self {
            Mechanism::Nrm => run_nrm(g),
            Mechanism::Cavallo => run_cavallo(g),
            Mechanism::CavalloNeighbours => run_cavallo(&g.neighbour_restriction()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Nrm => "nrm",
            Mechanism::Cavallo => "cavallo",
            Mechanism::CavalloNeighbours => "cavallo-neighbours",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mechanism::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mechanism `{s}` (expected nrm, cavallo or cavallo-neighbours)")))
    }
}
