//! Redistribution mechanisms for allocating one item over a social network
//! whose participants are recruited by invitation.
//!
//! The crate builds the graph generated by reported invitations
//! ([`graph::build_generated_graph`]), runs the networked Cavallo baseline and
//! the network-based redistribution mechanism ([`mechanisms`]), and audits
//! individual rationality, incentive compatibility, non-deficit and budget
//! balance by exhaustive or sampled deviation search ([`audit`]). Seeded
//! instance generators and sweeps live in [`genlab`].

pub mod audit;
pub mod dominators;
pub mod error;
pub mod fixtures;
pub mod genlab;
pub mod graph;
pub mod instance;
pub mod mechanisms;
pub mod money;
pub mod network;

pub use error::{Error, Result};
pub use graph::{build_generated_graph, DominationView, GeneratedGraph};
pub use mechanisms::{Mechanism, Outcome, StepRecord};
pub use money::Money;
pub use network::{AgentId, Report, SocialNetwork, StrategyProfile};
