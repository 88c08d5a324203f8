//! Seeded instance generation and sweep experiments.
//!
//! All generators are pure functions of their parameters and seed. Sweeps
//! derive one sub-seed per `(n, trial)` with a fixed mixing function, so the
//! draws do not depend on how trials are scheduled across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::build_generated_graph;
use crate::mechanisms::{efficient_social_welfare, Mechanism};
use crate::money::{Money, MILLI};
use crate::network::{AgentId, SocialNetwork, StrategyProfile};

/// Owner id used by every generated network.
pub const OWNER_ID: &str = "o";

const EXTRA_EDGE_STREAM: u64 = 0x5bd1_e995_0000_0001;
const VALUATION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for trial `trial` at size `n`.
pub fn sub_seed(seed: u64, n: usize, trial: usize) -> u64 {
    mix64(mix64(seed ^ mix64(n as u64)) ^ (trial as u64).wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Agent ids `v1..vn`, zero-padded so string order matches numeric order.
pub fn agent_ids(n: usize) -> Vec<AgentId> {
    let width = n.to_string().len();
    (1..=n).map(|i| AgentId::new(format!("v{i:0width$}"))).collect()
}

fn tree_edges(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Node 0 is the owner; node i attaches to a uniform earlier node.
    (1..=n).map(|i| (rng.random_range(0..i), i)).collect()
}

fn assemble(n: usize, edges: &[(usize, usize)]) -> Result<SocialNetwork> {
    let ids = agent_ids(n);
    let owner = AgentId::new(OWNER_ID);
    let name = |v: usize| if v == 0 { owner.clone() } else { ids[v - 1].clone() };
    let valuations: BTreeMap<AgentId, Money> = ids.iter().map(|id| (id.clone(), Money::zero())).collect();
    SocialNetwork::new(owner.clone(), valuations, edges.iter().map(|&(u, v)| (name(u), name(v))))
}

/// Random-attachment tree with `n` bidders rooted at the owner; all
/// valuations are zero until [`sample_valuations`] is applied.
pub fn gen_tree(n: usize, seed: u64) -> Result<SocialNetwork> {
    if n == 0 {
        return Err(Error::EmptyInstance("generator needs at least one bidder"));
    }
    assemble(n, &tree_edges(n, seed))
}

/// [`gen_tree`] plus `floor(factor * n)` uniformly drawn extra undirected
/// edges over owner and bidders; self-loops and duplicates are dropped.
pub fn gen_graph(n: usize, extra_edge_factor: &Money, seed: u64) -> Result<SocialNetwork> {
    if n == 0 {
        return Err(Error::EmptyInstance("generator needs at least one bidder"));
    }
    if extra_edge_factor.is_negative() {
        return Err(Error::Config(format!("extra edge factor must be non-negative, got {extra_edge_factor}")));
    }
    let mut edges = tree_edges(n, seed);
    let mut present: BTreeSet<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let extra = (extra_edge_factor * &Money::from_usize(n))
        .floor_to_usize()
        .ok_or_else(|| Error::Config("extra edge count overflows".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ EXTRA_EDGE_STREAM);
    for _ in 0..extra {
        let u = rng.random_range(0..=n);
        let v = rng.random_range(0..=n);
        let key = (u.min(v), u.max(v));
        if u != v && present.insert(key) {
            edges.push(key);
        }
    }
    assemble(n, &edges)
}

/// Distribution of independent valuation draws.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ValuationLaw {
    Uniform { lo: Money, hi: Money },
    Exponential { mean: Money },
}

impl ValuationLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            ValuationLaw::Uniform { lo, hi } => {
                if lo.is_negative() || hi < lo {
                    return Err(Error::Config(format!("uniform law needs 0 <= lo <= hi, got ({lo}, {hi})")));
                }
                let lo_m = ceil_milli(lo);
                if lo_m > hi.floor_milli() {
                    return Err(Error::Config(format!("uniform({lo}, {hi}) contains no 1/1000 grid point")));
                }
            }
            ValuationLaw::Exponential { mean } => {
                if mean <= &Money::zero() {
                    return Err(Error::Config(format!("exponential mean must be positive, got {mean}")));
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Money {
        match self {
            ValuationLaw::Uniform { lo, hi } => {
                let lo_m = ceil_milli(lo).to_milli().expect("on grid");
                let hi_m = hi.floor_milli().to_milli().expect("on grid");
                Money::from_milli(rng.random_range(lo_m..=hi_m))
            }
            ValuationLaw::Exponential { mean } => {
                let unit: f64 = rng.sample(Exp1);
                let milli = (unit * mean.to_f64() * MILLI as f64).round();
                Money::from_milli(milli.clamp(0.0, i64::MAX as f64 / 2.0) as i64)
            }
        }
    }
}

fn ceil_milli(m: &Money) -> Money {
    let floor = m.floor_milli();
    if &floor == m {
        floor
    } else {
        floor + Money::from_milli(1)
    }
}

impl fmt::Display for ValuationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationLaw::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            ValuationLaw::Exponential { mean } => write!(f, "exponential:{mean}"),
        }
    }
}

impl FromStr for ValuationLaw {
    type Err = Error;

    /// `uniform:LO:HI` or `exponential:MEAN`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid valuation law `{s}` (expected uniform:LO:HI or exponential:MEAN)"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let money = |t: &str| t.parse::<Money>().map_err(|_| bad());
        let law = match parts.as_slice() {
            ["uniform", lo, hi] => ValuationLaw::Uniform { lo: money(lo)?, hi: money(hi)? },
            ["exponential", mean] => ValuationLaw::Exponential { mean: money(mean)? },
            _ => return Err(bad()),
        };
        law.validate()?;
        Ok(law)
    }
}

/// Redraws every agent's valuation independently, quantized to 1/1000.
pub fn sample_valuations(network: &SocialNetwork, law: &ValuationLaw, seed: u64) -> Result<SocialNetwork> {
    law.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: BTreeMap<AgentId, Money> = network.agents().keys().map(|id| (id.clone(), law.draw(&mut rng))).collect();
    network.with_valuations(&draws)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Tree,
    ConnectedGraph,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(Family::Tree),
            "graph" | "connected-graph" => Ok(Family::ConnectedGraph),
            _ => Err(Error::Config(format!("unknown family `{s}` (expected tree or graph)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub extra_edge_factor: Money,
    pub law: ValuationLaw,
    pub trials_per_size: usize,
    pub seed: u64,
    pub mechanisms: Vec<Mechanism>,
    /// Record wall-clock runtimes. Off by default so that repeated sweeps
    /// produce identical records.
    pub record_runtime: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("sweep needs at least one size".into()));
        }
        if self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sizes must be positive and strictly increasing".into()));
        }
        if self.trials_per_size == 0 {
            return Err(Error::Config("trials per size must be at least 1".into()));
        }
        if self.mechanisms.is_empty() {
            return Err(Error::Config("select at least one mechanism".into()));
        }
        if self.extra_edge_factor.is_negative() {
            return Err(Error::Config("extra edge factor must be non-negative".into()));
        }
        self.law.validate()
    }

    /// Instance for `(n, trial)`, fully determined by the config.
    pub fn instance(&self, n: usize, trial: usize) -> Result<SocialNetwork> {
        let sub = sub_seed(self.seed, n, trial);
        let net = match self.family {
            Family::Tree => gen_tree(n, sub)?,
            Family::ConnectedGraph => gen_graph(n, &self.extra_edge_factor, sub)?,
        };
        sample_valuations(&net, &self.law, sub ^ VALUATION_STREAM)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    pub trial: usize,
    pub mechanism: Mechanism,
    pub surplus: Money,
    pub social_welfare: Money,
    pub optimal_welfare: Money,
    pub winner_depth: Option<usize>,
    #[serde(skip)]
    pub runtime: Option<Duration>,
}

fn run_trial(config: &SweepConfig, n: usize, trial: usize) -> Result<Vec<SweepRecord>> {
    let net = config.instance(n, trial)?;
    let g = build_generated_graph(&net, &StrategyProfile::truthful(&net))?;
    let optimal = efficient_social_welfare(&g)?;
    let mut mechanisms = config.mechanisms.clone();
    mechanisms.sort();
    mechanisms.dedup();
    mechanisms
        .into_iter()
        .map(|mechanism| {
            let started = Instant::now();
            let outcome = mechanism.run(&g)?;
            let elapsed = started.elapsed();
            let winner_depth = match &outcome.winner {
                Some(w) => Some(g.depth(w)?),
                None => None,
            };
            Ok(SweepRecord {
                n,
                trial,
                mechanism,
                surplus: outcome.surplus,
                social_welfare: outcome.social_welfare,
                optimal_welfare: optimal.clone(),
                winner_depth,
                runtime: config.record_runtime.then_some(elapsed),
            })
        })
        .collect()
}

/// Runs every `(n, trial, mechanism)` combination on the truthful generated
/// graph. Records come back ordered by `(n, trial, mechanism)`.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let tasks: Vec<(usize, usize)> = config
        .sizes
        .iter()
        .flat_map(|&n| (0..config.trials_per_size).map(move |t| (n, t)))
        .collect();
    let results: Vec<Result<Vec<SweepRecord>>> = tasks
        .par_iter()
        .map(|&(n, trial)| {
            run_trial(config, n, trial).map_err(|e| Error::SweepRun {
                n,
                trial,
                sub_seed: sub_seed(config.seed, n, trial),
                source: Box::new(e),
            })
        })
        .collect();
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_shape() {
        let net = gen_tree(1, 0).unwrap();
        assert_eq!(net.len(), 1);
        assert_eq!(net.neighbours(net.owner()).len(), 1);
        assert_eq!(gen_tree(10, 7).unwrap(), gen_tree(10, 7).unwrap());
        assert!(matches!(gen_tree(0, 1), Err(Error::EmptyInstance(_))));
    }

    #[test]
    fn graph_with_zero_factor_is_the_tree() {
        assert_eq!(gen_graph(25, &Money::zero(), 11).unwrap(), gen_tree(25, 11).unwrap());
    }

    #[test]
    fn graph_edge_count() {
        let net = gen_graph(20, &Money::ratio(1, 2), 3).unwrap();
        let edges = net.undirected_edges().len();
        assert!((20..=30).contains(&edges), "{edges}");
    }

    #[test]
    fn degenerate_uniform() {
        let law: ValuationLaw = "uniform:5:5".parse().unwrap();
        let net = sample_valuations(&gen_tree(30, 1).unwrap(), &law, 9).unwrap();
        assert!(net.agents().values().all(|a| a.valuation == 5));
    }

    #[test]
    fn law_parsing() {
        assert!("uniform:0:100".parse::<ValuationLaw>().is_ok());
        assert!("exponential:2.5".parse::<ValuationLaw>().is_ok());
        for bad in ["uniform:5:1", "uniform:-1:3", "exponential:0", "normal:1:2", "uniform:1", "", "uniform:0.0001:0.0009"] {
            assert!(bad.parse::<ValuationLaw>().is_err(), "{bad}");
        }
    }

    #[test]
    fn exponential_draws_are_quantized() {
        let law: ValuationLaw = "exponential:10".parse().unwrap();
        let net = sample_valuations(&gen_tree(200, 4).unwrap(), &law, 4).unwrap();
        assert!(net.agents().values().all(|a| a.valuation.to_milli().is_some() && !a.valuation.is_negative()));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SweepConfig {
            family: Family::Tree,
            sizes: vec![10, 20],
            extra_edge_factor: Money::zero(),
            law: "uniform:0:100".parse().unwrap(),
            trials_per_size: 1,
            seed: 1,
            mechanisms: vec![Mechanism::Nrm],
            record_runtime: false,
        };
        cfg.validate().unwrap();
        cfg.sizes = vec![20, 10];
        assert!(cfg.validate().is_err());
        cfg.sizes = vec![10];
        cfg.trials_per_size = 0;
        assert!(cfg.validate().is_err());
    }
}
