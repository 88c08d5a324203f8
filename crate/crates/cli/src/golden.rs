//! Bundled fixtures with their expected values.

use anyhow::{Context, Result};
use redistnet::audit::{check_non_deficit, efficiency_report};
use redistnet::mechanisms::{run_cavallo, run_cavallo_neighbours, run_nrm, Outcome};
use redistnet::{build_generated_graph, fixtures, AgentId, Money, Report, StrategyProfile};

pub const NAMES: [&str; 6] = ["line", "cavallo-deficit", "cavallo-diffusion", "tree", "graph", "diffusion-example"];

pub struct Check {
    pub label: String,
    pub expected: String,
    pub actual: String,
}

impl Check {
    /// Money values compare numerically, so `3/5` matches `0.6`.
    pub fn passed(&self) -> bool {
        match (self.expected.parse::<Money>(), self.actual.parse::<Money>()) {
            (Ok(e), Ok(a)) => e == a,
            _ => self.expected == self.actual,
        }
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn eq(&mut self, label: impl Into<String>, expected: &str, actual: impl ToString) {
        self.0.push(Check { label: label.into(), expected: expected.to_string(), actual: actual.to_string() });
    }
}

fn id(s: &str) -> AgentId {
    AgentId::from(s)
}

fn winner(o: &Outcome) -> String {
    o.winner.as_ref().map_or_else(|| "none".to_string(), |w| w.to_string())
}

fn rebates(c: &mut Checks, o: &Outcome, step: usize, expected: &[(&str, &str)], surplus: &str) {
    let Some(s) = o.trace.get(step - 1) else {
        c.eq(format!("step {step} executed"), "true", "false");
        return;
    };
    for (k, r) in expected {
        c.eq(format!("step {step} R_{k}"), r, s.rebate(&id(k)));
    }
    c.eq(format!("step {step} surplus"), surplus, &s.step_surplus);
}

/// Runs the checks for one fixture.
pub fn run(name: &str) -> Result<Vec<Check>> {
    let (net, profile) = fixtures::by_name(name).with_context(|| format!("unknown golden fixture `{name}`"))?;
    let g = build_generated_graph(&net, &profile)?;
    let mut c = Checks(Vec::new());
    match name {
        "line" => {
            let o = run_nrm(&g)?;
            c.eq("nrm winner", "a", winner(&o));
            c.eq("nrm payment of a", "0", o.payment(&id("a")));
            c.eq("nrm surplus", "0", &o.surplus);
            let eff = efficiency_report(&net)?;
            c.eq("nrm welfare", "1", &eff.mechanism_sw);
            c.eq("optimal welfare", "10", &eff.optimal_sw);
            c.eq("efficiency ratio", "0.1", eff.ratio());
        }
        "cavallo-deficit" => {
            let o = run_cavallo(&g)?;
            c.eq("cavallo winner", "c", winner(&o));
            c.eq("cavallo payment of a", "-1", o.payment(&id("a")));
            c.eq("cavallo surplus", "-1", &o.surplus);
            c.eq("non-deficit", "false", check_non_deficit(&o));
        }
        "cavallo-diffusion" => {
            let o = run_cavallo(&g)?;
            c.eq("cavallo winner", "c", winner(&o));
            c.eq("cavallo payment of c", "3", o.payment(&id("c")) + Money::ratio(2, 5));
            for (k, r) in [("a", "3/5"), ("b", "2/5"), ("c", "2/5"), ("d", "3/5"), ("e", "3/5")] {
                let rebate = if k == "c" { Money::from_int(3) - o.payment(&id(k)) } else { -o.payment(&id(k)) };
                c.eq(format!("rebate of {k}"), r, rebate);
            }
            // a stops inviting d and c stops inviting e.
            let withhold = |p: StrategyProfile, k: &str| {
                let v = net.valuation(&id(k)).cloned().unwrap_or_default();
                p.with(id(k), Report { valuation: v, invited: Default::default() })
            };
            let reduced = withhold(withhold(profile.clone(), "a"), "c");
            let o2 = run_cavallo(&build_generated_graph(&net, &reduced)?)?;
            c.eq("withheld: rebate of a", "1", -o2.payment(&id("a")));
            c.eq("withheld: rebate of c", "2/3", Money::from_int(3) - o2.payment(&id("c")));
        }
        "tree" => {
            let o = run_nrm(&g)?;
            rebates(&mut c, &o, 1, &[("a", "2.5"), ("b", "4"), ("c", "2")], "1.5");
            rebates(&mut c, &o, 2, &[("f", "1"), ("g", "5"), ("h", "1")], "0");
            rebates(&mut c, &o, 3, &[("k", "0"), ("l", "0"), ("m", "0")], "0");
            c.eq("winner", "l", winner(&o));
            c.eq("payment of l", "17", o.payment(&id("l")));
            c.eq("surplus", "1.5", &o.surplus);
            c.eq("welfare", "18", &o.social_welfare);
            let base = run_cavallo_neighbours(&net)?;
            c.eq("neighbour baseline winner", "b", winner(&base));
            c.eq("neighbour baseline welfare", "7", &base.social_welfare);
        }
        "graph" => {
            let o = run_nrm(&g)?;
            rebates(&mut c, &o, 1, &[("a", "2.4"), ("b", "0.8"), ("c", "1.2"), ("g", "5.4")], "2.2");
            rebates(&mut c, &o, 2, &[("j", "0.5"), ("k", "0.5"), ("l", "0.5"), ("m", "0.5"), ("p", "1")], "0");
            c.eq("winner", "p", winner(&o));
            c.eq("payment of p", "14", o.payment(&id("p")));
            c.eq("surplus", "2.2", &o.surplus);
            c.eq("welfare", "16", &o.social_welfare);
            let base = run_cavallo_neighbours(&net)?;
            c.eq("neighbour baseline winner", "b", winner(&base));
            c.eq("neighbour baseline welfare", "7", &base.social_welfare);
        }
        "diffusion-example" => {
            let absent: Vec<&str> = ["e", "g", "h"].into_iter().filter(|k| !g.contains(&id(k))).collect();
            c.eq("absent agents", "e g h", absent.join(" "));
            c.eq("reported valuation of b", "5", g.reported_valuation(&id("b"))?);
        }
        _ => anyhow::bail!("unknown golden fixture `{name}`"),
    }
    Ok(c.0)
}
