mod golden;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use redistnet::audit::{audit, measure_budget_balance, AuditConfig, AuditReport};
use redistnet::genlab::{run_sweep, Family, SweepConfig, SweepRecord, ValuationLaw};
use redistnet::instance::{format_outcome, parse_instance, InstanceError};
use redistnet::mechanisms::Mechanism;
use redistnet::{build_generated_graph, Money, SocialNetwork, StrategyProfile};

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

#[derive(Parser)]
#[command(name = "redistnet", version, about = "Redistribution mechanisms on social networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a mechanism on an instance file and print the outcome.
    Run {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_mechanism)]
        mechanism: Mechanism,
        /// Include the per-step redistribution trace.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check IR, non-deficit, IC and efficiency of a mechanism on an instance.
    Audit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_mechanism)]
        mechanism: Mechanism,
        /// Enumerate every invitation subset up to this many neighbours.
        #[arg(long, default_value_t = 8)]
        degree_cap: usize,
        /// Random subsets tried for agents above the degree cap.
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long, env = "REDISTNET_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run seeded random instances and write one record per run.
    Sweep {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        /// Comma-separated, strictly increasing participant counts.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long)]
        trials: usize,
        #[arg(long, env = "REDISTNET_SEED", default_value_t = 0)]
        seed: u64,
        /// `uniform:LO:HI` or `exponential:MEAN`.
        #[arg(long, value_parser = parse_law, default_value = "uniform:0:100")]
        law: ValuationLaw,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_delimiter = ',', value_parser = parse_mechanism, default_value = "nrm")]
        mechanisms: Vec<Mechanism>,
        /// Extra edges per bidder for the graph family.
        #[arg(long, value_parser = parse_money, default_value = "1")]
        extra_edge_factor: Money,
        /// Fill the runtime_ms column (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Replay the bundled fixtures against their expected values.
    Golden {
        #[arg(long, conflicts_with = "name")]
        list: bool,
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_mechanism(s: &str) -> Result<Mechanism, String> {
    s.parse().map_err(|e: redistnet::Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: redistnet::Error| e.to_string())
}

fn parse_law(s: &str) -> Result<ValuationLaw, String> {
    s.parse().map_err(|e: redistnet::Error| e.to_string())
}

fn parse_money(s: &str) -> Result<Money, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Command result that should end with the violation exit code.
#[derive(Debug)]
struct Violation;

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("checks failed")
    }
}

impl std::error::Error for Violation {}

/// Instance file that could not be read or parsed.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn load(path: &Path) -> Result<(SocialNetwork, StrategyProfile)> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e: InstanceError| InputError(format!("{}: error[{}]: {e}", path.display(), e.code())).into())
}

fn cmd_run(input: &Path, mechanism: Mechanism, trace: bool, json: bool) -> Result<String> {
    let (net, profile) = load(input)?;
    let g = build_generated_graph(&net, &profile)?;
    let mut outcome = mechanism.run(&g)?;
    if json {
        if !trace {
            outcome.trace.clear();
        }
        return Ok(serde_json::to_string_pretty(&outcome)? + "\n");
    }
    Ok(format_outcome(&outcome, trace))
}

fn render_audit(r: &AuditReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mechanism: {}", r.mechanism);
    match &r.ir.witness {
        None => s.push_str("ir: holds\n"),
        Some(w) => {
            let invited: Vec<&str> = w.invited.iter().map(|a| a.as_str()).collect();
            let _ = writeln!(s, "ir: violated by {} inviting [{}], utility {}", w.agent, invited.join(", "), w.utility);
        }
    }
    let _ = writeln!(s, "non_deficit: {}", if r.nd_holds { "holds" } else { "violated" });
    let _ = writeln!(s, "ic: {} violation(s) in {} deviation(s)", r.ic.violations.len(), r.ic.deviations_checked);
    for v in &r.ic.violations {
        let invited: Vec<&str> = v.deviation.invited.iter().map(|a| a.as_str()).collect();
        let _ = writeln!(
            s,
            "  {} reports {} inviting [{}]: utility {} -> {}",
            v.deviation.agent,
            v.deviation.reported_valuation,
            invited.join(", "),
            v.truthful_utility,
            v.deviant_utility
        );
    }
    let mut sampled = r.ic.sampled_agents.clone();
    sampled.extend(r.ir.sampled_agents.iter().cloned());
    sampled.sort();
    sampled.dedup();
    if !sampled.is_empty() {
        let names: Vec<&str> = sampled.iter().map(|a| a.as_str()).collect();
        let _ = writeln!(s, "sampled, not exhaustive: {}", names.join(", "));
    }
    let e = &r.efficiency;
    let _ = writeln!(
        s,
        "efficiency: welfare {}, neighbour baseline {}, optimum {}, ratio {}",
        e.mechanism_sw,
        e.neighbour_baseline_sw,
        e.optimal_sw,
        e.ratio()
    );
    let _ = writeln!(s, "budget_ratio: {}", r.budget_ratio);
    s
}

fn cmd_audit(input: &Path, mechanism: Mechanism, config: &AuditConfig, json: bool) -> Result<(String, bool)> {
    let (net, profile) = load(input)?;
    let report = audit(&net, &profile, mechanism, config)?;
    let text = if json { serde_json::to_string_pretty(&report)? + "\n" } else { render_audit(&report) };
    Ok((text, report.clean()))
}

#[derive(Serialize)]
struct Row {
    n: usize,
    trial: usize,
    mechanism: String,
    surplus: String,
    social_welfare: String,
    optimal_welfare: String,
    winner_depth: Option<usize>,
    runtime_ms: Option<String>,
}

impl From<&SweepRecord> for Row {
    fn from(r: &SweepRecord) -> Self {
        Row {
            n: r.n,
            trial: r.trial,
            mechanism: r.mechanism.to_string(),
            surplus: r.surplus.to_string(),
            social_welfare: r.social_welfare.to_string(),
            optimal_welfare: r.optimal_welfare.to_string(),
            winner_depth: r.winner_depth,
            runtime_ms: r.runtime.map(|d| format!("{:.3}", d.as_secs_f64() * 1000.0)),
        }
    }
}

fn write_records(path: &Path, format: Format, records: &[SweepRecord]) -> Result<()> {
    let rows: Vec<Row> = records.iter().map(Row::from).collect();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(&rows)? + "\n";
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    Ok(())
}

fn sweep_summary(config: &SweepConfig, records: &[SweepRecord], out: &Path) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "wrote {} records to {}", records.len(), out.display());
    let mut mechanisms = config.mechanisms.clone();
    mechanisms.sort();
    mechanisms.dedup();
    for m in mechanisms {
        let rows: Vec<(usize, Money, Money)> = records
            .iter()
            .filter(|r| r.mechanism == m)
            .map(|r| (r.n, r.surplus.clone(), r.social_welfare.clone()))
            .collect();
        let Ok(trend) = measure_budget_balance(&rows) else {
            continue;
        };
        let _ = write!(s, "{m} mean surplus/welfare:");
        for b in &trend.buckets {
            let _ = write!(s, " n={} {:.4}", b.n, b.mean_ratio.to_f64());
        }
        s.push('\n');
    }
    s
}

fn cmd_golden(list: bool, name: Option<String>) -> Result<(String, bool)> {
    let mut s = String::new();
    if list {
        for n in golden::NAMES {
            let _ = writeln!(s, "{n}");
        }
        return Ok((s, true));
    }
    let names: Vec<String> = match name {
        Some(n) => vec![n],
        None => golden::NAMES.iter().map(|n| n.to_string()).collect(),
    };
    let mut ok = true;
    for n in names {
        for c in golden::run(&n)? {
            if c.passed() {
                let _ = writeln!(s, "PASS {n}: {} = {}", c.label, c.actual);
            } else {
                ok = false;
                let _ = writeln!(s, "FAIL {n}: {} expected {}, got {}", c.label, c.expected, c.actual);
            }
        }
    }
    Ok((s, ok))
}

fn dispatch(cli: Cli) -> Result<()> {
    let (text, clean) = match cli.command {
        Command::Run { input, mechanism, trace, json } => (cmd_run(&input, mechanism, trace, json)?, true),
        Command::Audit { input, mechanism, degree_cap, samples, seed, json } => {
            let config = AuditConfig { degree_cap, samples, seed, ..AuditConfig::default() };
            cmd_audit(&input, mechanism, &config, json)?
        }
        Command::Sweep {
            family,
            sizes,
            trials,
            seed,
            law,
            out,
            format,
            mechanisms,
            extra_edge_factor,
            timing,
        } => {
            let config = SweepConfig {
                family,
                sizes,
                extra_edge_factor,
                law,
                trials_per_size: trials,
                seed,
                mechanisms,
                record_runtime: timing,
            };
            let records = run_sweep(&config)?;
            write_records(&out, format, &records)?;
            (sweep_summary(&config, &records, &out), true)
        }
        Command::Golden { list, name } => cmd_golden(list, name)?,
    };
    print!("{text}");
    if clean {
        Ok(())
    } else {
        Err(Violation.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Violation>() => ExitCode::from(EXIT_VIOLATION),
        Err(e) if matches!(e.downcast_ref::<redistnet::Error>(), Some(redistnet::Error::Config(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) if e.is::<InputError>() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
