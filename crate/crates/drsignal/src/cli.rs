//! The `drsignal` command line: evaluate, sweep, threshold, verify.
//!
//! All commands read a scenario config (see [`crate::model::load_scenario`])
//! and emit CSV (default) or JSON. CSV numbers are rendered at a fixed ten
//! significant digits so repeated runs diff cleanly. Exit codes: 0 success,
//! 2 configuration or validation problems, 3 policy/scenario dimension
//! mismatch, 4 failed verification certificate.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{load_scenario, Scenario};
use crate::population::{
    average_response_slope, nash_equilibrium, population_threshold, representative_threshold,
    truth_margin, tso_cost_multi, ResponseSlope,
};
use crate::response::best_response;
use crate::signalling::{posterior_mean_square, posteriors, SignalPolicy};
use crate::tso::{tso_cost, Regime, REGIME_TOL};
use crate::verify::{identity_suite, monte_carlo_cost, policy_search};
use crate::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

/// Monte Carlo draws used by the `verify` cross-check.
const VERIFY_DRAWS: u64 = 200_000;

#[derive(Debug, Parser)]
#[command(
    name = "drsignal",
    about = "Signalling analysis for demand response: disclosure regimes, thresholds, and certificates",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario configuration file (JSON)
    #[arg(long)]
    scenario: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Seed for randomized certificates
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one signalling policy on a scenario
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Policy: "truth", "noinfo", "constant:<j>", or a policy file path
        #[arg(long, default_value = "truth")]
        policy: String,
    },
    /// Sweep the contract slope and report regimes and costs per grid point
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Start of the inclusive slope grid
        #[arg(long)]
        b_from: f64,
        /// End of the inclusive slope grid
        #[arg(long)]
        b_to: f64,
        /// Number of grid points (at least 2)
        #[arg(long)]
        steps: usize,
    },
    /// Report representative and population truth-telling thresholds
    Threshold {
        #[command(flatten)]
        common: Common,
    },
    /// Run the brute-force certificates; exit 0 iff all of them pass
    Verify {
        #[command(flatten)]
        common: Common,
        /// Random policies sampled by the search
        #[arg(long, default_value_t = 1000)]
        samples: u64,
    },
}

#[derive(Debug)]
enum CmdError {
    Lib(Error),
    Range(String),
    Certificate { name: String, residual: f64 },
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Lib(e)
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Lib(e) => write!(f, "{e}"),
            CmdError::Range(msg) => write!(f, "{msg}"),
            CmdError::Certificate { name, residual } => {
                write!(f, "certificate failed: {name} (residual {residual:e})")
            }
        }
    }
}

impl CmdError {
    fn exit_code(&self) -> i32 {
        match self {
            CmdError::Lib(Error::DimensionMismatch { .. }) => EXIT_DIMENSION,
            CmdError::Lib(_) | CmdError::Range(_) => EXIT_CONFIG,
            CmdError::Certificate { .. } => EXIT_CERTIFICATE,
        }
    }
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Evaluate { common, policy } => cmd_evaluate(&common, &policy),
        Command::Sweep {
            common,
            b_from,
            b_to,
            steps,
        } => cmd_sweep(&common, b_from, b_to, steps),
        Command::Threshold { common } => cmd_threshold(&common),
        Command::Verify { common, samples } => cmd_verify(&common, samples),
    }
}

/// Render with ten significant digits, positionally where practical.
/// Trailing zeros are kept so column widths stay stable.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-4..=15).contains(&exponent) {
        return format!("{:.9e}", x);
    }
    let decimals = (9 - exponent).clamp(0, 17) as usize;
    format!("{:.*}", decimals, x)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CmdError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|source| {
            CmdError::Lib(Error::Io {
                path: path.clone(),
                source,
            })
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn regime_from_margin(margin: f64) -> Regime {
    if margin < -REGIME_TOL {
        Regime::Truth
    } else if margin > REGIME_TOL {
        Regime::NoInfo
    } else {
        Regime::Indifferent
    }
}

fn scenario_cost(scenario: &Scenario, policy: &SignalPolicy) -> Result<f64, Error> {
    if scenario.consumer_count() == 1 {
        Ok(tso_cost(scenario, policy))
    } else {
        tso_cost_multi(scenario, policy)
    }
}

fn parse_policy(spec: &str, m: usize) -> Result<SignalPolicy, CmdError> {
    match spec {
        "truth" => Ok(SignalPolicy::truth(m)),
        "noinfo" => Ok(SignalPolicy::no_info(m)),
        s if s.starts_with("constant:") => {
            let index = &s["constant:".len()..];
            let j: usize = index.parse().map_err(|_| {
                CmdError::Range(format!("invalid signal index {index:?} in policy spec"))
            })?;
            Ok(SignalPolicy::constant(m, j)?)
        }
        path => {
            let policy = SignalPolicy::load(Path::new(path))?;
            if policy.dim() != m {
                return Err(CmdError::Lib(Error::DimensionMismatch {
                    policy: policy.dim(),
                    support: m,
                }));
            }
            Ok(policy)
        }
    }
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SignalReport {
    index: usize,
    value: f64,
    marginal: f64,
    posterior_mean: f64,
    actions: Vec<f64>,
}

#[derive(Serialize)]
struct EvaluateReport {
    scenario: String,
    cost: f64,
    posterior_mean_square: f64,
    lambda_or_h: f64,
    regime: Regime,
    signals: Vec<SignalReport>,
}

fn cmd_evaluate(common: &Common, policy_spec: &str) -> Result<(), CmdError> {
    let scenario = load_scenario(&common.scenario)?;
    let policy = parse_policy(policy_spec, scenario.generation.len())?;
    let cost = scenario_cost(&scenario, &policy)?;
    let pms = posterior_mean_square(&scenario.generation, &policy);
    let b = scenario.market.b;
    let slope = average_response_slope(&scenario, b, ResponseSlope::Aggregate);
    let margin = truth_margin(b, scenario.market.beta, slope);
    let regime = regime_from_margin(margin);

    let mut signals = Vec::new();
    for belief in posteriors(&scenario.generation, &policy) {
        let actions = if scenario.consumer_count() == 1 {
            vec![best_response(
                &scenario.consumers[0],
                &scenario.market,
                belief.mean,
            )]
        } else {
            nash_equilibrium(&scenario, belief.mean)?.actions
        };
        signals.push(SignalReport {
            index: belief.signal_index,
            value: scenario.generation.support[belief.signal_index],
            marginal: if belief.is_reachable() { belief.marginal } else { 0.0 },
            posterior_mean: belief.mean,
            actions,
        });
    }

    let report = EvaluateReport {
        scenario: common.scenario.display().to_string(),
        cost,
        posterior_mean_square: pms,
        lambda_or_h: margin,
        regime,
        signals,
    };
    let content = match common.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => {
            let mut out = String::from(
                "signal_index,signal_value,marginal,posterior_mean,actions,cost,posterior_mean_square,lambda_or_h,regime\n",
            );
            for s in &report.signals {
                let actions = s
                    .actions
                    .iter()
                    .map(|a| fmt_sig(*a))
                    .collect::<Vec<_>>()
                    .join(";");
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    s.index,
                    fmt_sig(s.value),
                    fmt_sig(s.marginal),
                    fmt_sig(s.posterior_mean),
                    actions,
                    fmt_sig(report.cost),
                    fmt_sig(report.posterior_mean_square),
                    fmt_sig(report.lambda_or_h),
                    report.regime,
                ));
            }
            out
        }
    };
    write_output(&common.out, &content)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

/// One grid point of a contract-slope sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub b: f64,
    /// Truth margin at this slope; negative means disclosure is optimal.
    pub lambda_or_h: f64,
    pub regime: Regime,
    pub cost_truth: f64,
    pub cost_noinfo: f64,
    /// `cost_truth - cost_noinfo`; changes sign together with the margin.
    pub cost_gap: f64,
}

fn sweep_row(base: &Scenario, b: f64) -> Result<SweepRow, Error> {
    let mut scenario = base.clone();
    scenario.market.b = b;
    let m = scenario.generation.len();
    let slope = average_response_slope(&scenario, b, ResponseSlope::Aggregate);
    let margin = truth_margin(b, scenario.market.beta, slope);
    let cost_truth = scenario_cost(&scenario, &SignalPolicy::truth(m))?;
    let cost_noinfo = scenario_cost(&scenario, &SignalPolicy::no_info(m))?;
    Ok(SweepRow {
        b,
        lambda_or_h: margin,
        regime: regime_from_margin(margin),
        cost_truth,
        cost_noinfo,
        cost_gap: cost_truth - cost_noinfo,
    })
}

fn cmd_sweep(common: &Common, b_from: f64, b_to: f64, steps: usize) -> Result<(), CmdError> {
    if !(b_from > 0.0 && b_from < b_to) {
        return Err(CmdError::Range(format!(
            "sweep range must satisfy 0 < b-from < b-to (got {b_from} .. {b_to})"
        )));
    }
    if steps < 2 {
        return Err(CmdError::Range(format!("steps must be at least 2 (got {steps})")));
    }
    let scenario = load_scenario(&common.scenario)?;
    let rows: Vec<SweepRow> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let b = b_from + (b_to - b_from) * i as f64 / (steps - 1) as f64;
            sweep_row(&scenario, b)
        })
        .collect::<Result<_, Error>>()?;

    let content = match common.format {
        OutputFormat::Json => to_json(&rows),
        OutputFormat::Csv => {
            let mut out = String::from("b,lambda_or_h,regime,cost_truth,cost_noinfo,cost_gap\n");
            for row in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_sig(row.b),
                    fmt_sig(row.lambda_or_h),
                    row.regime,
                    fmt_sig(row.cost_truth),
                    fmt_sig(row.cost_noinfo),
                    fmt_sig(row.cost_gap),
                ));
            }
            out
        }
    };
    write_output(&common.out, &content)
}

// ---------------------------------------------------------------------------
// threshold
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ThresholdReport {
    representative: f64,
    population: f64,
    robust: bool,
}

fn cmd_threshold(common: &Common) -> Result<(), CmdError> {
    let scenario = load_scenario(&common.scenario)?;
    let representative =
        representative_threshold(scenario.average_cost(), scenario.market.beta);
    let population = population_threshold(&scenario, ResponseSlope::Aggregate);
    let report = ThresholdReport {
        representative,
        population,
        robust: representative <= population + 1e-9,
    };
    let content = match common.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => format!(
            "representative,population,robust\n{},{},{}\n",
            fmt_sig(report.representative),
            fmt_sig(report.population),
            report.robust,
        ),
    };
    write_output(&common.out, &content)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MonteCarloCheck {
    policy: &'static str,
    exact: f64,
    estimate: f64,
    stderr: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    scenario: String,
    seed: u64,
    samples: u64,
    best_cost: f64,
    closed_form_cost: f64,
    gap: f64,
    identities: BTreeMap<&'static str, f64>,
    monte_carlo: Vec<MonteCarloCheck>,
}

fn cmd_verify(common: &Common, samples: u64) -> Result<(), CmdError> {
    if samples < 1 {
        return Err(CmdError::Range("samples must be at least 1".to_string()));
    }
    let scenario = load_scenario(&common.scenario)?;
    let m = scenario.generation.len();
    let search = policy_search(&scenario, samples, common.seed)?;

    let mut policies = vec![SignalPolicy::truth(m), SignalPolicy::no_info(m)];
    for j in 0..m {
        policies.push(SignalPolicy::constant(m, j)?);
    }
    for i in 0..100u64 {
        policies.push(SignalPolicy::random(m, common.seed.wrapping_add(i), 1.0));
    }
    let identities = identity_suite(&scenario, &policies)?;

    let mut monte_carlo = Vec::new();
    for (label, policy, seed_offset) in [
        ("truth", SignalPolicy::truth(m), 1u64),
        ("noinfo", SignalPolicy::no_info(m), 2u64),
    ] {
        let exact = scenario_cost(&scenario, &policy)?;
        let (estimate, stderr) = monte_carlo_cost(
            &scenario,
            &policy,
            VERIFY_DRAWS,
            common.seed.wrapping_add(seed_offset),
        )?;
        let pass = (estimate - exact).abs() <= 3.0 * stderr + 1e-9;
        monte_carlo.push(MonteCarloCheck {
            policy: label,
            exact,
            estimate,
            stderr,
            pass,
        });
    }

    let report = VerifyReport {
        scenario: common.scenario.display().to_string(),
        seed: common.seed,
        samples,
        best_cost: search.best_cost,
        closed_form_cost: search.closed_form_cost,
        gap: search.gap,
        identities: identities
            .checks
            .iter()
            .map(|c| (c.name, c.max_residual))
            .collect(),
        monte_carlo,
    };

    let content = match common.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => {
            let mut out = String::from("key,value\n");
            out.push_str(&format!("scenario,{}\n", report.scenario));
            out.push_str(&format!("seed,{}\n", report.seed));
            out.push_str(&format!("samples,{}\n", report.samples));
            out.push_str(&format!("best_cost,{}\n", fmt_sig(report.best_cost)));
            out.push_str(&format!(
                "closed_form_cost,{}\n",
                fmt_sig(report.closed_form_cost)
            ));
            out.push_str(&format!("gap,{}\n", fmt_sig(report.gap)));
            for (name, residual) in &report.identities {
                out.push_str(&format!("identity_{name},{}\n", fmt_sig(*residual)));
            }
            for check in &report.monte_carlo {
                out.push_str(&format!(
                    "monte_carlo_{}_deviation,{}\n",
                    check.policy,
                    fmt_sig(check.estimate - check.exact)
                ));
            }
            out
        }
    };
    write_output(&common.out, &content)?;

    // certificates: report first, then fail loudly
    if search.gap < -1e-10 {
        return Err(CmdError::Certificate {
            name: "search_gap".to_string(),
            residual: -search.gap,
        });
    }
    if let Some(failure) = identities.first_failure() {
        return Err(CmdError::Certificate {
            name: failure.name.to_string(),
            residual: failure.max_residual,
        });
    }
    if let Some(check) = report.monte_carlo.iter().find(|c| !c.pass) {
        return Err(CmdError::Certificate {
            name: format!("monte_carlo_{}", check.policy),
            residual: (check.estimate - check.exact).abs(),
        });
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
