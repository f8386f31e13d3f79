//! Scenario configuration: generation prior, pricing contract, consumers.
//!
//! A [`Scenario`] bundles everything the other modules need: the finite
//! generation distribution, the cost/pricing parameters, and one or more
//! consumers. All types are plain immutable values; construct them directly
//! or load them from the JSON config format described at [`load_scenario`].

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for probability vectors summing to one. Tighter checks are
/// brittle under m-term double-precision summation.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Finite-support distribution of renewable generation.
///
/// `support[i]` is a generation level (MWh scale) and `prior[i]` its prior
/// probability. The support is strictly increasing and the prior sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationModel {
    pub support: Vec<f64>,
    pub prior: Vec<f64>,
}

impl GenerationModel {
    /// Number of generation levels.
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Prior mean of generation.
    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.prior)
            .map(|(q, p)| p * q)
            .sum()
    }

    /// Prior second moment of generation.
    pub fn second_moment(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.prior)
            .map(|(q, p)| p * q * q)
            .sum()
    }

    fn collect_violations(&self, out: &mut Vec<String>) {
        if self.support.is_empty() {
            out.push("support is empty".to_string());
        }
        for (i, q) in self.support.iter().enumerate() {
            if !q.is_finite() {
                out.push(format!("support[{i}] is not finite ({q})"));
            }
        }
        for w in self.support.windows(2) {
            if !(w[0] < w[1]) {
                out.push(format!(
                    "support must be strictly increasing: {} is not below {}",
                    w[0], w[1]
                ));
            }
        }
        if self.prior.len() != self.support.len() {
            out.push(format!(
                "prior has {} entries but support has {}",
                self.prior.len(),
                self.support.len()
            ));
        }
        let mut sum_ok = true;
        for (i, p) in self.prior.iter().enumerate() {
            if !p.is_finite() {
                out.push(format!("prior[{i}] is not finite ({p})"));
                sum_ok = false;
            } else if *p < 0.0 {
                out.push(format!("prior[{i}] is negative ({p})"));
            }
        }
        if sum_ok && !self.prior.is_empty() {
            let sum: f64 = self.prior.iter().sum();
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                out.push(format!("prior sums to {sum}"));
            }
        }
    }
}

/// One consumer: marginal utility of consumption `u` (currency/MWh),
/// quadratic effort-cost curvature `c` (currency/MWh², positive), and
/// baseline consumption `y0` (MWh).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerParams {
    pub u: f64,
    pub c: f64,
    pub y0: f64,
}

impl ConsumerParams {
    fn collect_violations(&self, label: &str, out: &mut Vec<String>) {
        if !(self.c > 0.0) {
            out.push(format!(
                "{label}: effort-cost curvature must be positive (c = {})",
                self.c
            ));
        }
        if !(self.u >= 0.0) {
            out.push(format!(
                "{label}: marginal utility must be nonnegative (u = {})",
                self.u
            ));
        }
        if !self.u.is_finite() {
            out.push(format!("{label}: marginal utility is not finite ({})", self.u));
        }
        if !self.y0.is_finite() {
            out.push(format!(
                "{label}: baseline consumption is not finite ({})",
                self.y0
            ));
        }
    }
}

/// Cost and pricing parameters.
///
/// Generation costs `k·x + β/2·x²`, so marginal cost has intercept `k` and
/// slope `beta`. The retail contract prices consumption at `k + b·x`; the
/// intercept is always the cost intercept, only the slope `b` may deviate
/// from `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub k: f64,
    pub beta: f64,
    pub b: f64,
}

impl MarketParams {
    fn collect_violations(&self, out: &mut Vec<String>) {
        if !(self.k > 0.0) {
            out.push(format!("cost intercept k must be positive (k = {})", self.k));
        }
        if !(self.beta > 0.0) {
            out.push(format!(
                "marginal-cost slope beta must be positive (beta = {})",
                self.beta
            ));
        }
        if !(self.b > 0.0) {
            out.push(format!("pricing slope b must be positive (b = {})", self.b));
        }
    }
}

/// A full problem instance: generation model, market parameters, and a
/// nonempty set of consumers. Single-consumer problems are the n = 1 case.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub generation: GenerationModel,
    pub market: MarketParams,
    pub consumers: Vec<ConsumerParams>,
}

impl Scenario {
    /// Number of consumers.
    pub fn consumer_count(&self) -> usize {
        self.consumers.len()
    }

    /// Mean baseline consumption across consumers.
    pub fn average_baseline(&self) -> f64 {
        self.consumers.iter().map(|c| c.y0).sum::<f64>() / self.consumers.len() as f64
    }

    /// Mean effort-cost curvature across consumers.
    pub fn average_cost(&self) -> f64 {
        self.consumers.iter().map(|c| c.c).sum::<f64>() / self.consumers.len() as f64
    }

    /// Parse a scenario from the JSON config format (see [`load_scenario`]).
    pub fn from_json(json: &str) -> std::result::Result<Self, String> {
        let doc: ScenarioDoc = serde_json::from_str(json).map_err(|e| e.to_string())?;
        Ok(doc.into())
    }

    /// Serialize to the JSON config format.
    pub fn to_json(&self) -> String {
        let doc = ScenarioDoc::from(self);
        let mut s = serde_json::to_string_pretty(&doc).expect("scenario serializes");
        s.push('\n');
        s
    }
}

/// Flat on-disk layout. Strict parsing: unknown keys are an error, to catch
/// typos in experiment configs.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    support: Vec<f64>,
    prior: Vec<f64>,
    k: f64,
    beta: f64,
    b: f64,
    consumers: Vec<ConsumerParams>,
}

impl From<ScenarioDoc> for Scenario {
    fn from(doc: ScenarioDoc) -> Self {
        Scenario {
            generation: GenerationModel {
                support: doc.support,
                prior: doc.prior,
            },
            market: MarketParams {
                k: doc.k,
                beta: doc.beta,
                b: doc.b,
            },
            consumers: doc.consumers,
        }
    }
}

impl From<&Scenario> for ScenarioDoc {
    fn from(s: &Scenario) -> Self {
        ScenarioDoc {
            support: s.generation.support.clone(),
            prior: s.generation.prior.clone(),
            k: s.market.k,
            beta: s.market.beta,
            b: s.market.b,
            consumers: s.consumers.clone(),
        }
    }
}

/// Check every invariant and return a human-readable description of each
/// violation. Empty means the scenario is valid. Never aborts.
pub fn validate(scenario: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    scenario.generation.collect_violations(&mut out);
    scenario.market.collect_violations(&mut out);
    if scenario.consumers.is_empty() {
        out.push("consumers list is empty".to_string());
    }
    for (i, consumer) in scenario.consumers.iter().enumerate() {
        consumer.collect_violations(&format!("consumer {i}"), &mut out);
    }
    out
}

/// Load and validate a scenario from a JSON file.
///
/// The document is a single object with keys `support` (array of numbers,
/// strictly increasing), `prior` (array of probabilities summing to one),
/// `k`, `beta`, `b` (positive numbers), and `consumers` (array of objects
/// with keys `u`, `c`, `y0`). Unknown keys are rejected.
pub fn load_scenario<P: AsRef<Path>>(path: P) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: ScenarioDoc = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let scenario = Scenario::from(doc);
    let violations = validate(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(Error::Invalid { violations })
    }
}

/// Write a scenario to a JSON file in the config format. Loading the file
/// back yields a field-exact copy.
pub fn save_scenario<P: AsRef<Path>>(scenario: &Scenario, path: P) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, scenario.to_json()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
