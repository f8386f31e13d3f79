//! The operator's objective, its decomposition, and disclosure regimes.
//!
//! The operator bears the quadratic generation cost of the consumption/
//! generation mismatch and collects retail revenue at the contract price.
//! For a single consumer the expected cost under a signalling policy splits
//! into a policy-independent constant plus
//!
//! ```text
//! slope · [(b - beta) + slope · (beta/2 - b)] · E[posterior mean²]
//! ```
//!
//! where `slope` is the consumer's response slope. The bracket decides
//! everything: negative means information lowers the cost (full disclosure
//! is optimal), positive means information raises it (say nothing). The
//! bracket crosses zero at a threshold slope that depends only on `beta`
//! and the consumer's effort cost.

use crate::model::{ConsumerParams, MarketParams, Scenario};
use crate::response::{best_response, response_coefficients};
use crate::signalling::{posteriors, SignalPolicy};

/// The bracket factor is treated as zero within this tolerance; exact zeros
/// occur only at the measure-zero threshold.
pub const REGIME_TOL: f64 = 1e-12;

/// Disclosure regime implied by the sign of the information factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    /// Information lowers the operator's cost: full disclosure is optimal.
    Truth,
    /// The objective does not depend on the policy.
    Indifferent,
    /// Information raises the operator's cost: disclose nothing.
    NoInfo,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Truth => write!(f, "Truth"),
            Regime::Indifferent => write!(f, "Indifferent"),
            Regime::NoInfo => write!(f, "NoInfo"),
        }
    }
}

/// Exact split of the operator's cost into a policy-independent constant and
/// a coefficient on the posterior mean square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveDecomposition {
    /// Policy-independent part of the expected cost.
    pub constant: f64,
    /// Multiplies the posterior mean square; equals `slope · info_factor`.
    pub coefficient: f64,
    /// `(b - beta) + slope · (beta/2 - b)`; its sign decides the regime.
    pub info_factor: f64,
}

/// Regime classification with the threshold it derives from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    /// Contract slope above which disclosure stops being optimal.
    pub threshold: f64,
    pub regime: Regime,
    /// The sign-determining factor at the scenario's contract slope.
    pub info_factor: f64,
}

fn generation_cost(market: &MarketParams, x: f64) -> f64 {
    market.k * x + 0.5 * market.beta * x * x
}

fn contract_price(market: &MarketParams, x: f64) -> f64 {
    market.k + market.b * x
}

/// Expected operator cost for a single-consumer scenario under a policy,
/// computed as an exact finite double sum over (level, signal) pairs.
pub fn tso_cost(scenario: &Scenario, policy: &SignalPolicy) -> f64 {
    assert_eq!(
        scenario.consumer_count(),
        1,
        "tso_cost expects a single-consumer scenario"
    );
    let gen = &scenario.generation;
    assert_eq!(policy.dim(), gen.len(), "policy dimension must match support");
    let consumer = &scenario.consumers[0];
    let market = &scenario.market;
    let mut total = 0.0;
    for belief in posteriors(gen, policy) {
        if !belief.is_reachable() {
            continue;
        }
        let action = best_response(consumer, market, belief.mean);
        let consumption = consumer.y0 - action;
        for (i, &q) in gen.support.iter().enumerate() {
            let weight = gen.prior[i] * policy.prob(i, belief.signal_index);
            let mismatch = consumption - q;
            total += weight
                * (generation_cost(market, mismatch)
                    - contract_price(market, mismatch) * consumption);
        }
    }
    total
}

/// Closed-form decomposition of the single-consumer objective.
///
/// For every policy, `tso_cost == constant + coefficient · posterior mean
/// square` up to rounding; the identity is exercised directly in the tests.
pub fn decompose(scenario: &Scenario) -> ObjectiveDecomposition {
    assert_eq!(
        scenario.consumer_count(),
        1,
        "decompose expects a single-consumer scenario"
    );
    let consumer = &scenario.consumers[0];
    let market = &scenario.market;
    let gen = &scenario.generation;
    let coeffs = response_coefficients(consumer, market);
    let (a0, slope) = (coeffs.intercept, coeffs.slope);
    let (k, beta, b) = (market.k, market.beta, market.b);
    let y0 = consumer.y0;
    let mean_q = gen.mean();
    let mean_q2 = gen.second_moment();

    // policy-independent part of E[F] with F(q) = -k·q + beta/2·(y0-q)² - b·(y0-q)·y0
    let mean_f = -k * mean_q + 0.5 * beta * (y0 * y0 - 2.0 * y0 * mean_q + mean_q2)
        - b * y0 * (y0 - mean_q);
    // E[action] never depends on the policy
    let mean_action = a0 - slope * mean_q;
    let constant = mean_f
        + (2.0 * b - beta) * y0 * mean_action
        + (beta - b) * a0 * mean_q
        + (0.5 * beta - b) * (a0 * a0 - 2.0 * a0 * slope * mean_q);

    let info_factor = (b - beta) + slope * (0.5 * beta - b);
    ObjectiveDecomposition {
        constant,
        coefficient: slope * info_factor,
        info_factor,
    }
}

/// Contract slope above which the operator prefers to disclose nothing:
/// the positive root of `b² + b·(c - 3·beta/2) - beta·c`.
///
/// Evaluated in the cancellation-free form of the quadratic formula so the
/// root property holds to full precision for any magnitude of `c`. At
/// `c = 0` the threshold is exactly `1.5·beta`; it decreases towards `beta`
/// as effort becomes infinitely costly.
pub fn truth_threshold(beta: f64, c: f64) -> f64 {
    assert!(beta > 0.0);
    assert!(c >= 0.0);
    if c == 0.0 {
        return 1.5 * beta;
    }
    let p = c - 1.5 * beta;
    let discriminant = (p * p + 4.0 * beta * c).sqrt();
    if p > 0.0 {
        2.0 * beta * c / (p + discriminant)
    } else {
        0.5 * (discriminant - p)
    }
}

/// Classify the disclosure regime at the scenario's contract slope.
pub fn classify_regime(market: &MarketParams, consumer: &ConsumerParams) -> RegimeReport {
    let slope = response_coefficients(consumer, market).slope;
    let info_factor = (market.b - market.beta) + slope * (0.5 * market.beta - market.b);
    let regime = if info_factor < -REGIME_TOL {
        Regime::Truth
    } else if info_factor > REGIME_TOL {
        Regime::NoInfo
    } else {
        Regime::Indifferent
    };
    RegimeReport {
        threshold: truth_threshold(market.beta, consumer.c),
        regime,
        info_factor,
    }
}

/// The cost-minimizing policy for a single-consumer scenario: full
/// disclosure in the truth regime (and at indifference), no disclosure above
/// the threshold.
pub fn optimal_policy(scenario: &Scenario) -> SignalPolicy {
    assert_eq!(scenario.consumer_count(), 1);
    let m = scenario.generation.len();
    match classify_regime(&scenario.market, &scenario.consumers[0]).regime {
        Regime::Truth | Regime::Indifferent => SignalPolicy::truth(m),
        Regime::NoInfo => SignalPolicy::no_info(m),
    }
}

/// Best constant signal against a trustful consumer: the support endpoint
/// farthest from `(intercept - y0) / slope`, ties broken toward the upper
/// endpoint. The operator wants the trustful consumer's action as far as
/// possible from the baseline, and the action is affine in the signal.
pub fn trustful_optimal_signal(scenario: &Scenario) -> f64 {
    assert_eq!(scenario.consumer_count(), 1);
    let consumer = &scenario.consumers[0];
    let coeffs = response_coefficients(consumer, &scenario.market);
    let reference = (coeffs.intercept - consumer.y0) / coeffs.slope;
    let lo = scenario.generation.support[0];
    let hi = *scenario.generation.support.last().unwrap();
    if (lo - reference).abs() > (hi - reference).abs() {
        lo
    } else {
        hi
    }
}
