//! The consumer's optimal and trustful responses to signals.
//!
//! A consumer with baseline consumption `y0` picks a reduction effort `a`
//! (consumption becomes `y0 - a`) to maximize expected utility given the
//! posterior belief about generation. The objective is quadratic, so the
//! best response is affine in the posterior mean with coefficients depending
//! only on the contract and the consumer's own parameters. Negative actions,
//! i.e. consumption increases, are intentional: cheap expected generation
//! makes a responsive consumer consume more.

use crate::model::{ConsumerParams, GenerationModel, MarketParams};
use crate::signalling::PosteriorBelief;

/// Intercept and slope of the affine best response `a = intercept - slope · mean`.
///
/// The slope lies in (0, 1/2) for any positive pricing slope and effort cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponseCoefficients {
    pub intercept: f64,
    pub slope: f64,
}

/// Closed-form response coefficients under the contract slope `b`:
/// intercept `(k + 2·b·y0 - u) / (c + 2b)` and slope `b / (c + 2b)`.
pub fn response_coefficients(
    consumer: &ConsumerParams,
    market: &MarketParams,
) -> BestResponseCoefficients {
    let denom = consumer.c + 2.0 * market.b;
    BestResponseCoefficients {
        intercept: (market.k + 2.0 * market.b * consumer.y0 - consumer.u) / denom,
        slope: market.b / denom,
    }
}

/// Optimal action given the posterior mean of generation.
pub fn best_response(consumer: &ConsumerParams, market: &MarketParams, posterior_mean: f64) -> f64 {
    let coeffs = response_coefficients(consumer, market);
    coeffs.intercept - coeffs.slope * posterior_mean
}

/// Action of a trustful (non-Bayesian) consumer who takes the signal value
/// at face value as the true generation level.
pub fn trustful_response(consumer: &ConsumerParams, market: &MarketParams, signal_value: f64) -> f64 {
    let coeffs = response_coefficients(consumer, market);
    coeffs.intercept - coeffs.slope * signal_value
}

/// Expected utility of action `a` under a posterior belief:
/// `Σ_i probs[i] · [u·(y0-a) - c/2·a² - (k + b·(y0-a-q_i))·(y0-a)]`.
pub fn expected_consumer_utility(
    consumer: &ConsumerParams,
    market: &MarketParams,
    gen: &GenerationModel,
    belief: &PosteriorBelief,
    action: f64,
) -> f64 {
    let consumption = consumer.y0 - action;
    let effort_cost = 0.5 * consumer.c * action * action;
    let mut total = 0.0;
    for (i, &q) in gen.support.iter().enumerate() {
        let price = market.k + market.b * (consumption - q);
        total += belief.probs[i] * (consumer.u * consumption - effort_cost - price * consumption);
    }
    total
}
