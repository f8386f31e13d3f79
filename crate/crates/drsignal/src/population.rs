//! The n-consumer game: Nash equilibrium, potential, and population thresholds.
//!
//! All consumers receive the same signal and share the prior over per-capita
//! generation; total generation is `n` times the per-capita level. Consumer
//! `i` maximizes
//!
//! ```text
//! u_i·(y0_i - a_i) - c_i/2·a_i² - p(n·(ȳ0 - q̄ - ā))·(y0_i - a_i)
//! ```
//!
//! given the posterior mean of `q̄`. The stationarity conditions form a
//! diagonal-plus-rank-one linear system whose unique solution is affine in
//! the posterior mean, so the operator again faces a scalar response slope
//! and the single-consumer regime analysis carries over with that slope.
//!
//! The game admits an exact potential: a single concave quadratic whose
//! per-player gradients equal the conditional payoff gradients, which is why
//! the equilibrium is unique and why maximizing the potential solves it.

use crate::model::Scenario;
use crate::signalling::{posteriors, SignalPolicy};
use crate::tso::{truth_threshold, ObjectiveDecomposition};
use crate::{Error, Result};

/// How the population's response slope is computed.
///
/// `Aggregate` is the slope of the equilibrium average response, derived
/// from the stationarity system: `s / (1 + s)` with
/// `s = Σ_i b / (b + c_i)`. `PerCapita` first averages the sensitivities,
/// using `(s/n) / (1 + s/n)`; it is kept as a comparison variant because the
/// robustness ordering below holds under both readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseSlope {
    Aggregate,
    PerCapita,
}

/// Nash equilibrium of the consumer game at one posterior mean.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    /// Per-consumer equilibrium actions.
    pub actions: Vec<f64>,
    /// Arithmetic mean of the actions.
    pub average: f64,
    /// Sensitivity of the average action to the posterior mean:
    /// `average = intercept - slope · posterior mean`. Lies in (0, 1).
    pub slope: f64,
    pub intercept: f64,
    /// Per-consumer constant of the stationarity condition,
    /// `k - u_i + b·y0_i`.
    pub foc_constants: Vec<f64>,
}

/// Robustness comparison between a representative consumer with the average
/// effort cost and the actual population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessReport {
    /// Threshold for one consumer with the population's mean effort cost.
    pub representative: f64,
    /// Threshold for the full population.
    pub population: f64,
    /// Whether `representative <= population` within 1e-9 slack: the
    /// population is never easier to mislead than its representative.
    pub holds: bool,
}

/// Solve the equilibrium stationarity system at the given posterior mean of
/// per-capita generation.
///
/// Consumer `i` satisfies `(b + c_i)·a_i = e_i + b·n·(ȳ0 - mean - ā)` with
/// `e_i = k - u_i + b·y0_i`. Averaging eliminates the coupling and yields
/// the affine closed form; the individual actions follow by substitution.
pub fn nash_equilibrium(scenario: &Scenario, qbar_hat: f64) -> Result<EquilibriumProfile> {
    let market = &scenario.market;
    let n = scenario.consumer_count();
    let b = market.b;
    let mut sensitivity_sum = 0.0;
    let mut weighted_constants = 0.0;
    let mut foc_constants = Vec::with_capacity(n);
    for consumer in &scenario.consumers {
        let denom = b + consumer.c;
        if !(denom > 0.0) {
            return Err(Error::Singular(format!(
                "b + c = {denom} must be positive"
            )));
        }
        let e = market.k - consumer.u + b * consumer.y0;
        sensitivity_sum += b / denom;
        weighted_constants += e / denom;
        foc_constants.push(e);
    }
    weighted_constants /= n as f64;
    let contraction = 1.0 + sensitivity_sum;
    if !(contraction > 0.0) {
        return Err(Error::Singular(format!(
            "aggregate sensitivity 1 + s = {contraction} must be positive"
        )));
    }
    let ybar = scenario.average_baseline();
    let slope = sensitivity_sum / contraction;
    let intercept = (weighted_constants + sensitivity_sum * ybar) / contraction;
    let average_closed = intercept - slope * qbar_hat;
    let pressure = b * n as f64 * (ybar - qbar_hat - average_closed);
    let actions: Vec<f64> = scenario
        .consumers
        .iter()
        .zip(&foc_constants)
        .map(|(consumer, e)| (e + pressure) / (b + consumer.c))
        .collect();
    let average = actions.iter().sum::<f64>() / n as f64;
    Ok(EquilibriumProfile {
        actions,
        average,
        slope,
        intercept,
        foc_constants,
    })
}

/// Expected utility of consumer `index` at an action profile, conditional on
/// a posterior mean of per-capita generation. Linear in generation, so only
/// the mean enters.
pub fn consumer_payoff(
    scenario: &Scenario,
    index: usize,
    actions: &[f64],
    qbar_hat: f64,
) -> f64 {
    let market = &scenario.market;
    let consumer = &scenario.consumers[index];
    let n = actions.len() as f64;
    let abar = actions.iter().sum::<f64>() / n;
    let price = market.k + market.b * n * (scenario.average_baseline() - qbar_hat - abar);
    let own = actions[index];
    let consumption = consumer.y0 - own;
    consumer.u * consumption - 0.5 * consumer.c * own * own - price * consumption
}

/// Exact potential of the consumer game: a strictly concave quadratic whose
/// gradient in each action equals the corresponding payoff gradient. The
/// quadratic term carries `n²/2` because each consumer moves the average by
/// `1/n` while the price responds to `n` times the average.
pub fn potential_value(scenario: &Scenario, actions: &[f64], qbar_hat: f64) -> f64 {
    let market = &scenario.market;
    let n = actions.len() as f64;
    let abar = actions.iter().sum::<f64>() / n;
    let mut total = 0.0;
    for (consumer, &a) in scenario.consumers.iter().zip(actions) {
        let e = market.k - consumer.u + market.b * consumer.y0;
        total += e * a - 0.5 * (market.b + consumer.c) * a * a;
    }
    let gap = scenario.average_baseline() - abar - qbar_hat;
    total - 0.5 * n * n * market.b * gap * gap
}

/// Expected operator cost for `n` consumers: the exact double sum of
/// `f(n·(ȳ0 - ā - q̄)) - p(n·(ȳ0 - q̄ - ā)) · n·(ȳ0 - ā)` with the
/// equilibrium average response at each reachable signal.
pub fn tso_cost_multi(scenario: &Scenario, policy: &SignalPolicy) -> Result<f64> {
    let gen = &scenario.generation;
    assert_eq!(policy.dim(), gen.len(), "policy dimension must match support");
    let market = &scenario.market;
    let n = scenario.consumer_count() as f64;
    let ybar = scenario.average_baseline();
    let mut total = 0.0;
    for belief in posteriors(gen, policy) {
        if !belief.is_reachable() {
            continue;
        }
        let abar = nash_equilibrium(scenario, belief.mean)?.average;
        let consumption = n * (ybar - abar);
        for (i, &qbar) in gen.support.iter().enumerate() {
            let weight = gen.prior[i] * policy.prob(i, belief.signal_index);
            let mismatch = consumption - n * qbar;
            let cost = market.k * mismatch + 0.5 * market.beta * mismatch * mismatch;
            let price = market.k + market.b * mismatch;
            total += weight * (cost - price * consumption);
        }
    }
    Ok(total)
}

/// Population response slope at contract slope `b` under the chosen variant.
pub fn average_response_slope(scenario: &Scenario, b: f64, variant: ResponseSlope) -> f64 {
    let s: f64 = scenario
        .consumers
        .iter()
        .map(|consumer| b / (b + consumer.c))
        .sum();
    match variant {
        ResponseSlope::Aggregate => s / (1.0 + s),
        ResponseSlope::PerCapita => {
            let per_capita = s / scenario.consumer_count() as f64;
            per_capita / (1.0 + per_capita)
        }
    }
}

/// Truth margin at contract slope `b`: `b·(1 - slope) - beta·(1 - slope/2)`.
/// Disclosure is optimal exactly when the margin is nonpositive. For one
/// consumer this is the same factor that [`crate::tso::decompose`] exposes.
pub fn truth_margin(b: f64, beta: f64, slope: f64) -> f64 {
    b * (1.0 - slope) - beta * (1.0 - 0.5 * slope)
}

/// Decomposition of the n-consumer objective into a policy-independent
/// constant plus `n²·slope·margin-factor` times the posterior mean square of
/// per-capita generation. Reduces to [`crate::tso::decompose`] at n = 1.
pub fn objective_decomposition(scenario: &Scenario) -> Result<ObjectiveDecomposition> {
    let market = &scenario.market;
    let gen = &scenario.generation;
    let n = scenario.consumer_count() as f64;
    let (k, beta, b) = (market.k, market.beta, market.b);
    let ybar = scenario.average_baseline();
    let eq = nash_equilibrium(scenario, 0.0)?;
    let (intercept, slope) = (eq.intercept, eq.slope);
    let mean_q = gen.mean();
    let mean_q2 = gen.second_moment();

    let mean_f = 0.5 * n * n * beta * (ybar * ybar - 2.0 * ybar * mean_q + mean_q2)
        - k * n * mean_q
        - b * n * n * ybar * (ybar - mean_q);
    let mean_abar = intercept - slope * mean_q;
    let constant = mean_f
        + n * n
            * ((2.0 * b - beta) * ybar * mean_abar
                + (beta - b) * intercept * mean_q
                + (0.5 * beta - b) * (intercept * intercept - 2.0 * intercept * slope * mean_q));
    let info_factor = (b - beta) + slope * (0.5 * beta - b);
    Ok(ObjectiveDecomposition {
        constant,
        coefficient: n * n * slope * info_factor,
        info_factor,
    })
}

/// Threshold contract slope for the population: the root of the truth
/// margin, found by bisection from `beta/2` (where the margin is exactly
/// `-beta/2`) with geometric bracket growth.
pub fn population_threshold(scenario: &Scenario, variant: ResponseSlope) -> f64 {
    let beta = scenario.market.beta;
    let margin = |b: f64| truth_margin(b, beta, average_response_slope(scenario, b, variant));
    let mut lo = 0.5 * beta;
    let mut hi = 2.0 * beta;
    let mut growth = 0;
    while margin(hi) <= 0.0 {
        hi *= 2.0;
        growth += 1;
        assert!(growth < 200, "truth margin never became positive");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Threshold for a single representative consumer with mean effort cost.
pub fn representative_threshold(c_bar: f64, beta: f64) -> f64 {
    truth_threshold(beta, c_bar)
}

/// Compare the representative threshold against the population threshold.
/// A heterogeneous population tolerates a wider range of contract slopes
/// before the operator benefits from withholding information.
pub fn robustness_check(scenario: &Scenario, variant: ResponseSlope) -> RobustnessReport {
    let representative = representative_threshold(scenario.average_cost(), scenario.market.beta);
    let population = population_threshold(scenario, variant);
    RobustnessReport {
        representative,
        population,
        holds: population - representative >= -1e-9,
    }
}
