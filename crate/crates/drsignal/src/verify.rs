//! Independent brute-force certificates for the closed-form results.
//!
//! Nothing here trusts the analytic formulas: the action oracle maximizes
//! expected utility on a grid, the policy search enumerates and samples the
//! policy space, and the Monte Carlo estimator resamples the exact sums.
//! Reports carry their seeds so every run is reproducible bit for bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::model::{ConsumerParams, GenerationModel, MarketParams, Scenario};
use crate::population::{
    average_response_slope, nash_equilibrium, objective_decomposition, truth_margin,
    tso_cost_multi, ResponseSlope,
};
use crate::response::{best_response, expected_consumer_utility};
use crate::signalling::{
    cross_moment, posterior_mean_square, posteriors, PosteriorBelief, SignalPolicy,
};
use crate::tso::{tso_cost, REGIME_TOL};
use crate::Result;

/// Outcome of a brute-force search over signalling policies.
#[derive(Debug, Clone)]
pub struct SearchReport {
    /// Cheapest policy found by enumeration and sampling.
    pub best_policy: SignalPolicy,
    pub best_cost: f64,
    /// Cost of the analytically optimal policy.
    pub closed_form_cost: f64,
    /// `best_cost - closed_form_cost`; nonnegative up to rounding when the
    /// closed form is truly optimal.
    pub gap: f64,
    /// Number of random policies evaluated (enumerated ones come on top).
    pub samples: u64,
    pub seed: u64,
}

/// One identity checked over a batch of policies.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    /// Worst violation across the batch; for two-sided identities this is
    /// the largest absolute difference, for inequalities the largest
    /// positive overshoot.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Results of [`identity_suite`].
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Grid argmax of expected consumer utility over `[lo, hi]`, refined by two
/// rounds of local grid shrinking. Accurate to `(hi - lo) / steps` before
/// refinement; the objective is strictly concave so the grid optimum
/// brackets the true one.
pub fn argmax_action_oracle(
    consumer: &ConsumerParams,
    market: &MarketParams,
    gen: &GenerationModel,
    belief: &PosteriorBelief,
    lo: f64,
    hi: f64,
    steps: usize,
) -> f64 {
    assert!(lo < hi);
    assert!(steps >= 1000);
    let mut lo = lo;
    let mut hi = hi;
    let mut best = lo;
    for _round in 0..3 {
        let width = hi - lo;
        let mut best_value = f64::NEG_INFINITY;
        for i in 0..=steps {
            let a = lo + width * i as f64 / steps as f64;
            let value = expected_consumer_utility(consumer, market, gen, belief, a);
            if value > best_value {
                best_value = value;
                best = a;
            }
        }
        let step = width / steps as f64;
        lo = best - step;
        hi = best + step;
    }
    best
}

fn evaluation_cost(scenario: &Scenario, policy: &SignalPolicy) -> Result<f64> {
    if scenario.consumer_count() == 1 {
        Ok(tso_cost(scenario, policy))
    } else {
        tso_cost_multi(scenario, policy)
    }
}

/// The analytically optimal policy for any number of consumers: full
/// disclosure when the truth margin is nonpositive, nothing otherwise.
fn analytic_optimum(scenario: &Scenario) -> SignalPolicy {
    let m = scenario.generation.len();
    let b = scenario.market.b;
    let slope = average_response_slope(scenario, b, ResponseSlope::Aggregate);
    if truth_margin(b, scenario.market.beta, slope) <= REGIME_TOL {
        SignalPolicy::truth(m)
    } else {
        SignalPolicy::no_info(m)
    }
}

/// Every deterministic policy on `m` states: each row is a point mass, so
/// there are m^m of them. Only used for small alphabets.
fn deterministic_policies(m: usize) -> Vec<SignalPolicy> {
    let count = m.pow(m as u32);
    (0..count)
        .map(|code| {
            let mut remaining = code;
            let matrix = (0..m)
                .map(|_| {
                    let j = remaining % m;
                    remaining /= m;
                    let mut row = vec![0.0; m];
                    row[j] = 1.0;
                    row
                })
                .collect();
            SignalPolicy::from_matrix(matrix).expect("point-mass rows are stochastic")
        })
        .collect()
}

/// Lexicographic tie-break so parallel and serial searches agree exactly.
fn better(candidate: &(f64, SignalPolicy), incumbent: &(f64, SignalPolicy)) -> bool {
    match candidate.0.total_cmp(&incumbent.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            for (row_a, row_b) in candidate.1.matrix().iter().zip(incumbent.1.matrix()) {
                for (a, b) in row_a.iter().zip(row_b) {
                    match a.total_cmp(b) {
                        std::cmp::Ordering::Less => return true,
                        std::cmp::Ordering::Greater => return false,
                        std::cmp::Ordering::Equal => {}
                    }
                }
            }
            false
        }
    }
}

/// Search the policy space for anything cheaper than the analytic optimum.
///
/// Evaluates full disclosure, no disclosure, every constant policy, every
/// deterministic policy when the alphabet has at most three signals, and
/// `samples` random policies drawn at mixed concentrations. Candidate
/// generation and the min-reduction are deterministic for a fixed seed.
pub fn policy_search(scenario: &Scenario, samples: u64, seed: u64) -> Result<SearchReport> {
    assert!(samples >= 1);
    let m = scenario.generation.len();
    let mut candidates = vec![SignalPolicy::truth(m), SignalPolicy::no_info(m)];
    for j in 0..m {
        candidates.push(SignalPolicy::constant(m, j).expect("index in range"));
    }
    if m <= 3 {
        candidates.extend(deterministic_policies(m));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concentrations = [0.5, 1.0, 2.0];
    for i in 0..samples {
        let policy_seed = rng.random::<u64>();
        let concentration = concentrations[(i % 3) as usize];
        candidates.push(SignalPolicy::random(m, policy_seed, concentration));
    }

    let evaluated: Vec<(f64, SignalPolicy)> = candidates
        .into_par_iter()
        .map(|policy| {
            let cost = evaluation_cost(scenario, &policy)?;
            Ok((cost, policy))
        })
        .collect::<Result<_>>()?;
    let (best_cost, best_policy) = evaluated
        .into_iter()
        .reduce(|incumbent, candidate| {
            if better(&candidate, &incumbent) {
                candidate
            } else {
                incumbent
            }
        })
        .expect("at least two candidates");

    let closed_form_cost = evaluation_cost(scenario, &analytic_optimum(scenario))?;
    Ok(SearchReport {
        best_policy,
        best_cost,
        closed_form_cost,
        gap: best_cost - closed_form_cost,
        samples,
        seed,
    })
}

/// Monte Carlo estimate of the operator's cost with its standard error,
/// sampling (level, signal) pairs from the prior and the policy rows.
/// Deterministic per seed; a zero-variance scenario reports stderr 0 and an
/// estimate exactly equal to the deterministic cost.
pub fn monte_carlo_cost(
    scenario: &Scenario,
    policy: &SignalPolicy,
    draws: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    assert!(draws >= 1);
    let gen = &scenario.generation;
    let m = gen.len();
    assert_eq!(policy.dim(), m);
    let market = &scenario.market;
    let n = scenario.consumer_count() as f64;
    let ybar = scenario.average_baseline();

    // per-signal equilibrium consumption, total across consumers
    let mut consumption_by_signal = Vec::with_capacity(m);
    for belief in posteriors(gen, policy) {
        let abar = if scenario.consumer_count() == 1 {
            best_response(&scenario.consumers[0], market, belief.mean)
        } else {
            nash_equilibrium(scenario, belief.mean)?.average
        };
        consumption_by_signal.push(n * (ybar - abar));
    }

    let state_dist = WeightedIndex::new(gen.prior.iter().copied()).expect("valid prior");
    let row_dists: Vec<WeightedIndex<f64>> = (0..m)
        .map(|i| WeightedIndex::new(policy.row(i).iter().copied()).expect("stochastic row"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Welford keeps the mean exact for constant sequences
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for count in 1..=draws {
        let i = state_dist.sample(&mut rng);
        let j = row_dists[i].sample(&mut rng);
        let consumption = consumption_by_signal[j];
        let mismatch = consumption - n * gen.support[i];
        let cost = market.k * mismatch + 0.5 * market.beta * mismatch * mismatch
            - (market.k + market.b * mismatch) * consumption;
        let delta = cost - mean;
        mean += delta / count as f64;
        m2 += delta * (cost - mean);
    }
    let stderr = if draws > 1 {
        (m2 / (draws as f64 * (draws - 1) as f64)).sqrt()
    } else {
        0.0
    };
    Ok((mean, stderr))
}

/// Check the posterior-statistics identities and the objective decomposition
/// on each policy: the two Jensen inequalities, the tower property, the
/// belief martingale, and cost-equals-constant-plus-coefficient-times-
/// information. Returns the worst residual per identity.
pub fn identity_suite(scenario: &Scenario, policies: &[SignalPolicy]) -> Result<IdentityReport> {
    let gen = &scenario.generation;
    let prior_mean_sq = gen.mean() * gen.mean();
    let prior_second = gen.second_moment();
    let decomposition = objective_decomposition(scenario)?;
    let decomposition_tol = if scenario.consumer_count() == 1 { 1e-10 } else { 1e-9 };

    let mut jensen_lower = 0.0f64;
    let mut jensen_upper = 0.0f64;
    let mut tower = 0.0f64;
    let mut martingale = 0.0f64;
    let mut decomposition_residual = 0.0f64;
    for policy in policies {
        let pms = posterior_mean_square(gen, policy);
        jensen_lower = jensen_lower.max(prior_mean_sq - pms);
        jensen_upper = jensen_upper.max(pms - prior_second);
        tower = tower.max((cross_moment(gen, policy) - pms).abs());
        let recovered: f64 = posteriors(gen, policy)
            .iter()
            .filter(|b| b.is_reachable())
            .map(|b| b.marginal * b.mean)
            .sum();
        martingale = martingale.max((recovered - gen.mean()).abs());
        let direct = evaluation_cost(scenario, policy)?;
        let via = decomposition.constant + decomposition.coefficient * pms;
        decomposition_residual = decomposition_residual.max((direct - via).abs());
    }

    let checks = vec![
        IdentityCheck {
            name: "jensen_lower",
            max_residual: jensen_lower,
            tolerance: 1e-10,
            pass: jensen_lower < 1e-10,
        },
        IdentityCheck {
            name: "jensen_upper",
            max_residual: jensen_upper,
            tolerance: 1e-10,
            pass: jensen_upper < 1e-10,
        },
        IdentityCheck {
            name: "tower",
            max_residual: tower,
            tolerance: 1e-12,
            pass: tower < 1e-12,
        },
        IdentityCheck {
            name: "martingale",
            max_residual: martingale,
            tolerance: 1e-12,
            pass: martingale < 1e-12,
        },
        IdentityCheck {
            name: "decomposition",
            max_residual: decomposition_residual,
            tolerance: decomposition_tol,
            pass: decomposition_residual < decomposition_tol,
        },
    ];
    Ok(IdentityReport { checks })
}
