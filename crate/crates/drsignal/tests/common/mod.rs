//! Shared fixtures for the integration suites.

#![allow(dead_code)]

use drsignal::model::{ConsumerParams, GenerationModel, MarketParams, Scenario};
use drsignal::tso::truth_threshold;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Path of the documented worked scenario.
pub fn worked_scenario_path() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/worked.json")
}

pub fn worked_scenario() -> Scenario {
    drsignal::load_scenario(worked_scenario_path()).expect("worked scenario loads")
}

/// How the contract slope relates to the marginal-cost slope.
pub enum PricingMode {
    /// b = beta
    MarginalCost,
    /// b drawn strictly between the threshold and twice the threshold
    AboveThreshold,
    /// b drawn in a moderate band around beta
    Free,
}

pub fn random_generation(rng: &mut ChaCha8Rng, m: usize) -> GenerationModel {
    let mut support = vec![rng.random_range(-1.0..1.0)];
    for _ in 1..m {
        let step = rng.random_range(0.2..1.0);
        support.push(support.last().unwrap() + step);
    }
    let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let prior = weights.iter().map(|w| w / total).collect();
    GenerationModel { support, prior }
}

pub fn random_consumer(rng: &mut ChaCha8Rng) -> ConsumerParams {
    ConsumerParams {
        u: rng.random_range(0.0..2.5),
        c: rng.random_range(0.3..4.0),
        y0: rng.random_range(0.0..3.0),
    }
}

/// Random single-consumer scenario with `m` generation levels.
pub fn random_single_scenario(rng: &mut ChaCha8Rng, m: usize, mode: PricingMode) -> Scenario {
    let generation = random_generation(rng, m);
    let consumer = random_consumer(rng);
    let beta = rng.random_range(0.4..2.0);
    let b = match mode {
        PricingMode::MarginalCost => beta,
        PricingMode::AboveThreshold => {
            let threshold = truth_threshold(beta, consumer.c);
            threshold * (1.0 + rng.random_range(1e-4..1.0))
        }
        PricingMode::Free => beta * rng.random_range(0.5..1.6),
    };
    Scenario {
        generation,
        market: MarketParams {
            k: rng.random_range(0.3..2.0),
            beta,
            b,
        },
        consumers: vec![consumer],
    }
}

/// Random population scenario with `n` consumers and `m` levels.
pub fn random_population_scenario(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Scenario {
    let generation = random_generation(rng, m);
    let beta = rng.random_range(0.4..2.0);
    Scenario {
        generation,
        market: MarketParams {
            k: rng.random_range(0.3..2.0),
            beta,
            b: beta * rng.random_range(0.5..1.6),
        },
        consumers: (0..n).map(|_| random_consumer(rng)).collect(),
    }
}
