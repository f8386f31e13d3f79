//! Signalling toolkit for electricity demand response.
//!
//! A system operator observes realized renewable generation before consumers
//! do and commits to a *signalling policy*: a row-stochastic map from the
//! observed generation level to a broadcast message. Consumers update their
//! beliefs by Bayes rule and adjust consumption under a pre-agreed linear
//! pricing contract. Whether the operator benefits from disclosing the truth,
//! garbling it, or saying nothing at all turns out to depend only on how the
//! contract's slope compares to the marginal cost of generation.
//!
//! The crate computes every piece of that story exactly, on finite supports:
//!
//! - [`model`] — scenario configuration (generation prior, pricing contract,
//!   consumer parameters) with strict validation and JSON round-tripping.
//! - [`signalling`] — signalling policies, Bayes posteriors, and the
//!   posterior statistics that drive the operator's objective.
//! - [`response`] — the consumer's closed-form best response and the trustful
//!   (non-Bayesian) response.
//! - [`tso`] — the operator's cost, its decomposition into a constant plus an
//!   information term, regime classification, and truth-telling thresholds.
//! - [`population`] — the n-consumer game: exact Nash equilibrium, potential
//!   function, population thresholds, and the robustness comparison against a
//!   representative consumer.
//! - [`verify`] — independent brute-force oracles (grid argmax, policy
//!   search, Monte Carlo) that certify the closed forms numerically.
//! - [`cli`] — the `drsignal` command-line front end (`evaluate`, `sweep`,
//!   `threshold`, `verify`).
//!
//! Start with the runnable examples in `examples/`; each one demonstrates a
//! single capability end to end.

pub mod cli;
pub mod model;
pub mod population;
pub mod response;
pub mod signalling;
pub mod tso;
pub mod verify;

pub use model::{load_scenario, save_scenario, validate, ConsumerParams, GenerationModel, MarketParams, Scenario};
pub use response::{best_response, response_coefficients, trustful_response, BestResponseCoefficients};
pub use signalling::{posterior, PosteriorBelief, SignalPolicy};
pub use tso::{classify_regime, truth_threshold, ObjectiveDecomposition, Regime, RegimeReport};

use std::path::PathBuf;

/// Errors from configuration loading, validation, and the equilibrium solver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Reading a configuration file failed.
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A configuration file is not well-formed JSON or has missing,
    /// mistyped, or unknown fields.
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    /// One or more invariants are violated.
    #[error("invalid configuration: {}", violations.join("; "))]
    Invalid { violations: Vec<String> },
    /// A policy's signal alphabet does not match the scenario support.
    #[error("policy has {policy} signals but the scenario has {support} generation levels")]
    DimensionMismatch { policy: usize, support: usize },
    /// The equilibrium first-order system has no unique solution. Cannot
    /// happen for validated scenarios (positive effort cost and price slope).
    #[error("equilibrium system is singular: {0}")]
    Singular(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
