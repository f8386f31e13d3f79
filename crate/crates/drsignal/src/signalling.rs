//! Signalling policies and Bayes posterior updating.
//!
//! A [`SignalPolicy`] is a row-stochastic matrix over a signal alphabet that
//! coincides with the generation support: entry `(i, j)` is the probability
//! of broadcasting signal `j` when level `i` is observed. Upon receiving
//! signal `j` the consumer forms the posterior
//!
//! ```text
//! P(q_i | signal j) = policy[i][j] · prior[i] / marginal(j),
//! marginal(j) = Σ_k policy[k][j] · prior[k],
//! ```
//!
//! and only the posterior mean enters the consumer's decision. Two posterior
//! statistics drive everything downstream: the expected square of the
//! posterior mean ([`posterior_mean_square`]) and the expected product of the
//! realized level with the posterior mean ([`cross_moment`]); the tower
//! property makes them equal, which is what turns the operator's objective
//! into a single scalar times the information content of the policy.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::model::GenerationModel;
use crate::{Error, Result};

/// Tolerance for each policy row summing to one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A signal is treated as unreachable when its marginal probability falls
/// below this threshold; guards against sign noise in sums.
pub const REACHABLE_EPS: f64 = 1e-15;

/// Row-stochastic signalling policy on the scenario's support.
///
/// Constructed through the validating constructors, so a value of this type
/// always satisfies: square matrix, entries in [0, 1], rows summing to one
/// within [`ROW_SUM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct SignalPolicy {
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyDoc {
    matrix: Vec<Vec<f64>>,
}

impl SignalPolicy {
    /// Full disclosure: the signal equals the observed level (identity matrix).
    pub fn truth(m: usize) -> Self {
        assert!(m >= 1);
        let matrix = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        SignalPolicy { matrix }
    }

    /// No disclosure: every row is uniform, so the posterior equals the
    /// prior for every signal. Any identical-rows matrix is equally
    /// uninformative; uniform is the canonical representative.
    pub fn no_info(m: usize) -> Self {
        assert!(m >= 1);
        let row = vec![1.0 / m as f64; m];
        SignalPolicy {
            matrix: vec![row; m],
        }
    }

    /// Always broadcast signal `j` regardless of the observed level.
    pub fn constant(m: usize, j: usize) -> Result<Self> {
        if j >= m {
            return Err(Error::Invalid {
                violations: vec![format!("signal index {j} out of range for {m} signals")],
            });
        }
        let mut row = vec![0.0; m];
        row[j] = 1.0;
        Ok(SignalPolicy {
            matrix: vec![row; m],
        })
    }

    /// Draw each row independently from a symmetric Dirichlet distribution
    /// with the given concentration. Deterministic for a fixed seed; large
    /// concentrations approach uniform rows.
    pub fn random(m: usize, seed: u64, concentration: f64) -> Self {
        assert!(m >= 1);
        assert!(concentration > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = Gamma::new(concentration, 1.0).expect("positive shape");
        let matrix = (0..m)
            .map(|_| {
                let row: Vec<f64> = (0..m).map(|_| gamma.sample(&mut rng)).collect();
                let sum: f64 = row.iter().sum();
                if sum > 1e-290 {
                    row.iter().map(|v| v / sum).collect()
                } else {
                    // tiny concentrations can underflow every draw
                    let j = rng.random_range(0..m);
                    let mut point = vec![0.0; m];
                    point[j] = 1.0;
                    point
                }
            })
            .collect();
        SignalPolicy { matrix }
    }

    /// Validate an explicit matrix.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let violations = validate_matrix(&matrix);
        if violations.is_empty() {
            Ok(SignalPolicy { matrix })
        } else {
            Err(Error::Invalid { violations })
        }
    }

    /// Load a policy from a JSON file of the form `{"matrix": [[...], ...]}`.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let doc: PolicyDoc = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_matrix(doc.matrix)
    }

    /// Write the policy as `{"matrix": [[...], ...]}`.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        let doc = PolicyDoc {
            matrix: self.matrix.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("policy serializes");
        text.push('\n');
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Size of the signal alphabet.
    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    /// Probability of signal `j` given level `i`.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    /// Row `i`: the signal distribution for observed level `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }
}

fn validate_matrix(matrix: &[Vec<f64>]) -> Vec<String> {
    let mut out = Vec::new();
    let m = matrix.len();
    if m == 0 {
        out.push("policy matrix is empty".to_string());
        return out;
    }
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != m {
            out.push(format!(
                "policy matrix is not square: row {i} has {} entries, expected {m}",
                row.len()
            ));
            continue;
        }
        let mut row_ok = true;
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                out.push(format!("policy row {i} entry {j} is outside [0, 1] ({v})"));
                row_ok = false;
            }
        }
        if row_ok {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                out.push(format!("policy row {i} sums to {sum}"));
            }
        }
    }
    out
}

/// Posterior belief after observing one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorBelief {
    /// Posterior probability of each generation level.
    pub probs: Vec<f64>,
    /// Posterior mean of generation; the only statistic the consumer needs.
    pub mean: f64,
    /// Index of the signal this belief conditions on.
    pub signal_index: usize,
    /// Marginal probability of the signal under prior and policy.
    pub marginal: f64,
}

impl PosteriorBelief {
    /// Whether the signal occurs with positive probability. Unreachable
    /// signals carry the prior as a placeholder belief and zero weight in
    /// every expectation.
    pub fn is_reachable(&self) -> bool {
        self.marginal >= REACHABLE_EPS
    }
}

/// Bayes update for signal `j`.
///
/// When the signal's marginal probability is below [`REACHABLE_EPS`] the
/// belief falls back to the prior and is flagged unreachable; it never
/// contributes to expectations because its weight is the marginal itself.
pub fn posterior(gen: &GenerationModel, policy: &SignalPolicy, j: usize) -> PosteriorBelief {
    let m = gen.len();
    assert!(j < m, "signal index {j} out of range for {m} signals");
    assert_eq!(policy.dim(), m, "policy dimension must match support size");
    let marginal: f64 = (0..m).map(|i| gen.prior[i] * policy.prob(i, j)).sum();
    if marginal < REACHABLE_EPS {
        return PosteriorBelief {
            probs: gen.prior.clone(),
            mean: gen.mean(),
            signal_index: j,
            marginal,
        };
    }
    let probs: Vec<f64> = (0..m)
        .map(|i| gen.prior[i] * policy.prob(i, j) / marginal)
        .collect();
    let mean = probs
        .iter()
        .zip(&gen.support)
        .map(|(p, q)| p * q)
        .sum();
    PosteriorBelief {
        probs,
        mean,
        signal_index: j,
        marginal,
    }
}

/// Posterior beliefs for every signal in order.
pub fn posteriors(gen: &GenerationModel, policy: &SignalPolicy) -> Vec<PosteriorBelief> {
    (0..gen.len()).map(|j| posterior(gen, policy, j)).collect()
}

/// Expected square of the posterior mean, `Σ_j marginal(j) · mean(j)²`,
/// summed over reachable signals.
///
/// This is the information content of a policy: it ranges from the squared
/// prior mean (no disclosure) to the prior second moment (full disclosure).
pub fn posterior_mean_square(gen: &GenerationModel, policy: &SignalPolicy) -> f64 {
    posteriors(gen, policy)
        .iter()
        .filter(|b| b.is_reachable())
        .map(|b| b.marginal * b.mean * b.mean)
        .sum()
}

/// Expected product of the realized generation level and the posterior mean,
/// under the joint law of (level, signal).
///
/// Equals [`posterior_mean_square`] by the tower property; computing it from
/// the joint law provides the independent route for that identity.
pub fn cross_moment(gen: &GenerationModel, policy: &SignalPolicy) -> f64 {
    let beliefs = posteriors(gen, policy);
    let mut total = 0.0;
    for (i, &q) in gen.support.iter().enumerate() {
        for belief in &beliefs {
            if belief.is_reachable() {
                total += gen.prior[i] * policy.prob(i, belief.signal_index) * q * belief.mean;
            }
        }
    }
    total
}
