//! Bayes updating under different signalling policies, and the information
//! bracket: the posterior mean square always sits between the squared prior
//! mean (no disclosure) and the prior second moment (full disclosure).
//!
//! ```bash
//! cargo run -p drsignal --example posterior_beliefs
//! ```

use drsignal::model::load_scenario;
use drsignal::signalling::{cross_moment, posterior_mean_square, posteriors, SignalPolicy};

fn main() -> drsignal::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/worked.json");
    let scenario = load_scenario(path)?;
    let gen = &scenario.generation;
    let m = gen.len();

    let garbled = SignalPolicy::from_matrix(vec![vec![0.8, 0.2], vec![0.3, 0.7]])?;
    let policies: Vec<(&str, SignalPolicy)> = vec![
        ("truth", SignalPolicy::truth(m)),
        ("no-info", SignalPolicy::no_info(m)),
        ("garbled", garbled),
        ("random (seed 7)", SignalPolicy::random(m, 7, 1.0)),
    ];

    println!(
        "prior mean² = {:.6}, prior second moment = {:.6}\n",
        gen.mean().powi(2),
        gen.second_moment()
    );
    for (name, policy) in &policies {
        println!("policy: {name}");
        for belief in posteriors(gen, policy) {
            if belief.is_reachable() {
                println!(
                    "  signal {} (marginal {:.4}): posterior {:?} mean {:.4}",
                    belief.signal_index,
                    belief.marginal,
                    belief
                        .probs
                        .iter()
                        .map(|p| (p * 1e4).round() / 1e4)
                        .collect::<Vec<_>>(),
                    belief.mean
                );
            } else {
                println!("  signal {} is never sent", belief.signal_index);
            }
        }
        let pms = posterior_mean_square(gen, policy);
        println!(
            "  posterior mean square {:.6}, cross moment {:.6}\n",
            pms,
            cross_moment(gen, policy)
        );
        assert!(gen.mean().powi(2) <= pms + 1e-12 && pms <= gen.second_moment() + 1e-12);
    }
    Ok(())
}
