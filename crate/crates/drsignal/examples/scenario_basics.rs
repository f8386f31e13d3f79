//! Load a scenario config, validate it, and inspect the parts.
//!
//! ```bash
//! cargo run -p drsignal --example scenario_basics
//! ```

use drsignal::model::{load_scenario, validate};

fn main() -> drsignal::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/worked.json");
    let scenario = load_scenario(path)?;

    println!("loaded {path}");
    println!(
        "generation levels: {:?} with prior {:?}",
        scenario.generation.support, scenario.generation.prior
    );
    println!(
        "prior mean {:.4}, prior second moment {:.4}",
        scenario.generation.mean(),
        scenario.generation.second_moment()
    );
    println!(
        "market: cost intercept k = {}, marginal-cost slope beta = {}, contract slope b = {}",
        scenario.market.k, scenario.market.beta, scenario.market.b
    );
    for (i, consumer) in scenario.consumers.iter().enumerate() {
        println!(
            "consumer {i}: marginal utility {} effort cost {} baseline {}",
            consumer.u, consumer.c, consumer.y0
        );
    }

    // validation never aborts; it reports every violated invariant
    let mut broken = scenario.clone();
    broken.generation.prior = vec![0.6, 0.5];
    broken.consumers[0].c = 0.0;
    println!("\nviolations after corrupting the config:");
    for violation in validate(&broken) {
        println!("  - {violation}");
    }
    Ok(())
}
