//! Rough throughput of the excursion engine.

use std::time::Instant;

use krick::model::{build_model, ModelParams};
use krick::simulate::{run_excursion_until, stream_rng, Domain, Outcome};

fn main() {
    let model = build_model(ModelParams::new(1.5)).expect("model");
    let mut rng = stream_rng(1, Domain::Misc, 0);
    let horizon = 1e4 + 2.0;
    let trials = 200_000;
    let start = Instant::now();
    let mut steps = 0u64;
    for _ in 0..trials {
        steps += match run_excursion_until(&model.law, &mut rng, 100_000_000, horizon) {
            Outcome::Complete(e) => e.steps,
            Outcome::Censored { steps, .. } | Outcome::Capped { steps, .. } => steps,
        };
    }
    let secs = start.elapsed().as_secs_f64();
    println!(
        "{trials} excursions, {:.1} steps each, {:.2} ns/step, {:.2} s",
        steps as f64 / trials as f64,
        secs * 1e9 / steps as f64,
        secs
    );
}
