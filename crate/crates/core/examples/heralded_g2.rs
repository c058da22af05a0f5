//! Heralded g²(0) from simulated time tags, with and without a conversion
//! stage in front of the beamsplitter.

use qfc_ramsey::config::load_config;
use qfc_ramsey::photon::{coincidences, g2_experiment, HERALD, PORT_A, PORT_B};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load_config("paper-cryo")?;
    let source = cfg.source.expect("preset has a source");
    for (label, transmission) in [("pulses off", 1.0), ("pulses on", 0.90)] {
        let (est, tags) = g2_experiment(
            &source,
            &cfg.detector,
            cfg.mc.noise_per_gate,
            transmission,
            1_000_000,
            cfg.g2.window,
            7,
        )?;
        let ha = coincidences(&tags, (HERALD, PORT_A), cfg.g2.window)?;
        println!(
            "{label:>10}: g2(0) = {:.4} +/- {:.4}  heralds {} herald&a {} (two-pointer {}) herald&b {} threefolds {}",
            est.g2, est.stderr, est.heralds, est.herald_a, ha, est.herald_b, est.herald_ab
        );
    }

    let ideal = load_config("ideal")?;
    let (est, tags) = g2_experiment(
        &ideal.source.unwrap(),
        &ideal.detector,
        0.0,
        1.0,
        100_000,
        ideal.g2.window,
        7,
    )?;
    println!(
        "ideal source: g2(0) = {} from {} tags ({} on port b)",
        est.g2,
        tags.len(),
        tags.count(PORT_B)
    );
    Ok(())
}
