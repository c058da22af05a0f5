//! Conversion efficiency against pump power: the sin² law for a single
//! two-mode rotation, with a Monte Carlo estimate at the pi/2 point.

use qfc_ramsey::config::load_config;
use qfc_ramsey::experiments::{rabi_scan, McSettings, ScanMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load_config("fig4")?;
    let powers: Vec<f64> = (0..=16).map(|k| 0.5 * k as f64 + 0.01).collect();
    let scan = rabi_scan(
        &powers,
        &cfg.fwm,
        &cfg.quad,
        &cfg.fiber,
        cfg.temp,
        None,
        &ScanMode::Analytic,
    )?;
    println!("{:>8} {:>8}", "P (W)", "eta");
    for p in &scan.points {
        let bar = "#".repeat((p.p_i * 40.0).round() as usize);
        println!("{:>8.2} {:>8.4} {bar}", p.x, p.p_i);
    }

    let mc = ScanMode::MonteCarlo(McSettings {
        source: cfg.source.expect("preset has a source"),
        detector: cfg.detector,
        noise_per_gate: 0.0,
        n_gates: 100_000,
        seed: 42,
    });
    let sampled = rabi_scan(&[2.0], &cfg.fwm, &cfg.quad, &cfg.fiber, cfg.temp, None, &mc)?;
    let p = sampled.points[0];
    println!(
        "\nMonte Carlo at 2 W: eta = {:.4} +/- {:.4} ({} heralds)",
        p.p_i, p.err, p.n
    );
    Ok(())
}
