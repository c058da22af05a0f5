//! Dispersion thermometry: the Ramsey phase picked up inside a heated fiber
//! oscillates with temperature, and the fringe period gives dβ₂/dT.

use qfc_ramsey::config::load_config;
use qfc_ramsey::experiments::{gvd_thermometry, thermometry_period, McSettings, ScanMode};
use qfc_ramsey::units::to_ps2_per_km;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load_config("s7")?;
    let temps = cfg.thermometry.clone().expect("preset has a temperature sweep");
    println!(
        "planted dbeta2/dT {:.5} ps^2/km/K, predicted period {:.2} K",
        to_ps2_per_km(cfg.fiber.dbeta2_dt),
        thermometry_period(&cfg.fiber, &cfg.quad)?
    );
    let mc = ScanMode::MonteCarlo(McSettings {
        source: cfg.source.expect("preset has a source"),
        detector: cfg.detector,
        noise_per_gate: 0.0,
        n_gates: 5_000,
        seed: cfg.seed,
    });
    for (label, sweep) in [
        ("full sweep", temps.clone()),
        ("half sweep", temps[..temps.len() / 2].to_vec()),
    ] {
        let res = gvd_thermometry(&cfg.fiber, &cfg.quad, &sweep, &mc)?;
        println!(
            "{label}: period {:.2} +/- {:.2} K, dbeta2/dT = {:.6} +/- {:.1e} ps^2/km/K",
            res.fit.period,
            res.fit.period_stderr,
            to_ps2_per_km(res.dbeta2_dt),
            to_ps2_per_km(res.dbeta2_dt_stderr)
        );
    }

    let flat = load_config("flat")?;
    match gvd_thermometry(&flat.fiber, &flat.quad, &temps, &ScanMode::Analytic) {
        Ok(r) => println!("flat fiber: unexpected period {:.2} K", r.fit.period),
        Err(e) => println!("flat fiber: {e}"),
    }
    Ok(())
}
