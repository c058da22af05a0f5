//! Ramsey interference between two pi/2 pulses, fitted for visibility and
//! period, compared with the closed-form visibility budget.

use qfc_ramsey::config::load_config;
use qfc_ramsey::experiments::{fit_fringes, ramsey_scan, visibility_budget, McSettings, RamseyConfig, ScanMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["ideal", "fig5", "matched"] {
        let cfg = load_config(name)?;
        let r = cfg.ramsey.as_ref().expect("preset has a ramsey block");
        let rc = RamseyConfig {
            quad: cfg.quad,
            fwm: cfg.fwm,
            pump: cfg.pump,
            fiber: cfg.fiber,
            temp: cfg.temp,
            delay_sweep: r.delays.clone(),
            bandwidth_cap: r.bandwidth_cap,
            theta1: r.theta1,
            theta2: r.theta2,
        };
        let analytic = fit_fringes(&ramsey_scan(&rc, &ScanMode::Analytic)?)?;
        let mc = ScanMode::MonteCarlo(McSettings {
            source: cfg.source.expect("preset has a source"),
            detector: cfg.detector,
            noise_per_gate: 0.0,
            n_gates: 20_000,
            seed: cfg.seed,
        });
        let sampled = fit_fringes(&ramsey_scan(&rc, &mc)?)?;
        println!(
            "{name:>8}: loss {:.1} dB, cap {:.2} | budget V = {:.4} | fit V = {:.4} | MC V = {:.4} +/- {:.4} | period {:.4} mm (c/dnu {:.4} mm)",
            rc.pump_loss_db(),
            rc.bandwidth_cap,
            visibility_budget(rc.pump_loss_db(), rc.bandwidth_cap)?,
            analytic.visibility,
            sampled.visibility,
            sampled.visibility_stderr,
            analytic.period * 1e3,
            rc.fringe_period() * 1e3
        );
    }
    Ok(())
}
