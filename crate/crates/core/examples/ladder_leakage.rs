//! Higher-order leakage: a three-mode frequency ladder where the competing
//! conversion caps the Rabi peak below unity.

use qfc_ramsey::config::load_config;
use qfc_ramsey::dispersion::ladder_mismatches;
use qfc_ramsey::experiments::{rabi_scan, LadderSpec, ScanMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load_config("paper-cryo")?;
    let mis = ladder_mismatches(&cfg.fiber, &cfg.quad, cfg.temp, 3)?;
    println!("physical ladder mismatches at {} K: {:?} 1/m", cfg.temp, mis);

    let powers: Vec<f64> = (1..=80).map(|k| 0.1 * k as f64).collect();
    let two_mode = rabi_scan(
        &powers,
        &cfg.fwm,
        &cfg.quad,
        &cfg.fiber,
        cfg.temp,
        None,
        &ScanMode::Analytic,
    )?;
    let peak = |s: &qfc_ramsey::experiments::ScanResult| s.p_i().into_iter().fold(0.0, f64::max);
    println!("two-mode peak conversion: {:.4}", peak(&two_mode));

    for competitor in [None, Some(0.1), Some(0.0389), Some(0.0)] {
        let spec = LadderSpec {
            n_modes: 3,
            competitor_mismatch: competitor,
            phase_per_step: 0.01,
        };
        let scan = rabi_scan(
            &powers,
            &cfg.fwm,
            &cfg.quad,
            &cfg.fiber,
            cfg.temp,
            Some(&spec),
            &ScanMode::Analytic,
        )?;
        let label = competitor.map_or("physical".to_string(), |m| format!("{m} 1/m"));
        println!("ladder peak with competitor mismatch {label:>10}: {:.4}", peak(&scan));
    }
    Ok(())
}
