//! Fiber dispersion: phase mismatch of the wanted and competing processes,
//! the acceptance bandwidth, and a zero-GVD fit from time-of-flight data.

use qfc_ramsey::config::load_config;
use qfc_ramsey::dispersion::{
    acceptance_bandwidth, beta2_at, down_conversion_mismatch, phase_mismatch, zero_gvd_from_time_of_flight, TofSample,
};
use qfc_ramsey::units::{to_ps2_per_km, C};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load_config("paper-cryo")?;
    let (f, q) = (&cfg.fiber, &cfg.quad);
    let kappa = 2.0 * cfg.fwm.gamma * cfg.pump.p1;
    for temp in [295.0, 200.0, 77.0] {
        let up = phase_mismatch(f, q, temp)?;
        let down = down_conversion_mismatch(f, q, temp)?;
        let bw = acceptance_bandwidth(f, q, kappa, temp)
            .map(|b| format!("{:.1} GHz", b * 1e-9))
            .unwrap_or_else(|e| e.to_string());
        println!(
            "T = {temp:>5} K  beta2(nu0) = {:+.4} ps^2/km  dk_up = {up:+.3e}  dk_down = {down:+.3e}  bandwidth {bw}",
            to_ps2_per_km(beta2_at(f, q.nu0, temp)?)
        );
    }

    // synthetic group delay with an extremum at 1421 nm
    let samples: Vec<TofSample> = (0..=38)
        .map(|k| {
            let wavelength = 1260e-9 + k as f64 * 10e-9;
            let x = (wavelength - 1421e-9) / 1e-9;
            TofSample {
                wavelength,
                delay: 340e-9 + 2.1e-15 * x * x - 1.0e-18 * x * x * x + 0.5e-13 * ((k * 7 % 5) as f64 - 2.0),
            }
        })
        .collect();
    let fit = zero_gvd_from_time_of_flight(&samples)?;
    println!(
        "\ntime-of-flight fit: zero-GVD at {:.2} nm ({:.3} THz), residual {:.2e} s",
        fit.lambda0 * 1e9,
        C / fit.lambda0 * 1e-12,
        fit.residual_rms
    );
    Ok(())
}
