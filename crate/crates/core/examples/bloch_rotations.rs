//! Walk a photon around the Bloch sphere with single BS-FWM pulses and a
//! free-space phase delay.

use std::f64::consts::PI;

use qfc_ramsey::bsfwm::{make_coupling, power_for_rotation, transfer_matrix, FwmParams, PumpConfig};
use qfc_ramsey::qubit::{apply, bloch_coords, phase_rotation, populations, BichromaticState};

fn main() -> qfc_ramsey::Result<()> {
    let fwm = FwmParams::new(PI / 16.0 / 100.0, 100.0)?;
    let start = BichromaticState::signal();

    println!("{:>10} {:>8} {:>8} {:>8} {:>8}", "rotation", "x", "y", "z", "p_i");
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let angle = frac * PI;
        let power = power_for_rotation(angle, &fwm)?;
        let pump = PumpConfig::balanced(power, 0.0, 1551.7e-9, 1558.1e-9)?;
        let u = transfer_matrix(&make_coupling(&pump, &fwm, 0.0), fwm.length)?;
        let out = apply(&u, &start);
        let b = bloch_coords(&out);
        println!(
            "{:>8.2}pi {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            frac,
            b.x,
            b.y,
            b.z,
            populations(&out).p_i
        );
    }

    // equator: a pi/2 pulse followed by free evolution
    let pump = PumpConfig::balanced(power_for_rotation(PI / 2.0, &fwm)?, 0.0, 1551.7e-9, 1558.1e-9)?;
    let half = apply(&transfer_matrix(&make_coupling(&pump, &fwm, 0.0), fwm.length)?, &start);
    println!("\nphase delay on the equator");
    for k in 0..4 {
        let phi = k as f64 * PI / 2.0;
        let b = bloch_coords(&phase_rotation(&half, phi));
        println!("phi = {:.2} rad -> ({:+.4}, {:+.4}, {:+.4})", phi, b.x, b.y, b.z);
    }
    Ok(())
}
