//! Raman and spontaneous-FWM noise per detection gate against fiber
//! temperature, with and without an uncooled fiber segment.

use qfc_ramsey::config::load_config;
use qfc_ramsey::noise::thermal_occupation;
use qfc_ramsey::noise::ThermalEnv;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["paper-cryo", "room-temp"] {
        let cfg = load_config(name)?;
        let nb = cfg.noise.as_ref().expect("preset has a noise block");
        println!("{name} (uncooled length {} m)", nb.model.warm_length);
        println!(
            "{:>7} {:>11} {:>11} {:>11} {:>11}",
            "T (K)", "raman", "raman warm", "sfwm", "total"
        );
        for &t in &nb.temps {
            let r = nb.model.evaluate(&cfg.fiber, &cfg.quad, cfg.fwm.gamma, cfg.temp, t)?;
            println!(
                "{:>7.1} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
                t, r.raman_cold, r.raman_warm, r.sfwm, r.total
            );
        }
        println!();
    }
    let shift = 41e12;
    for t in [300.0, 77.0, 4.0] {
        println!(
            "phonon occupation at 41 THz, {t:>5} K: {:.3e}",
            thermal_occupation(shift, ThermalEnv::new(t)?)?
        );
    }
    Ok(())
}
