//! Physical constants and unit conversions.
//!
//! Everything inside the crate is SI (Hz, s, m, W, K). The helpers here are
//! used at the configuration / CLI boundary where values arrive in lab units
//! (nm, THz, ps²/km, dB).

/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;
/// Planck constant (J·s), exact since the 2019 SI redefinition.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant (J/K), exact since the 2019 SI redefinition.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Optical frequency (Hz) of a vacuum wavelength (m).
pub fn wavelength_to_frequency(lambda_m: f64) -> f64 {
    C / lambda_m
}

/// Vacuum wavelength (m) of an optical frequency (Hz).
pub fn frequency_to_wavelength(nu_hz: f64) -> f64 {
    C / nu_hz
}

pub fn nm(x: f64) -> f64 {
    x * 1e-9
}

pub fn thz(x: f64) -> f64 {
    x * 1e12
}

/// ps²/km → s²/m.
pub fn ps2_per_km(x: f64) -> f64 {
    x * 1e-27
}

/// s²/m → ps²/km.
pub fn to_ps2_per_km(x: f64) -> f64 {
    x * 1e27
}

/// ps⁴/km → s⁴/m.
pub fn ps4_per_km(x: f64) -> f64 {
    x * 1e-51
}

/// Linear power factor for an attenuation in dB.
pub fn db_to_power_factor(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Convert a spectral width given in wavelength (m) at centre wavelength
/// `lambda_m` into frequency (Hz).
pub fn bandwidth_wavelength_to_frequency(width_m: f64, lambda_m: f64) -> f64 {
    C * width_m / (lambda_m * lambda_m)
}
