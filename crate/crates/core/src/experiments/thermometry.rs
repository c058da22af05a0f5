use std::f64::consts::{FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{fit_fringes, run_points, FringeFit, ScanMode, ScanResult};
use crate::bsfwm::{transfer_matrix, Coupling};
use crate::dispersion::{beta2_at, FiberModel, FrequencyQuad};
use crate::error::{Error, Result};
use crate::qubit::{apply, phase_rotation, populations, BichromaticState, Populations};

/// `δν(2Δν + δν)` with `Δν = |ν_s − ν₀|` (Hz²).
fn spectral_factor(quad: &FrequencyQuad) -> f64 {
    quad.delta_nu * (2.0 * quad.signal_to_center() + quad.delta_nu)
}

fn phase_rate(fiber: &FiberModel, quad: &FrequencyQuad) -> Result<f64> {
    let b2 = beta2_at(fiber, quad.nu0, fiber.temp_ref)?;
    Ok(4.0 * PI * PI * spectral_factor(quad) * (fiber.dbeta2_dt * fiber.length + b2 * fiber.dl_dt))
}

/// Dispersive qubit phase of co-propagating fields at fiber temperature `temp`,
/// relative to `temp_ref`.
pub fn thermal_phase(fiber: &FiberModel, quad: &FrequencyQuad, temp: f64) -> Result<f64> {
    Ok(phase_rate(fiber, quad)? * (temp - fiber.temp_ref))
}

/// Fringe period in temperature (K); infinite when the phase does not move.
pub fn thermometry_period(fiber: &FiberModel, quad: &FrequencyQuad) -> Result<f64> {
    Ok(TAU / phase_rate(fiber, quad)?.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermometryResult {
    pub scan: ScanResult,
    pub fit: FringeFit,
    /// Recovered dβ₂/dT (s²/m/K), thermal elongation neglected.
    pub dbeta2_dt: f64,
    pub dbeta2_dt_stderr: f64,
}

fn ideal_ramsey(phi: f64) -> Result<Populations> {
    let half = transfer_matrix(&Coupling::new(1.0.into(), 0.0), FRAC_PI_4)?;
    let s = BichromaticState::signal();
    Ok(populations(&apply(&half, &phase_rotation(&apply(&half, &s), phi))))
}

/// Scan the fiber temperature between two ideal π/2 pulses and invert the
/// fitted fringe period for dβ₂/dT.
pub fn gvd_thermometry(
    fiber: &FiberModel,
    quad: &FrequencyQuad,
    temps: &[f64],
    mode: &ScanMode,
) -> Result<ThermometryResult> {
    if temps.is_empty() {
        return Err(Error::invalid("temps", "empty sweep"));
    }
    let points = run_points(temps, mode, |t| ideal_ramsey(thermal_phase(fiber, quad, t)?))?;
    let scan = ScanResult {
        x_label: "temperature_k".into(),
        points,
    };
    let fit = fit_fringes(&scan)?;
    let denom = TAU * spectral_factor(quad) * fiber.length;
    let dbeta2_dt = 1.0 / (denom * fit.period);
    Ok(ThermometryResult {
        scan,
        fit,
        dbeta2_dt,
        dbeta2_dt_stderr: dbeta2_dt * fit.period_stderr / fit.period,
    })
}
