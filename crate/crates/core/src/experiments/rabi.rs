use serde::{Deserialize, Serialize};

use super::{run_points, ScanMode, ScanResult};
use crate::bsfwm::{ladder_simulate, min_ladder_steps, transfer_matrix, Coupling, FwmParams};
use crate::dispersion::{ladder_mismatches, phase_mismatch, FiberModel, FrequencyQuad};
use crate::error::{Error, Result};
use crate::qubit::{apply, populations, BichromaticState, Populations};

/// Frequency-ladder settings for Rabi scans with higher-order leakage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub n_modes: usize,
    /// Replaces the dispersion-derived mismatch of the down-conversion pair
    /// (1/m, lower→upper).
    pub competitor_mismatch: Option<f64>,
    /// Target phase advance per RK4 step (rad).
    pub phase_per_step: f64,
}

impl Default for LadderSpec {
    fn default() -> Self {
        Self {
            n_modes: 3,
            competitor_mismatch: None,
            phase_per_step: 0.01,
        }
    }
}

fn rabi_populations(
    power: f64,
    fwm: &FwmParams,
    quad: &FrequencyQuad,
    fiber: &FiberModel,
    temp: f64,
    ladder: Option<&LadderSpec>,
) -> Result<Populations> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::invalid("power", format!("must be > 0, got {power}")));
    }
    let kappa = 2.0 * fwm.gamma * power;
    let signal = BichromaticState::signal();
    match ladder {
        None => {
            let dk = phase_mismatch(fiber, quad, temp)?;
            let m = transfer_matrix(&Coupling::new(kappa.into(), dk), fwm.length)?;
            Ok(populations(&apply(&m, &signal)))
        }
        Some(spec) => {
            let mut mis = ladder_mismatches(fiber, quad, temp, spec.n_modes)?;
            if let Some(d) = spec.competitor_mismatch {
                mis[spec.n_modes / 2 - 1] = d;
            }
            let couplings: Vec<_> = mis.iter().map(|&dk| Coupling::new(kappa.into(), dk)).collect();
            let steps = min_ladder_steps(&couplings, fwm.length, spec.phase_per_step);
            let out = ladder_simulate(&signal, spec.n_modes, &couplings, fwm.length, steps)?;
            Ok(populations(&out.to_state()))
        }
    }
}

/// Conversion to `ν_i` against pump power (W, applied to each pump).
pub fn rabi_scan(
    powers: &[f64],
    fwm: &FwmParams,
    quad: &FrequencyQuad,
    fiber: &FiberModel,
    temp: f64,
    ladder: Option<&LadderSpec>,
    mode: &ScanMode,
) -> Result<ScanResult> {
    if powers.is_empty() {
        return Err(Error::invalid("powers", "empty sweep"));
    }
    let points = run_points(powers, mode, |p| rabi_populations(p, fwm, quad, fiber, temp, ladder))?;
    Ok(ScanResult {
        x_label: "pump_power_w".into(),
        points,
    })
}
