use std::f64::consts::{FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use super::{run_points, ScanMode, ScanResult};
use crate::bsfwm::{make_coupling, transfer_matrix, FwmParams, PumpConfig};
use crate::dispersion::{phase_mismatch, FiberModel, FrequencyQuad};
use crate::error::{Error, Result};
use crate::qubit::{apply, phase_rotation, populations, BichromaticState, Populations};
use crate::units::{db_to_power_factor, C};

/// Two-pulse interferometer with a free-space delay line between the pulses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamseyConfig {
    pub quad: FrequencyQuad,
    pub fwm: FwmParams,
    /// Pumps of the first pulse; `loss_db` is applied before the second.
    pub pump: PumpConfig,
    pub fiber: FiberModel,
    /// Fiber temperature (K).
    pub temp: f64,
    /// Extra free-space path Δx per scan point (m).
    pub delay_sweep: Vec<f64>,
    /// Photon-averaged peak conversion from the acceptance-bandwidth mismatch.
    pub bandwidth_cap: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl RamseyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delay_sweep.is_empty() {
            return Err(Error::invalid("delay_sweep", "empty sweep"));
        }
        if !(self.bandwidth_cap > 0.0 && self.bandwidth_cap <= 1.0) {
            return Err(Error::invalid(
                "bandwidth_cap",
                format!("must be in (0, 1], got {}", self.bandwidth_cap),
            ));
        }
        self.pump.validate()
    }

    pub fn pump_loss_db(&self) -> f64 {
        self.pump.loss_db
    }

    /// Δx of one fringe period, `c/δν`.
    pub fn fringe_period(&self) -> f64 {
        C / self.quad.delta_nu
    }
}

/// Free-space phase `φ = 2πΔx(ν_s − ν_i)/c`.
pub fn ramsey_phase(quad: &FrequencyQuad, dx: f64) -> f64 {
    TAU * dx * (quad.nus - quad.nui) / C
}

/// Output populations for free-evolution phase `phi`, starting in `|ν_s⟩`.
///
/// Only a fraction `bandwidth_cap` of the photon spectrum takes part in the
/// conversion; the rest stays at `ν_s` through both pulses.
pub fn ramsey_populations(cfg: &RamseyConfig, phi: f64) -> Result<Populations> {
    let dk = phase_mismatch(&cfg.fiber, &cfg.quad, cfg.temp)?;
    let u1 = transfer_matrix(
        &make_coupling(&cfg.pump.with_theta(cfg.theta1), &cfg.fwm, dk),
        cfg.fwm.length,
    )?;
    let u2 = transfer_matrix(
        &make_coupling(&cfg.pump.attenuated().with_theta(cfg.theta2), &cfg.fwm, dk),
        cfg.fwm.length,
    )?;
    let s = BichromaticState::signal();
    let out = apply(&u2, &phase_rotation(&apply(&u1, &s), phi));
    Ok(populations(&out).mix(&populations(&s), cfg.bandwidth_cap))
}

pub fn ramsey_scan(cfg: &RamseyConfig, mode: &ScanMode) -> Result<ScanResult> {
    cfg.validate()?;
    let points = run_points(&cfg.delay_sweep, mode, |dx| {
        ramsey_populations(cfg, ramsey_phase(&cfg.quad, dx))
    })?;
    Ok(ScanResult {
        x_label: "delay_m".into(),
        points,
    })
}

/// Closed-form fringe visibility of `p_s` for two nominal π/2 pulses, the
/// second weakened by `pump_loss_db`, with a fraction `bandwidth_cap` of the
/// photon taking part.
pub fn visibility_budget(pump_loss_db: f64, bandwidth_cap: f64) -> Result<f64> {
    if !(pump_loss_db >= 0.0) {
        return Err(Error::invalid("pump_loss_db", "must be >= 0"));
    }
    if !(bandwidth_cap > 0.0 && bandwidth_cap <= 1.0) {
        return Err(Error::invalid("bandwidth_cap", "must be in (0, 1]"));
    }
    let a1 = FRAC_PI_4;
    let a2 = FRAC_PI_4 * db_to_power_factor(pump_loss_db);
    let (s1, c1) = a1.sin_cos();
    let (s2, c2) = a2.sin_cos();
    // p_s(ψ) = cap·(mean − amp·cos ψ) + (1 − cap)
    let mean = c1 * c1 * c2 * c2 + s1 * s1 * s2 * s2;
    let amp = 2.0 * s1 * c1 * s2 * c2;
    Ok(bandwidth_cap * amp / (bandwidth_cap * mean + 1.0 - bandwidth_cap))
}
