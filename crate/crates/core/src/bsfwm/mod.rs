//! Bragg-scattering four-wave mixing as a rotation on the frequency qubit.
//!
//! Two pumps `E₁`, `E₂` detuned by `δν` couple the signal and idler modes
//! with strength `κ = 2γ√(P₁P₂)e^{iθ}`. Over a length `L` with phase
//! mismatch `δk` the two-mode solution is
//!
//! ```text
//! g = √(|κ|² + δk²)
//! M = [[cos gL − i(δk/g) sin gL,   i(κ/g) sin gL          ],
//!      [i(κ*/g) sin gL,            cos gL + i(δk/g) sin gL]]
//! ```
//!
//! which at `δk = 0` is a rotation by polar angle `α = 2|κ|L` on the Bloch
//! sphere, and whose `|M₁₂|²` is the usual `(|κ|/g)² sin²(gL)` conversion
//! efficiency.

mod ladder;

pub use ladder::{ladder_simulate, min_ladder_steps, LadderOutcome, MAX_PHASE_PER_STEP};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::TransferMatrix;
use crate::units::db_to_power_factor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpConfig {
    /// Pump powers (W).
    pub p1: f64,
    pub p2: f64,
    /// Relative pump phase θ (rad).
    pub theta: f64,
    /// Pump wavelengths (m).
    pub lambda1: f64,
    pub lambda2: f64,
    /// Attenuation suffered by both pumps between successive passes (dB).
    pub loss_db: f64,
}

impl PumpConfig {
    pub fn new(p1: f64, p2: f64, theta: f64, lambda1: f64, lambda2: f64, loss_db: f64) -> Result<Self> {
        let cfg = Self {
            p1,
            p2,
            theta,
            lambda1,
            lambda2,
            loss_db,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Equal powers on both pumps.
    pub fn balanced(power: f64, theta: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(power, power, theta, lambda1, lambda2, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p1 > 0.0 && self.p1.is_finite()) {
            return Err(Error::invalid("p1", format!("pump power must be > 0, got {}", self.p1)));
        }
        if !(self.p2 > 0.0 && self.p2.is_finite()) {
            return Err(Error::invalid("p2", format!("pump power must be > 0, got {}", self.p2)));
        }
        if !(self.lambda1 > 0.0 && self.lambda2 > 0.0) || self.lambda1 == self.lambda2 {
            return Err(Error::invalid(
                "lambda1/lambda2",
                "pump wavelengths must be positive and distinct",
            ));
        }
        if !(self.loss_db >= 0.0) {
            return Err(Error::invalid("loss_db", format!("must be >= 0, got {}", self.loss_db)));
        }
        Ok(())
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        Self { theta, ..*self }
    }

    pub fn with_power(&self, power: f64) -> Self {
        Self {
            p1: power,
            p2: power,
            ..*self
        }
    }

    /// Pumps after one pass through the lossy delay element: both powers
    /// scaled by `10^(-loss_db/10)`.
    pub fn attenuated(&self) -> Self {
        let f = db_to_power_factor(self.loss_db);
        Self {
            p1: self.p1 * f,
            p2: self.p2 * f,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwmParams {
    /// Nonlinear coefficient γ (1/(W·m)).
    pub gamma: f64,
    /// Interaction length (m).
    pub length: f64,
}

impl FwmParams {
    pub fn new(gamma: f64, length: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("length", format!("must be > 0, got {length}")));
        }
        Ok(Self { gamma, length })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    /// Complex coupling κ (1/m).
    pub kappa: C64,
    /// Phase mismatch δk (1/m).
    pub delta_k: f64,
}

impl Coupling {
    pub fn new(kappa: C64, delta_k: f64) -> Self {
        Self { kappa, delta_k }
    }

    pub fn uncoupled(delta_k: f64) -> Self {
        Self {
            kappa: C64::new(0.0, 0.0),
            delta_k,
        }
    }

    /// Generalized Rabi wavenumber `g = √(|κ|² + δk²)`.
    pub fn rabi_wavenumber(&self) -> f64 {
        self.kappa.norm().hypot(self.delta_k)
    }
}

pub fn make_coupling(pump: &PumpConfig, fwm: &FwmParams, delta_k: f64) -> Coupling {
    let magnitude = 2.0 * fwm.gamma * (pump.p1 * pump.p2).sqrt();
    Coupling {
        kappa: C64::from_polar(magnitude, pump.theta),
        delta_k,
    }
}

pub fn transfer_matrix(c: &Coupling, length: f64) -> Result<TransferMatrix> {
    if !(length > 0.0) {
        return Err(Error::invalid("length", format!("must be > 0, got {length}")));
    }
    let g = c.rabi_wavenumber();
    if g == 0.0 {
        return Ok(TransferMatrix::identity());
    }
    let (s, co) = (g * length).sin_cos();
    let i = C64::new(0.0, 1.0);
    let detune = c.delta_k / g * s;
    Ok(TransferMatrix::from_unitary([
        [C64::new(co, -detune), i * c.kappa / g * s],
        [i * c.kappa.conj() / g * s, C64::new(co, detune)],
    ]))
}

/// Probability that a photon entering one mode leaves in the other.
pub fn conversion_efficiency(c: &Coupling, length: f64) -> f64 {
    let k2 = c.kappa.norm_sqr();
    let g2 = k2 + c.delta_k * c.delta_k;
    if g2 == 0.0 {
        return 0.0;
    }
    let s = (g2.sqrt() * length).sin();
    k2 / g2 * s * s
}

/// Per-pump power (equal pumps, δk = 0) producing a polar rotation `angle`
/// on the Bloch sphere. The rotation angle is `α = 2|κ|L = 4γPL`, so a π/2
/// pulse needs `γPL = π/8`.
pub fn power_for_rotation(angle: f64, fwm: &FwmParams) -> Result<f64> {
    if !(angle > 0.0 && angle <= std::f64::consts::PI) {
        return Err(Error::invalid("angle", format!("must be in (0, π], got {angle}")));
    }
    Ok(angle / (4.0 * fwm.gamma * fwm.length))
}

/// Polar rotation angle `2|κ|L` delivered by a pump configuration.
pub fn rotation_angle(pump: &PumpConfig, fwm: &FwmParams) -> f64 {
    4.0 * fwm.gamma * (pump.p1 * pump.p2).sqrt() * fwm.length
}
