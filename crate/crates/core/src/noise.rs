//! Spurious photons at the qubit frequencies: anti-Stokes spontaneous Raman
//! scattering from both pumps and spontaneous four-wave mixing.
//!
//! Absolute prefactors of both processes are calibration inputs; the shapes
//! (thermal occupation, gain curve, sinc² phase matching) are physical.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::dispersion::{beta2_at, FiberModel, FrequencyQuad};
use crate::error::{Error, Result};
use crate::units::{BOLTZMANN, PLANCK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnv {
    pub temp: f64,
}

impl ThermalEnv {
    pub fn new(temp: f64) -> Result<Self> {
        if !(temp >= 0.0 && temp.is_finite()) {
            return Err(Error::invalid("temp", format!("must be >= 0 K, got {temp}")));
        }
        Ok(Self { temp })
    }
}

/// Bose–Einstein phonon occupation at a Raman shift (Hz).
pub fn thermal_occupation(shift: f64, env: ThermalEnv) -> Result<f64> {
    if !(shift > 0.0) {
        return Err(Error::invalid("shift", format!("must be > 0, got {shift}")));
    }
    if env.temp == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (PLANCK * shift / (BOLTZMANN * env.temp)).exp_m1())
}

// Relative silica Raman gain vs shift (THz), peak normalised to 1 at 13.2 THz.
const SILICA: &[(f64, f64)] = &[
    (0.0, 0.0),
    (1.0, 0.04),
    (2.0, 0.09),
    (3.0, 0.14),
    (4.0, 0.19),
    (5.0, 0.25),
    (6.0, 0.31),
    (7.0, 0.38),
    (8.0, 0.46),
    (9.0, 0.56),
    (10.0, 0.66),
    (11.0, 0.78),
    (12.0, 0.92),
    (13.2, 1.0),
    (14.0, 0.97),
    (14.7, 0.95),
    (15.0, 0.93),
    (16.0, 0.78),
    (17.0, 0.55),
    (18.0, 0.40),
    (19.0, 0.33),
    (20.0, 0.30),
    (21.0, 0.29),
    (22.0, 0.27),
    (23.0, 0.25),
    (24.0, 0.26),
    (25.0, 0.22),
    (26.0, 0.15),
    (27.0, 0.10),
    (28.0, 0.07),
    (29.0, 0.06),
    (30.0, 0.07),
    (31.0, 0.09),
    (32.0, 0.11),
    (33.0, 0.12),
    (34.0, 0.10),
    (35.0, 0.07),
    (36.0, 0.045),
    (37.0, 0.03),
    (38.0, 0.022),
    (39.0, 0.017),
    (40.0, 0.013),
    (42.0, 0.008),
    (44.0, 0.005),
    (46.0, 0.003),
    (48.0, 0.002),
    (50.0, 0.0),
];

/// Sampled Raman gain curve, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanGainCurve {
    shifts: Vec<f64>,
    gains: Vec<f64>,
}

impl RamanGainCurve {
    /// Samples as `(shift Hz, gain)`. A `(0, 0)` point is prepended when absent.
    pub fn new(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.first().map(|s| s.0) != Some(0.0) {
            samples.insert(0, (0.0, 0.0));
        }
        if samples[0].1 != 0.0 {
            return Err(Error::invalid("raman gain", "gain must vanish at zero shift"));
        }
        if samples.len() < 2 {
            return Err(Error::invalid("raman gain", "need at least one non-zero shift"));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("raman gain", "shifts must be strictly increasing"));
            }
        }
        if samples.iter().any(|s| !(s.1 >= 0.0 && s.1.is_finite())) {
            return Err(Error::invalid("raman gain", "gains must be finite and non-negative"));
        }
        let (shifts, gains) = samples.into_iter().unzip();
        Ok(Self { shifts, gains })
    }

    /// Built-in fused-silica curve.
    pub fn silica() -> Self {
        Self {
            shifts: SILICA.iter().map(|s| s.0 * 1e12).collect(),
            gains: SILICA.iter().map(|s| s.1).collect(),
        }
    }

    /// Read `shift_THz,gain_relative` CSV (header row required).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let what = "Raman gain CSV";
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse {
                what,
                line: 1,
                reason: e.to_string(),
            })?
            .clone();
        let names: Vec<String> = headers.iter().map(str::to_ascii_lowercase).collect();
        if names != ["shift_thz", "gain_relative"] {
            return Err(Error::Parse {
                what,
                line: 1,
                reason: format!("expected header `shift_THz,gain_relative`, found `{}`", names.join(",")),
            });
        }
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                what,
                line,
                reason: e.to_string(),
            })?;
            let num = |k: usize| -> Result<f64> {
                rec.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
                    what,
                    line,
                    reason: format!("column {} is not a number", k + 1),
                })
            };
            samples.push((num(0)? * 1e12, num(1)?));
        }
        Self::new(samples)
    }

    /// Largest sampled shift (Hz).
    pub fn support(&self) -> f64 {
        *self.shifts.last().expect("non-empty")
    }

    pub fn peak_shift(&self) -> f64 {
        let k = (0..self.gains.len())
            .max_by(|&a, &b| self.gains[a].total_cmp(&self.gains[b]))
            .expect("non-empty");
        self.shifts[k]
    }

    /// Interpolated gain, `None` outside `[0, support]`.
    pub fn gain(&self, shift: f64) -> Option<f64> {
        let s = shift.abs();
        if s > self.support() {
            return None;
        }
        let k = self.shifts.partition_point(|&x| x <= s).clamp(1, self.shifts.len() - 1);
        let (x0, x1) = (self.shifts[k - 1], self.shifts[k]);
        let (y0, y1) = (self.gains[k - 1], self.gains[k]);
        Some(y0 + (y1 - y0) * (s - x0) / (x1 - x0))
    }
}

impl Default for RamanGainCurve {
    fn default() -> Self {
        Self::silica()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanRate {
    pub rate: f64,
    /// Set when the shift fell outside the gain curve and the rate was zeroed.
    pub outside_support: bool,
}

/// Anti-Stokes Raman rate in gain-curve units: `g(shift)·P·L·n̄(shift, T)`.
pub fn raman_anti_stokes_rate(
    shift: f64,
    env: ThermalEnv,
    pump_power: f64,
    gain: &RamanGainCurve,
    length: f64,
) -> Result<RamanRate> {
    if !(pump_power >= 0.0) {
        return Err(Error::invalid("pump_power", format!("must be >= 0, got {pump_power}")));
    }
    if !(length >= 0.0) {
        return Err(Error::invalid("length", format!("must be >= 0, got {length}")));
    }
    let n = thermal_occupation(shift, env)?;
    Ok(match gain.gain(shift) {
        Some(g) => RamanRate {
            rate: g * pump_power * length * n,
            outside_support: false,
        },
        None => RamanRate {
            rate: 0.0,
            outside_support: true,
        },
    })
}

/// Spontaneous FWM rate `(γP·L)²·sinc²(δk_s·L/2)` with `δk_s = β₂(2πΔν)²`.
pub fn spontaneous_fwm_rate(detuning: f64, beta2: f64, gamma_p: f64, length: f64) -> Result<f64> {
    if !(detuning > 0.0) {
        return Err(Error::invalid("detuning", format!("must be > 0, got {detuning}")));
    }
    let x = beta2 * (std::f64::consts::TAU * detuning).powi(2) * length / 2.0;
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    Ok((gamma_p * length).powi(2) * sinc * sinc)
}

/// Upper envelope of [`spontaneous_fwm_rate`] in the mismatched tail,
/// `(2γP / (β₂(2πΔν)²))²`.
pub fn spontaneous_fwm_envelope(detuning: f64, beta2: f64, gamma_p: f64) -> f64 {
    let dk = beta2 * (std::f64::consts::TAU * detuning).powi(2);
    (2.0 * gamma_p / dk).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub raman_rate: f64,
    pub sfwm_rate: f64,
    pub per_gate: f64,
}

pub fn noise_per_gate(raman_rate: f64, sfwm_rate: f64, gate: f64, band: f64) -> Result<NoiseBudget> {
    if !(gate > 0.0) {
        return Err(Error::invalid("gate", format!("must be > 0, got {gate}")));
    }
    if !(band > 0.0) {
        return Err(Error::invalid("band", format!("must be > 0, got {band}")));
    }
    if !(raman_rate >= 0.0 && sfwm_rate >= 0.0) {
        return Err(Error::invalid("rates", "must be non-negative"));
    }
    Ok(NoiseBudget {
        raman_rate,
        sfwm_rate,
        per_gate: (raman_rate + sfwm_rate) * band * gate,
    })
}

/// Calibrated noise model for a pumped fiber with an optional uncooled
/// segment held at `warm_temp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Raman prefactor (rate per gain·W·m).
    pub raman_scale: f64,
    /// sFWM prefactor.
    pub sfwm_coeff: f64,
    /// Power per pump (W).
    pub pump_power: f64,
    /// Length of fiber that cannot be cooled (m), part of the total length.
    pub warm_length: f64,
    pub warm_temp: f64,
    /// Detection gate (s).
    pub gate: f64,
    /// Filter bandwidth (Hz).
    pub band: f64,
    pub gain: RamanGainCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBreakdown {
    pub temp: f64,
    /// Raman from the temperature-controlled section (photons/gate).
    pub raman_cold: f64,
    /// Raman from the warm section (photons/gate).
    pub raman_warm: f64,
    pub sfwm: f64,
    pub total: f64,
    pub outside_support: bool,
}

impl NoiseModel {
    pub fn validate(&self, fiber: &FiberModel) -> Result<()> {
        if !(self.raman_scale >= 0.0 && self.sfwm_coeff >= 0.0) {
            return Err(Error::invalid("noise", "calibration constants must be >= 0"));
        }
        if !(self.pump_power > 0.0) {
            return Err(Error::invalid("pump_power", "must be > 0"));
        }
        if !(self.warm_length >= 0.0 && self.warm_length < fiber.length) {
            return Err(Error::invalid("warm_length", "must lie in [0, fiber length)"));
        }
        ThermalEnv::new(self.warm_temp)?;
        noise_per_gate(0.0, 0.0, self.gate, self.band).map(|_| ())
    }

    /// Noise with the cooled section at `temp`. The sFWM term depends only on
    /// the fiber's dispersion at `operating_temp`, not on `temp`.
    pub fn evaluate(
        &self,
        fiber: &FiberModel,
        quad: &FrequencyQuad,
        gamma: f64,
        operating_temp: f64,
        temp: f64,
    ) -> Result<NoiseBreakdown> {
        self.validate(fiber)?;
        let cold = ThermalEnv::new(temp)?;
        let warm = ThermalEnv::new(self.warm_temp)?;
        let cold_len = fiber.length - self.warm_length;
        let mut cold_rate = 0.0;
        let mut warm_rate = 0.0;
        let mut outside = false;
        for nu_p in [quad.nu1, quad.nu2] {
            let shift = quad.nus - nu_p;
            let c = raman_anti_stokes_rate(shift, cold, self.pump_power, &self.gain, cold_len)?;
            let w = raman_anti_stokes_rate(shift, warm, self.pump_power, &self.gain, self.warm_length)?;
            outside |= c.outside_support;
            cold_rate += c.rate;
            warm_rate += w.rate;
        }
        let pump_mean = 0.5 * (quad.nu1 + quad.nu2);
        let beta2 = beta2_at(fiber, pump_mean, operating_temp)?;
        let sfwm = self.sfwm_coeff
            * spontaneous_fwm_rate(quad.nus - pump_mean, beta2, gamma * 2.0 * self.pump_power, fiber.length)?;
        let per = self.band * self.gate;
        let raman_cold = self.raman_scale * cold_rate * per;
        let raman_warm = self.raman_scale * warm_rate * per;
        let sfwm = sfwm * per;
        Ok(NoiseBreakdown {
            temp,
            raman_cold,
            raman_warm,
            sfwm,
            total: raman_cold + raman_warm + sfwm,
            outside_support: outside,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{nm, ps2_per_km, ps4_per_km, thz};
    use proptest::prelude::*;

    #[test]
    fn occupation_limits() {
        assert_eq!(
            thermal_occupation(thz(40.0), ThermalEnv::new(0.0).unwrap()).unwrap(),
            0.0
        );
        let t = PLANCK * thz(10.0) / BOLTZMANN;
        let n = thermal_occupation(thz(10.0), ThermalEnv::new(t).unwrap()).unwrap();
        assert!((n - 0.581_976_706_869_326_4).abs() < 1e-12);
        assert!(thermal_occupation(0.0, ThermalEnv::new(300.0).unwrap()).is_err());
        assert!(ThermalEnv::new(-1.0).is_err());
    }

    #[test]
    fn occupation_regression_40thz_300k() {
        // 30-digit evaluation with the exact SI constants: x = 6.39899...
        let n = thermal_occupation(thz(40.0), ThermalEnv::new(300.0).unwrap()).unwrap();
        assert!((n / 1.666_005_98e-3 - 1.0).abs() < 1e-8, "{n}");
    }

    #[test]
    fn silica_curve_shape() {
        let g = RamanGainCurve::silica();
        assert_eq!(g.gain(0.0), Some(0.0));
        assert!((g.peak_shift() - thz(13.2)).abs() < 1.0);
        assert_eq!(g.gain(thz(13.2)), Some(1.0));
        assert!((g.gain(thz(13.6)).unwrap() - 0.985).abs() < 1e-12);
        assert_eq!(g.gain(thz(60.0)), None);
        assert!(g.gain(thz(40.0)).unwrap() < 0.02);
    }

    #[test]
    fn raman_outside_support_is_flagged() {
        let g = RamanGainCurve::silica();
        let r = raman_anti_stokes_rate(thz(55.0), ThermalEnv::new(300.0).unwrap(), 1.0, &g, 10.0).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(r.outside_support);
    }

    #[test]
    fn raman_detuning_suppression() {
        let g = RamanGainCurve::silica();
        let env = ThermalEnv::new(300.0).unwrap();
        let at = |s: f64| raman_anti_stokes_rate(s, env, 1.0, &g, 1.0).unwrap().rate;
        let expected = g.gain(thz(40.0)).unwrap() / g.gain(thz(13.0)).unwrap()
            * thermal_occupation(thz(40.0), env).unwrap()
            / thermal_occupation(thz(13.0), env).unwrap();
        assert!((at(thz(40.0)) / at(thz(13.0)) / expected - 1.0).abs() < 1e-12);
        assert!(at(thz(40.0)) < 1e-3 * at(thz(13.0)));
    }

    #[test]
    fn raman_vanishes_near_zero_kelvin() {
        let g = RamanGainCurve::silica();
        for s in [1.0, 5.0, 13.2, 30.0, 45.0] {
            let r = raman_anti_stokes_rate(thz(s), ThermalEnv::new(1e-6).unwrap(), 2.0, &g, 50.0).unwrap();
            assert_eq!(r.rate, 0.0);
        }
    }

    #[test]
    fn sfwm_limits() {
        assert_eq!(
            spontaneous_fwm_rate(thz(40.0), 0.0, 0.1, 50.0).unwrap(),
            (0.1f64 * 50.0).powi(2)
        );
        assert!(spontaneous_fwm_rate(0.0, 0.0, 0.1, 50.0).is_err());
        let r1 = spontaneous_fwm_envelope(thz(20.0), 1e-26, 0.05);
        let r2 = spontaneous_fwm_envelope(thz(40.0), 1e-26, 0.05);
        assert!((r1 / r2 / 16.0 - 1.0).abs() < 0.01);
        let a = spontaneous_fwm_rate(thz(40.0), -1e-26, 0.05, 69.0).unwrap();
        let b = spontaneous_fwm_rate(thz(40.0), -1e-26, 0.1, 69.0).unwrap();
        assert!((b / a / 4.0 - 1.0).abs() < 1e-12);
        assert!(a <= spontaneous_fwm_envelope(thz(40.0), -1e-26, 0.05) * (1.0 + 1e-12));
    }

    #[test]
    fn per_gate_arithmetic() {
        assert_eq!(noise_per_gate(0.0, 0.0, 4e-9, 2e12).unwrap().per_gate, 0.0);
        let b = noise_per_gate(1e-10, 0.0, 4e-9, 2e12).unwrap();
        assert!((b.per_gate - 1e-10 * 4e-9 * 2e12).abs() < 1e-24);
        assert!(noise_per_gate(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn csv_override() {
        let g = RamanGainCurve::from_csv("shift_THz,gain_relative\n5,0.5\n15,1.0\n30,0\n".as_bytes()).unwrap();
        assert_eq!(g.gain(0.0), Some(0.0));
        assert!((g.gain(thz(10.0)).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(g.peak_shift(), thz(15.0));
        assert!(RamanGainCurve::from_csv("shift_THz,gain_relative\n5,-1\n".as_bytes()).is_err());
        assert!(RamanGainCurve::from_csv("5,1\n6,2\n".as_bytes()).is_err());
    }

    fn cryo() -> (NoiseModel, FiberModel, FrequencyQuad, f64) {
        let fiber = FiberModel::new(
            nm(1421.0),
            0.57e-39,
            ps4_per_km(-3.84e-4),
            ps2_per_km(0.0014),
            0.0,
            69.0,
            295.0,
        )
        .unwrap();
        let quad = FrequencyQuad::from_wavelengths(nm(1551.7), nm(1558.1), nm(1283.5)).unwrap();
        let model = NoiseModel {
            raman_scale: 8.7465e-4,
            sfwm_coeff: 11.681,
            pump_power: 2.0,
            warm_length: 2.0,
            warm_temp: 295.0,
            gate: 4e-9,
            band: crate::units::bandwidth_wavelength_to_frequency(nm(12.0), nm(1283.5)),
            gain: RamanGainCurve::silica(),
        };
        (model, fiber, quad, std::f64::consts::PI / (16.0 * 69.0))
    }

    #[test]
    fn cryo_floor_near_one_per_thousand_gates() {
        let (m, f, q, gamma) = cryo();
        let b = m.evaluate(&f, &q, gamma, 77.0, 77.0).unwrap();
        assert!((b.total - 1e-3).abs() < 2e-4, "{b:?}");
        let room = NoiseModel { warm_length: 0.0, ..m };
        assert!(room.evaluate(&f, &q, gamma, 77.0, 295.0).unwrap().total > 10.0 * b.total);
    }

    #[test]
    fn zero_kelvin_without_warm_segment_is_sfwm_only() {
        let (m, f, q, gamma) = cryo();
        let m = NoiseModel { warm_length: 0.0, ..m };
        let b = m.evaluate(&f, &q, gamma, 77.0, 0.0).unwrap();
        assert_eq!(b.total, b.sfwm);
        assert_eq!(b.sfwm, m.evaluate(&f, &q, gamma, 77.0, 300.0).unwrap().sfwm);
    }

    proptest! {
        #[test]
        fn raman_increases_with_temperature(shift in 0.5f64..49.0, t in 1.0f64..400.0, dt in 0.1f64..100.0) {
            let g = RamanGainCurve::silica();
            let r = |t: f64| raman_anti_stokes_rate(thz(shift), ThermalEnv::new(t).unwrap(), 1.0, &g, 10.0).unwrap().rate;
            prop_assert!(r(t + dt) > r(t));
        }

        #[test]
        fn raman_ratio_is_occupation_ratio(shift in 0.5f64..49.0, t1 in 5.0f64..400.0, t2 in 5.0f64..400.0) {
            let g = RamanGainCurve::silica();
            let e1 = ThermalEnv::new(t1).unwrap();
            let e2 = ThermalEnv::new(t2).unwrap();
            let r1 = raman_anti_stokes_rate(thz(shift), e1, 1.5, &g, 20.0).unwrap().rate;
            let r2 = raman_anti_stokes_rate(thz(shift), e2, 1.5, &g, 20.0).unwrap().rate;
            let n = thermal_occupation(thz(shift), e1).unwrap() / thermal_occupation(thz(shift), e2).unwrap();
            prop_assert!((r1 / r2 / n - 1.0).abs() < 1e-12);
        }

        #[test]
        fn power_scaling(p in 0.01f64..10.0, shift in 1.0f64..45.0) {
            let g = RamanGainCurve::silica();
            let env = ThermalEnv::new(200.0).unwrap();
            let r1 = raman_anti_stokes_rate(thz(shift), env, p, &g, 5.0).unwrap().rate;
            let r2 = raman_anti_stokes_rate(thz(shift), env, 2.0 * p, &g, 5.0).unwrap().rate;
            prop_assert!((r2 / r1 - 2.0).abs() < 2e-12);
            let s1 = spontaneous_fwm_rate(thz(shift), 2e-27, p * 1e-2, 30.0).unwrap();
            let s2 = spontaneous_fwm_rate(thz(shift), 2e-27, 2.0 * p * 1e-2, 30.0).unwrap();
            prop_assert!((s2 / s1 - 4.0).abs() < 4e-12);
        }
    }
}
