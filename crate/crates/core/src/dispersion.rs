//! Fiber dispersion and phase matching for the Bragg-scattering quad.
//!
//! GVD is modelled as affine in optical frequency around the zero-GVD point
//! with a constant fourth-order term:
//!
//! ```text
//! β₂(ν, T) = slope·(ν − ν(λ₀)) + dβ₂/dT·(T − T_ref)
//! ```
//!
//! The up-conversion mismatch is the fourth-order expansion around the quad's
//! mean frequency `ν₀`:
//!
//! ```text
//! δk = β₂(ν₀)(δω² + δωΔω) + β₄/12 (δω⁴ + δωΔω(3/2 δωΔω + Δω²/2 + 2δω²))
//! ```
//!
//! with `δω = 2π·δν` (pump–pump) and `Δω = 2π·Δν` (nearest pump to photon).
//! The down-conversion competitor uses the same expression with `δω → −δω`.

use std::f64::consts::{PI, TAU};
use std::io::Read;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bsfwm::{conversion_efficiency, Coupling};
use crate::error::{Error, Result};
use crate::units::{wavelength_to_frequency, C};

/// Validity range of the dispersion model: 1.0 µm to 2.0 µm.
pub const NU_MIN: f64 = C / 2.0e-6;
pub const NU_MAX: f64 = C / 1.0e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberModel {
    /// Zero-GVD wavelength at `temp_ref` (m).
    pub lambda0: f64,
    /// dβ₂/dν at ν(λ₀) (s²/m per Hz).
    pub beta2_slope: f64,
    /// β₄ (s⁴/m).
    pub beta4: f64,
    /// Thermal coefficient of β₂ (s²/m/K).
    pub dbeta2_dt: f64,
    /// Thermal elongation dL/dT (m/K).
    pub dl_dt: f64,
    /// Fiber length (m).
    pub length: f64,
    /// Reference temperature for `lambda0` (K).
    pub temp_ref: f64,
}

impl FiberModel {
    pub fn new(
        lambda0: f64,
        beta2_slope: f64,
        beta4: f64,
        dbeta2_dt: f64,
        dl_dt: f64,
        length: f64,
        temp_ref: f64,
    ) -> Result<Self> {
        let f = Self {
            lambda0,
            beta2_slope,
            beta4,
            dbeta2_dt,
            dl_dt,
            length,
            temp_ref,
        };
        f.validate()?;
        Ok(f)
    }

    /// Dispersion-free fiber of the given length (zero GVD everywhere).
    pub fn dispersionless(length: f64) -> Result<Self> {
        Self::new(1.421e-6, 0.0, 0.0, 0.0, 0.0, length, 295.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid("length", format!("must be > 0, got {}", self.length)));
        }
        if !(self.lambda0 > 1.2e-6 && self.lambda0 < 1.7e-6) {
            return Err(Error::invalid(
                "lambda0",
                format!("{:.1} nm outside (1200, 1700) nm", self.lambda0 * 1e9),
            ));
        }
        if !(self.temp_ref >= 0.0) {
            return Err(Error::invalid("temp_ref", "must be >= 0 K"));
        }
        Ok(())
    }

    pub fn nu_zero_gvd(&self) -> f64 {
        wavelength_to_frequency(self.lambda0)
    }

    /// True when every dispersion coefficient vanishes, so `δk ≡ 0`.
    pub fn is_dispersionless(&self) -> bool {
        self.beta2_slope == 0.0 && self.beta4 == 0.0 && self.dbeta2_dt == 0.0
    }
}

/// `{ν₁, ν₂, ν_s, ν_i}` for up-conversion, with derived quantities.
///
/// Pump 1 is the higher-frequency pump, so energy conservation
/// `ν₁ + ν_s = ν₂ + ν_i` puts the idler at `ν_s + δν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyQuad {
    pub nu1: f64,
    pub nu2: f64,
    pub nus: f64,
    pub nui: f64,
    /// Down-conversion competitor `ν_s − δν`.
    pub nud: f64,
    pub delta_nu: f64,
    pub big_delta_nu: f64,
    pub nu0: f64,
}

impl FrequencyQuad {
    pub fn new(nu1: f64, nu2: f64, nus: f64) -> Result<Self> {
        if !(nu1 > 0.0 && nu2 > 0.0 && nus > 0.0) {
            return Err(Error::invalid("quad", "frequencies must be positive"));
        }
        if !(nu1 > nu2) {
            return Err(Error::invalid(
                "nu1/nu2",
                "pump 1 must be the higher-frequency (shorter-wavelength) pump",
            ));
        }
        let delta_nu = nu1 - nu2;
        let nui = nus + delta_nu;
        let big_delta_nu = (nu1 - nus).abs();
        if !(big_delta_nu > delta_nu) {
            return Err(Error::invalid(
                "quad",
                format!(
                    "pump-photon detuning {:.3} THz must exceed pump spacing {:.3} THz",
                    big_delta_nu * 1e-12,
                    delta_nu * 1e-12
                ),
            ));
        }
        Ok(Self {
            nu1,
            nu2,
            nus,
            nui,
            nud: nus - delta_nu,
            delta_nu,
            big_delta_nu,
            nu0: (nus + nui + nu1 + nu2) / 4.0,
        })
    }

    /// Quad from vacuum wavelengths (m) of pump 1, pump 2 and the signal.
    pub fn from_wavelengths(lambda1: f64, lambda2: f64, lambda_s: f64) -> Result<Self> {
        Self::new(
            wavelength_to_frequency(lambda1),
            wavelength_to_frequency(lambda2),
            wavelength_to_frequency(lambda_s),
        )
    }

    /// Same pumps, signal moved to `nus`.
    pub fn with_signal(&self, nus: f64) -> Result<Self> {
        Self::new(self.nu1, self.nu2, nus)
    }

    /// Same pumps, signal detuned by `offset` Hz.
    pub fn detuned(&self, offset: f64) -> Result<Self> {
        self.with_signal(self.nus + offset)
    }

    /// Photon detuning from the quad centre, `|ν_s − ν₀|`.
    pub fn signal_to_center(&self) -> f64 {
        (self.nus - self.nu0).abs()
    }

    /// Residual of `ν₁ + ν_s − ν₂ − ν_i` (Hz).
    pub fn energy_residual(&self) -> f64 {
        self.nu1 + self.nus - self.nu2 - self.nui
    }
}

pub fn beta2_at(f: &FiberModel, nu: f64, temp: f64) -> Result<f64> {
    if !(NU_MIN..=NU_MAX).contains(&nu) {
        return Err(Error::OutOfRange {
            nu_hz: nu,
            min_hz: NU_MIN,
            max_hz: NU_MAX,
        });
    }
    Ok(f.beta2_slope * (nu - f.nu_zero_gvd()) + f.dbeta2_dt * (temp - f.temp_ref))
}

fn fourth_order_mismatch(beta2: f64, beta4: f64, dw: f64, big_dw: f64) -> f64 {
    let cross = dw * big_dw;
    beta2 * (dw * dw + cross)
        + beta4 / 12.0 * (dw.powi(4) + cross * (1.5 * cross + big_dw * big_dw / 2.0 + 2.0 * dw * dw))
}

pub fn phase_mismatch(f: &FiberModel, q: &FrequencyQuad, temp: f64) -> Result<f64> {
    let b2 = beta2_at(f, q.nu0, temp)?;
    Ok(fourth_order_mismatch(
        b2,
        f.beta4,
        TAU * q.delta_nu,
        TAU * q.big_delta_nu,
    ))
}

/// Mismatch of the competing `ν_s → ν_d` process (same pumps, idler below the
/// signal), evaluated at the same `ν₀` and `Δω`.
pub fn down_conversion_mismatch(f: &FiberModel, q: &FrequencyQuad, temp: f64) -> Result<f64> {
    let b2 = beta2_at(f, q.nu0, temp)?;
    Ok(fourth_order_mismatch(
        b2,
        f.beta4,
        -TAU * q.delta_nu,
        TAU * q.big_delta_nu,
    ))
}

/// Lower→upper mismatches for every adjacent pair of an `n_modes` ladder
/// centred on the signal, ready to pair with couplings for
/// [`crate::bsfwm::ladder_simulate`].
///
/// Pairs at or above the signal use the up-conversion expression with the
/// pair's lower mode as the photon; pairs below use the down-conversion
/// expression seen from the pair's upper mode, with the sign flipped because
/// the ladder stores the lower→upper direction.
pub fn ladder_mismatches(f: &FiberModel, q: &FrequencyQuad, temp: f64, n_modes: usize) -> Result<Vec<f64>> {
    if n_modes < 3 || n_modes.is_multiple_of(2) {
        return Err(Error::invalid(
            "n_modes",
            format!("must be odd and >= 3, got {n_modes}"),
        ));
    }
    let half = (n_modes as i64 - 1) / 2;
    (0..n_modes as i64 - 1)
        .map(|k| {
            let offset = k - half;
            if offset >= 0 {
                let lower = q.with_signal(q.nus + offset as f64 * q.delta_nu)?;
                phase_mismatch(f, &lower, temp)
            } else {
                let upper = q.with_signal(q.nus + (offset + 1) as f64 * q.delta_nu)?;
                Ok(-down_conversion_mismatch(f, &upper, temp)?)
            }
        })
        .collect()
}

fn pi_pulse_efficiency(f: &FiberModel, q: &FrequencyQuad, kappa: f64, temp: f64, offset: f64) -> Result<f64> {
    let dk = phase_mismatch(f, &q.detuned(offset)?, temp)?;
    let length = PI / (2.0 * kappa);
    Ok(conversion_efficiency(&Coupling::new(kappa.into(), dk), length))
}

/// Full width (Hz) of signal detuning over which the π-pulse conversion stays
/// at or above half its local peak.
///
/// The π-pulse point is the interaction length `L = π/(2|κ|)`. A fiber with no
/// dispersion returns `f64::INFINITY`. The design frequency must lie inside the
/// half-maximum band; otherwise the search reports [`Error::NonBracketing`].
pub fn acceptance_bandwidth(f: &FiberModel, q: &FrequencyQuad, kappa: f64, temp: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::invalid("kappa", format!("must be > 0, got {kappa}")));
    }
    if f.beta2_slope == 0.0 && f.beta4 == 0.0 && beta2_at(f, q.nu0, temp)? == 0.0 {
        return Ok(f64::INFINITY);
    }
    let eta = |x: f64| pi_pulse_efficiency(f, q, kappa, temp, x);

    // Local slope of δk sets the natural scale of the search.
    let probe = 1e6;
    let dk_plus = phase_mismatch(f, &q.detuned(probe)?, temp)?;
    let dk_minus = phase_mismatch(f, &q.detuned(-probe)?, temp)?;
    let slope = ((dk_plus - dk_minus) / (2.0 * probe)).abs();
    let scale = if slope > 0.0 { kappa / slope } else { 1e9 };
    let step = scale / 20.0;
    let limit = (NU_MAX - NU_MIN) / 4.0;

    // The phase-matching peak may sit slightly off the design frequency.
    let mut center = 0.0;
    let mut peak = eta(0.0)?;
    for j in -60..=60 {
        let x = j as f64 * step;
        let v = eta(x)?;
        if v > peak {
            peak = v;
            center = x;
        }
    }
    let (mut a, mut b) = (center - step, center + step);
    for _ in 0..100 {
        let m1 = a + (b - a) * 0.381_966;
        let m2 = b - (b - a) * 0.381_966;
        if eta(m1)? < eta(m2)? {
            a = m1;
        } else {
            b = m2;
        }
    }
    if eta(0.5 * (a + b))? > peak {
        center = 0.5 * (a + b);
        peak = eta(center)?;
    }
    if !(peak > 0.0) {
        return Err(Error::NonBracketing("zero conversion near the design point".into()));
    }
    let half = peak / 2.0;
    if eta(0.0)? < half {
        return Err(Error::NonBracketing(format!(
            "design point converts {:.4}, below half the nearby peak {peak:.4}",
            eta(0.0)?
        )));
    }

    let mut total = 0.0;
    for dir in [1.0, -1.0] {
        let mut inner = 0.0;
        let mut outer = None;
        let mut x = step;
        while x < limit {
            if eta(center + dir * x)? < half {
                outer = Some(x);
                break;
            }
            inner = x;
            x += step;
        }
        let mut hi = outer
            .ok_or_else(|| Error::NonBracketing(format!("no half-maximum crossing within {:.1} THz", limit * 1e-12)))?;
        let mut lo = inner;
        let tol = 1e6f64.min(step * 1e-3);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if eta(center + dir * mid)? >= half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        total += 0.5 * (lo + hi);
    }
    Ok(total)
}

/// π-pulse conversion averaged over a Gaussian photon spectrum of the given
/// FWHM (Hz) centred on the design signal frequency.
pub fn photon_averaged_efficiency(
    f: &FiberModel,
    q: &FrequencyQuad,
    kappa: f64,
    temp: f64,
    photon_fwhm: f64,
) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::invalid("kappa", format!("must be > 0, got {kappa}")));
    }
    if !(photon_fwhm > 0.0) {
        return Err(Error::invalid("photon_fwhm", format!("must be > 0, got {photon_fwhm}")));
    }
    let sigma = photon_fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    // Simpson over ±5σ
    let n = 1000;
    let h = 10.0 * sigma / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..=n {
        let x = -5.0 * sigma + j as f64 * h;
        let w = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let g = (-0.5 * (x / sigma).powi(2)).exp();
        num += w * g * pi_pulse_efficiency(f, q, kappa, temp, x)?;
        den += w * g;
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TofSample {
    /// Vacuum wavelength (m).
    pub wavelength: f64,
    /// Group delay (s).
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TofFit {
    /// Zero-GVD wavelength (m).
    pub lambda0: f64,
    /// Cubic coefficients of delay (s) in `(λ − center)/scale`, lowest order first.
    pub coefficients: [f64; 4],
    pub center: f64,
    pub scale: f64,
    /// RMS of the fit residuals (s).
    pub residual_rms: f64,
}

impl TofFit {
    pub fn delay_at(&self, wavelength: f64) -> f64 {
        let x = (wavelength - self.center) / self.scale;
        let a = self.coefficients;
        a[0] + x * (a[1] + x * (a[2] + x * a[3]))
    }
}

/// Locate the zero-GVD wavelength from group-delay measurements.
///
/// The delay is fitted with a cubic in wavelength, so the dispersion
/// `dτ/dλ` is quadratic; λ₀ is the zero of that quadratic inside the sampled
/// range (the extremum of the delay curve).
pub fn zero_gvd_from_time_of_flight(samples: &[TofSample]) -> Result<TofFit> {
    if samples.len() < 5 {
        return Err(Error::invalid(
            "samples",
            format!("need at least 5, got {}", samples.len()),
        ));
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.wavelength), hi.max(s.wavelength))
    });
    if !(hi > lo) {
        return Err(Error::ZeroGvdNotBracketed);
    }
    let center = 0.5 * (lo + hi);
    let scale = 0.5 * (hi - lo);
    let delay0 = samples.iter().map(|s| s.delay).sum::<f64>() / samples.len() as f64;

    let n = samples.len();
    let design = DMatrix::from_fn(n, 4, |r, c| ((samples[r].wavelength - center) / scale).powi(c as i32));
    let rhs = DVector::from_iterator(n, samples.iter().map(|s| s.delay - delay0));
    let svd = design.clone().svd(true, true);
    let coef = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::invalid("samples", format!("least squares failed: {e}")))?;
    let residual = &design * &coef - &rhs;
    let residual_rms = (residual.norm_squared() / n as f64).sqrt();

    let a = [coef[0] + delay0, coef[1], coef[2], coef[3]];
    // dτ/dx = a1 + 2 a2 x + 3 a3 x², x in [-1, 1]
    let (qa, qb, qc) = (3.0 * a[3], 2.0 * a[2], a[1]);
    let curvature = qb.abs().max(qc.abs()).max(qa.abs());
    let mut roots = Vec::new();
    if qa.abs() <= 1e-12 * curvature {
        if qb != 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable pair
            let t = -0.5 * (qb + qb.signum() * sq);
            if t != 0.0 {
                roots.push(qc / t);
            }
            roots.push(t / qa);
        }
    }
    let x0 = roots
        .into_iter()
        .filter(|x| x.is_finite() && (-1.0..=1.0).contains(x))
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or(Error::ZeroGvdNotBracketed)?;

    Ok(TofFit {
        lambda0: center + x0 * scale,
        coefficients: a,
        center,
        scale,
        residual_rms,
    })
}

/// Read `wavelength_nm,delay_ps` CSV (header row required).
pub fn read_tof_csv<R: Read>(reader: R) -> Result<Vec<TofSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            what: "time-of-flight CSV",
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != ["wavelength_nm", "delay_ps"] {
        return Err(Error::Parse {
            what: "time-of-flight CSV",
            line: 1,
            reason: format!("expected header `wavelength_nm,delay_ps`, found `{}`", names.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            what: "time-of-flight CSV",
            line,
            reason: e.to_string(),
        })?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    what: "time-of-flight CSV",
                    line,
                    reason: format!("column {} is not a number", k + 1),
                })
        };
        out.push(TofSample {
            wavelength: field(0)? * 1e-9,
            delay: field(1)? * 1e-12,
        });
    }
    Ok(out)
}
