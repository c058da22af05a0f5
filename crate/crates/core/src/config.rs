//! Run configuration: sectioned TOML with units in the key names.
//!
//! Values are converted to SI here and nowhere else. Every error names the
//! offending key and, when it can be found in the source text, its line.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::bsfwm::{FwmParams, PumpConfig};
use crate::dispersion::{FiberModel, FrequencyQuad};
use crate::experiments::LadderSpec;
use crate::noise::{NoiseModel, RamanGainCurve};
use crate::photon::{DetectorModel, SourceModel};
use crate::units::{bandwidth_wavelength_to_frequency, frequency_to_wavelength, ps2_per_km, ps4_per_km, C};

/// Environment variable naming a directory searched for bare preset names.
pub const CONFIG_DIR_ENV: &str = "QFC_RAMSEY_CONFIG_DIR";

pub const PRESETS: &[(&str, &str)] = &[
    ("ideal", include_str!("../presets/ideal.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("matched", include_str!("../presets/matched.toml")),
    ("paper-cryo", include_str!("../presets/paper-cryo.toml")),
    ("room-temp", include_str!("../presets/room-temp.toml")),
    ("s7", include_str!("../presets/s7.toml")),
    ("flat", include_str!("../presets/flat.toml")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, 0 when unknown.
    pub line: usize,
    /// `section.key` or `section`.
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(
                f,
                "config error at line {}: `{}`: {}",
                self.line, self.key, self.message
            )
        } else {
            write!(f, "config error: `{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RabiBlock {
    pub powers: Vec<f64>,
    pub ladder: Option<LadderSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamseyBlock {
    pub delays: Vec<f64>,
    pub bandwidth_cap: f64,
    pub theta1: f64,
    pub theta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McBlock {
    pub gates: u64,
    pub noise_per_gate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseBlock {
    pub model: NoiseModel,
    pub temps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G2Block {
    pub gates: u64,
    pub window: f64,
}

/// Fully resolved, SI-valued run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub name: String,
    pub seed: u64,
    pub quad: FrequencyQuad,
    pub fiber: FiberModel,
    /// Operating temperature of the fiber (K).
    pub temp: f64,
    pub fwm: FwmParams,
    pub pump: PumpConfig,
    pub rabi: Option<RabiBlock>,
    pub ramsey: Option<RamseyBlock>,
    pub source: Option<SourceModel>,
    pub detector: DetectorModel,
    pub mc: McBlock,
    pub noise: Option<NoiseBlock>,
    pub g2: G2Block,
    pub thermometry: Option<Vec<f64>>,
}

impl RunConfig {
    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn require<'a, T>(&self, block: &'a Option<T>, section: &str) -> CResult<&'a T> {
        block.as_ref().ok_or_else(|| ConfigError {
            line: 0,
            key: section.to_string(),
            message: format!(
                "section [{section}] is required by this command but missing from `{}`",
                self.name
            ),
        })
    }
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("run", &["name", "seed"]),
    (
        "quad",
        &[
            "lambda1_nm",
            "lambda2_nm",
            "lambda_s_nm",
            "nu1_thz",
            "nu2_thz",
            "nus_thz",
        ],
    ),
    (
        "fiber",
        &[
            "lambda0_nm",
            "beta2_slope_ps2_per_km_thz",
            "beta4_ps4_per_km",
            "dbeta2_dt_ps2_per_km_k",
            "dl_dt_m_per_k",
            "length_m",
            "temp_ref_k",
            "temp_k",
            "gamma_per_w_km",
        ],
    ),
    ("pump", &["p1_w", "p2_w", "theta_rad", "loss_db"]),
    (
        "rabi",
        &[
            "power_min_w",
            "power_max_w",
            "points",
            "ladder",
            "ladder_modes",
            "competitor_mismatch_per_m",
            "phase_per_step_rad",
        ],
    ),
    (
        "ramsey",
        &[
            "delay_min_mm",
            "delay_max_mm",
            "points",
            "bandwidth_cap",
            "theta1_rad",
            "theta2_rad",
        ],
    ),
    (
        "source",
        &[
            "pair_prob_per_gate",
            "herald_efficiency",
            "signal_transmission",
            "multi_pair",
            "pump_nm",
        ],
    ),
    (
        "detector",
        &[
            "efficiency",
            "dark_prob_per_gate",
            "gate_width_ns",
            "dead_time_ns",
            "gate_period_ns",
        ],
    ),
    ("mc", &["gates", "noise_per_gate"]),
    (
        "noise",
        &[
            "raman_scale",
            "sfwm_coeff",
            "warm_length_m",
            "warm_temp_k",
            "gate_ns",
            "band_nm",
            "raman_curve_csv",
            "temps_k",
        ],
    ),
    ("g2", &["gates", "window_ns"]),
    ("thermometry", &["temp_min_k", "temp_max_k", "points"]),
];

struct Doc<'a> {
    text: &'a str,
    table: Table,
}

impl<'a> Doc<'a> {
    fn section_line(&self, section: &str) -> usize {
        let header = format!("[{section}]");
        self.text.lines().position(|l| l.trim() == header).map_or(0, |k| k + 1)
    }

    fn key_line(&self, section: &str, key: &str) -> usize {
        let start = self.section_line(section);
        let mut in_section = start == 0 && section.is_empty();
        for (k, l) in self.text.lines().enumerate() {
            let t = l.trim();
            if t.starts_with('[') {
                in_section = k + 1 == start;
                continue;
            }
            if in_section {
                if let Some((name, _)) = t.split_once('=') {
                    if name.trim() == key {
                        return k + 1;
                    }
                }
            }
        }
        start
    }

    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: if key.is_empty() {
                self.section_line(section)
            } else {
                self.key_line(section, key)
            },
            key: if key.is_empty() {
                section.to_string()
            } else {
                format!("{section}.{key}")
            },
            message: message.into(),
        }
    }

    fn section(&self, name: &str) -> CResult<Option<&Table>> {
        match self.table.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(self.err(name, "", "expected a [section]")),
        }
    }

    fn value(&self, section: &str, key: &str) -> CResult<Option<&Value>> {
        Ok(self.section(section)?.and_then(|t| t.get(key)))
    }

    fn opt_f64(&self, section: &str, key: &str) -> CResult<Option<f64>> {
        match self.value(section, key)? {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(self.err(section, key, format!("expected a number, found {}", other.type_str()))),
        }
    }

    fn f64(&self, section: &str, key: &str) -> CResult<f64> {
        self.opt_f64(section, key)?
            .ok_or_else(|| self.err(section, key, "missing required key"))
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> CResult<f64> {
        Ok(self.opt_f64(section, key)?.unwrap_or(default))
    }

    fn opt_u64(&self, section: &str, key: &str) -> CResult<Option<u64>> {
        match self.value(section, key)? {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(self.err(section, key, "expected a non-negative integer")),
        }
    }

    fn opt_bool(&self, section: &str, key: &str) -> CResult<Option<bool>> {
        match self.value(section, key)? {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(self.err(section, key, "expected true or false")),
        }
    }

    fn opt_str(&self, section: &str, key: &str) -> CResult<Option<String>> {
        match self.value(section, key)? {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.err(section, key, "expected a string")),
        }
    }

    fn opt_list(&self, section: &str, key: &str) -> CResult<Option<Vec<f64>>> {
        match self.value(section, key)? {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(self.err(section, key, "expected an array of numbers")),
                })
                .collect::<CResult<Vec<f64>>>()
                .map(Some),
            Some(_) => Err(self.err(section, key, "expected an array of numbers")),
        }
    }

    fn check(&self, section: &str, key: &str, ok: bool, message: &str) -> CResult<()> {
        if ok {
            Ok(())
        } else {
            Err(self.err(section, key, message))
        }
    }

    fn probability(&self, section: &str, key: &str, default: Option<f64>) -> CResult<f64> {
        let v = match default {
            Some(d) => self.f64_or(section, key, d)?,
            None => self.f64(section, key)?,
        };
        self.check(
            section,
            key,
            (0.0..=1.0).contains(&v),
            "must be a probability in [0, 1]",
        )?;
        Ok(v)
    }

    fn linspace(&self, section: &str, lo_key: &str, hi_key: &str, n_key: &str, scale: f64) -> CResult<Vec<f64>> {
        let lo = self.f64(section, lo_key)?;
        let hi = self.f64(section, hi_key)?;
        let n = self
            .opt_u64(section, n_key)?
            .ok_or_else(|| self.err(section, n_key, "missing required key"))?;
        self.check(section, n_key, n >= 2, "need at least 2 points")?;
        self.check(section, hi_key, hi > lo, "must exceed the lower bound")?;
        Ok((0..n)
            .map(|k| scale * (lo + (hi - lo) * k as f64 / (n - 1) as f64))
            .collect())
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parse configuration text. `name` labels the config in messages.
pub fn parse_config(text: &str, name: &str) -> CResult<RunConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        line: e.span().map_or(0, |s| line_of_offset(text, s.start)),
        key: "syntax".into(),
        message: e.message().to_string(),
    })?;
    let doc = Doc { text, table };

    for (section, value) in &doc.table {
        let allowed = SCHEMA
            .iter()
            .find(|(s, _)| s == section)
            .map(|(_, keys)| *keys)
            .ok_or_else(|| doc.err(section, "", "unknown section"))?;
        let Value::Table(t) = value else {
            return Err(doc.err(section, "", "expected a [section]"));
        };
        if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(doc.err(section, k, format!("unknown key (allowed: {})", allowed.join(", "))));
        }
    }

    for s in ["quad", "fiber", "pump"] {
        if doc.section(s)?.is_none() {
            return Err(ConfigError {
                line: 0,
                key: s.into(),
                message: format!("missing required section [{s}]"),
            });
        }
    }

    // quad: wavelengths or frequencies
    let quad = if doc.value("quad", "nu1_thz")?.is_some() {
        FrequencyQuad::new(
            doc.f64("quad", "nu1_thz")? * 1e12,
            doc.f64("quad", "nu2_thz")? * 1e12,
            doc.f64("quad", "nus_thz")? * 1e12,
        )
    } else {
        FrequencyQuad::from_wavelengths(
            doc.f64("quad", "lambda1_nm")? * 1e-9,
            doc.f64("quad", "lambda2_nm")? * 1e-9,
            doc.f64("quad", "lambda_s_nm")? * 1e-9,
        )
    }
    .map_err(|e| doc.err("quad", "", e.to_string()))?;

    let fiber = FiberModel::new(
        doc.f64("fiber", "lambda0_nm")? * 1e-9,
        ps2_per_km(doc.f64_or("fiber", "beta2_slope_ps2_per_km_thz", 0.0)?) * 1e-12,
        ps4_per_km(doc.f64_or("fiber", "beta4_ps4_per_km", 0.0)?),
        ps2_per_km(doc.f64_or("fiber", "dbeta2_dt_ps2_per_km_k", 0.0)?),
        doc.f64_or("fiber", "dl_dt_m_per_k", 0.0)?,
        doc.f64("fiber", "length_m")?,
        doc.f64_or("fiber", "temp_ref_k", 295.0)?,
    )
    .map_err(|e| doc.err("fiber", "", e.to_string()))?;
    let temp = doc.f64_or("fiber", "temp_k", fiber.temp_ref)?;
    doc.check("fiber", "temp_k", temp >= 0.0, "must be >= 0 K")?;
    let gamma = doc.f64("fiber", "gamma_per_w_km")? * 1e-3;
    doc.check("fiber", "gamma_per_w_km", gamma > 0.0, "must be > 0")?;
    let fwm = FwmParams::new(gamma, fiber.length).map_err(|e| doc.err("fiber", "", e.to_string()))?;

    let p1 = doc.f64("pump", "p1_w")?;
    doc.check("pump", "p1_w", p1 > 0.0, "must be > 0")?;
    let p2 = doc.f64("pump", "p2_w")?;
    doc.check("pump", "p2_w", p2 > 0.0, "must be > 0")?;
    let loss_db = doc.f64_or("pump", "loss_db", 0.0)?;
    doc.check("pump", "loss_db", loss_db >= 0.0, "must be >= 0 dB")?;
    let pump = PumpConfig::new(
        p1,
        p2,
        doc.f64_or("pump", "theta_rad", 0.0)?,
        frequency_to_wavelength(quad.nu1),
        frequency_to_wavelength(quad.nu2),
        loss_db,
    )
    .map_err(|e| doc.err("pump", "", e.to_string()))?;

    let rabi = match doc.section("rabi")? {
        None => None,
        Some(_) => {
            let powers = doc.linspace("rabi", "power_min_w", "power_max_w", "points", 1.0)?;
            doc.check("rabi", "power_min_w", powers[0] > 0.0, "must be > 0")?;
            let ladder = if doc.opt_bool("rabi", "ladder")?.unwrap_or(false) {
                let n = doc.opt_u64("rabi", "ladder_modes")?.unwrap_or(3) as usize;
                doc.check("rabi", "ladder_modes", n >= 3 && n % 2 == 1, "must be odd and >= 3")?;
                let step = doc.f64_or("rabi", "phase_per_step_rad", 0.01)?;
                doc.check(
                    "rabi",
                    "phase_per_step_rad",
                    step > 0.0 && step <= 0.1,
                    "must be in (0, 0.1]",
                )?;
                Some(LadderSpec {
                    n_modes: n,
                    competitor_mismatch: doc.opt_f64("rabi", "competitor_mismatch_per_m")?,
                    phase_per_step: step,
                })
            } else {
                None
            };
            Some(RabiBlock { powers, ladder })
        }
    };

    let ramsey = match doc.section("ramsey")? {
        None => None,
        Some(_) => {
            let cap = doc.f64_or("ramsey", "bandwidth_cap", 1.0)?;
            doc.check("ramsey", "bandwidth_cap", cap > 0.0 && cap <= 1.0, "must be in (0, 1]")?;
            Some(RamseyBlock {
                delays: doc.linspace("ramsey", "delay_min_mm", "delay_max_mm", "points", 1e-3)?,
                bandwidth_cap: cap,
                theta1: doc.f64_or("ramsey", "theta1_rad", 0.0)?,
                theta2: doc.f64_or("ramsey", "theta2_rad", 0.0)?,
            })
        }
    };

    let source = match doc.section("source")? {
        None => None,
        Some(_) => {
            let multi = doc.opt_bool("source", "multi_pair")?.unwrap_or(true);
            let mu = doc.f64("source", "pair_prob_per_gate")?;
            doc.check(
                "source",
                "pair_prob_per_gate",
                mu >= 0.0 && (multi || mu <= 1.0),
                "must be >= 0, and <= 1 without multi_pair",
            )?;
            let nu_pump = C / (doc.f64("source", "pump_nm")? * 1e-9);
            doc.check(
                "source",
                "pump_nm",
                nu_pump > quad.nus,
                "pump must be bluer than the signal",
            )?;
            let s = SourceModel {
                pair_prob_per_gate: mu,
                herald_efficiency: doc.probability("source", "herald_efficiency", None)?,
                signal_transmission: doc.probability("source", "signal_transmission", Some(1.0))?,
                multi_pair: multi,
                nu_pump,
                nu_heralding: nu_pump - quad.nus,
            };
            s.validate_against(&quad)
                .map_err(|e| doc.err("source", "", e.to_string()))?;
            Some(s)
        }
    };

    let d = DetectorModel::default();
    let detector = DetectorModel {
        efficiency: doc.probability("detector", "efficiency", Some(d.efficiency))?,
        dark_prob_per_gate: doc.probability("detector", "dark_prob_per_gate", Some(d.dark_prob_per_gate))?,
        gate_width: doc.f64_or("detector", "gate_width_ns", d.gate_width * 1e9)? * 1e-9,
        dead_time: doc.f64_or("detector", "dead_time_ns", d.dead_time * 1e9)? * 1e-9,
        gate_period: doc.f64_or("detector", "gate_period_ns", d.gate_period * 1e9)? * 1e-9,
    };
    detector
        .validate()
        .map_err(|e| doc.err("detector", "", e.to_string()))?;

    let mc = McBlock {
        gates: doc.opt_u64("mc", "gates")?.unwrap_or(100_000),
        noise_per_gate: doc.f64_or("mc", "noise_per_gate", 0.0)?,
    };
    doc.check("mc", "gates", mc.gates >= 1, "must be >= 1")?;
    doc.check("mc", "noise_per_gate", mc.noise_per_gate >= 0.0, "must be >= 0")?;

    let noise = match doc.section("noise")? {
        None => None,
        Some(_) => {
            let gain = match doc.opt_str("noise", "raman_curve_csv")? {
                None => RamanGainCurve::silica(),
                Some(path) => {
                    let file = std::fs::File::open(&path)
                        .map_err(|e| doc.err("noise", "raman_curve_csv", format!("{path}: {e}")))?;
                    RamanGainCurve::from_csv(file).map_err(|e| doc.err("noise", "raman_curve_csv", e.to_string()))?
                }
            };
            let band_nm = doc.f64("noise", "band_nm")?;
            doc.check("noise", "band_nm", band_nm > 0.0, "must be > 0")?;
            let model = NoiseModel {
                raman_scale: doc.f64("noise", "raman_scale")?,
                sfwm_coeff: doc.f64("noise", "sfwm_coeff")?,
                pump_power: 0.5 * (pump.p1 + pump.p2),
                warm_length: doc.f64_or("noise", "warm_length_m", 0.0)?,
                warm_temp: doc.f64_or("noise", "warm_temp_k", 295.0)?,
                gate: doc.f64_or("noise", "gate_ns", 4.0)? * 1e-9,
                band: bandwidth_wavelength_to_frequency(band_nm * 1e-9, frequency_to_wavelength(quad.nus)),
                gain,
            };
            model
                .validate(&fiber)
                .map_err(|e| doc.err("noise", "", e.to_string()))?;
            let temps = doc
                .opt_list("noise", "temps_k")?
                .unwrap_or_else(|| vec![0.0, 20.0, 40.0, 77.0, 100.0, 150.0, 200.0, 250.0, 295.0]);
            doc.check(
                "noise",
                "temps_k",
                temps.iter().all(|t| *t >= 0.0),
                "temperatures must be >= 0 K",
            )?;
            Some(NoiseBlock { model, temps })
        }
    };

    let g2 = G2Block {
        gates: doc.opt_u64("g2", "gates")?.unwrap_or(1_000_000),
        window: doc.f64_or("g2", "window_ns", detector.gate_width * 1e9)? * 1e-9,
    };
    doc.check("g2", "gates", g2.gates >= 1, "must be >= 1")?;
    doc.check("g2", "window_ns", g2.window > 0.0, "must be > 0")?;

    let thermometry = match doc.section("thermometry")? {
        None => None,
        Some(_) => Some(doc.linspace("thermometry", "temp_min_k", "temp_max_k", "points", 1.0)?),
    };

    Ok(RunConfig {
        name: doc.opt_str("run", "name")?.unwrap_or_else(|| name.to_string()),
        seed: doc.opt_u64("run", "seed")?.unwrap_or(1),
        quad,
        fiber,
        temp,
        fwm,
        pump,
        rabi,
        ramsey,
        source,
        detector,
        mc,
        noise,
        g2,
        thermometry,
    })
}

/// Built-in preset text by name.
pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Resolve `target` as a file path, then as a name inside `$QFC_RAMSEY_CONFIG_DIR`,
/// then as a built-in preset.
pub fn load_config(target: &str) -> CResult<RunConfig> {
    let io_err = |path: &Path, e: std::io::Error| ConfigError {
        line: 0,
        key: "config".into(),
        message: format!("{}: {e}", path.display()),
    };
    let direct = PathBuf::from(target);
    if direct.is_file() {
        let text = std::fs::read_to_string(&direct).map_err(|e| io_err(&direct, e))?;
        return parse_config(&text, target);
    }
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        for candidate in [
            Path::new(&dir).join(target),
            Path::new(&dir).join(format!("{target}.toml")),
        ] {
            if candidate.is_file() {
                let text = std::fs::read_to_string(&candidate).map_err(|e| io_err(&candidate, e))?;
                return parse_config(&text, target);
            }
        }
    }
    match preset(target) {
        Some(text) => parse_config(text, target),
        None => Err(ConfigError {
            line: 0,
            key: "config".into(),
            message: format!(
                "`{target}` is neither a file nor a preset (presets: {})",
                PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            ),
        }),
    }
}
