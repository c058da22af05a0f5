//! Experiment pipelines: Rabi and Ramsey scans, fringe fitting, the
//! visibility budget and GVD thermometry. Every scan runs either in closed
//! form or through the photon-counting Monte Carlo.

mod fit;
mod rabi;
mod ramsey;
mod thermometry;

pub use fit::{fit_fringes, FringeFit, MAX_FIT_ITERATIONS};
pub use rabi::{rabi_scan, LadderSpec};
pub use ramsey::{ramsey_phase, ramsey_populations, ramsey_scan, visibility_budget, RamseyConfig};
pub use thermometry::{gvd_thermometry, thermal_phase, thermometry_period, ThermometryResult};

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon::rng::{domain, substream};
use crate::photon::{monte_carlo_ramsey, DetectorModel, SourceModel};
use crate::qubit::Populations;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub p_s: f64,
    pub p_i: f64,
    pub p_loss: f64,
    /// Heralds behind a Monte Carlo estimate (0 for closed form).
    pub n: u64,
    /// Binomial standard error of `p_s` (0 for closed form).
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// What `x` is, with units.
    pub x_label: String,
    pub points: Vec<ScanPoint>,
}

impl ScanResult {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn p_s(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_s).collect()
    }

    pub fn p_i(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_i).collect()
    }

    /// CSV with an optional `# config_hash=` comment line before the header.
    pub fn write_csv<W: Write>(&self, mut w: W, config_hash: Option<&str>) -> Result<()> {
        if let Some(h) = config_hash {
            writeln!(w, "# config_hash={h}")?;
        }
        writeln!(w, "# x={}", self.x_label)?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "p_s", "p_i", "p_loss", "n", "err"])
            .map_err(|e| Error::Io(e.to_string()))?;
        for p in &self.points {
            wr.serialize((p.x, p.p_s, p.p_i, p.p_loss, p.n, p.err))
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Monte Carlo settings shared by all scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub source: SourceModel,
    pub detector: DetectorModel,
    pub noise_per_gate: f64,
    pub n_gates: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScanMode {
    Analytic,
    MonteCarlo(McSettings),
}

fn analytic_point(x: f64, p: Populations) -> ScanPoint {
    ScanPoint {
        x,
        p_s: p.p_s,
        p_i: p.p_i,
        p_loss: p.p_loss,
        n: 0,
        err: 0.0,
    }
}

/// Evaluate populations per x and turn them into scan points, sampling each
/// point from its own substream in Monte Carlo mode.
pub(crate) fn run_points<F>(xs: &[f64], mode: &ScanMode, pops: F) -> Result<Vec<ScanPoint>>
where
    F: Fn(f64) -> Result<Populations> + Sync,
{
    match mode {
        ScanMode::Analytic => xs.iter().map(|&x| Ok(analytic_point(x, pops(x)?))).collect(),
        ScanMode::MonteCarlo(mc) => xs
            .par_iter()
            .enumerate()
            .map(|(k, &x)| {
                let p = pops(x)?;
                let seed = substream(mc.seed, domain::SCAN, k as u64).random::<u64>();
                let c = monte_carlo_ramsey(p, &mc.source, &mc.detector, mc.noise_per_gate, mc.n_gates, seed)?;
                let (p_s, err) = c.fraction(c.herald_s);
                let (p_i, _) = c.fraction(c.herald_i);
                Ok(ScanPoint {
                    x,
                    p_s,
                    p_i,
                    p_loss: 1.0 - p_s - p_i,
                    n: c.heralds,
                    err,
                })
            })
            .collect(),
    }
}
