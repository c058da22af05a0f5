use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::rng::{domain, par_blocks, substream};
use crate::dispersion::FrequencyQuad;
use crate::error::{Error, Result};

/// Heralded photon-pair source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    /// Mean pair number per gate (Poisson) or pair probability (Bernoulli).
    pub pair_prob_per_gate: f64,
    /// Probability that a pair produces a herald click (detector included).
    pub herald_efficiency: f64,
    /// Source-to-converter transmission of the signal photon.
    pub signal_transmission: f64,
    pub multi_pair: bool,
    pub nu_pump: f64,
    pub nu_heralding: f64,
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        let p = self.pair_prob_per_gate;
        if !(p >= 0.0 && p.is_finite()) || (!self.multi_pair && p > 1.0) {
            return Err(Error::invalid(
                "pair_prob_per_gate",
                format!("must be a mean >= 0 (Poisson) or a probability (Bernoulli), got {p}"),
            ));
        }
        for (name, v) in [
            ("herald_efficiency", self.herald_efficiency),
            ("signal_transmission", self.signal_transmission),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Checks `ν_pump = ν_heralding + ν_s` within 1 Hz.
    pub fn validate_against(&self, quad: &FrequencyQuad) -> Result<()> {
        self.validate()?;
        let residual = self.nu_pump - self.nu_heralding - quad.nus;
        if residual.abs() > 1.0 {
            return Err(Error::invalid(
                "nu_pump",
                format!("pump minus heralding frequency misses the signal by {residual:.3e} Hz"),
            ));
        }
        Ok(())
    }
}

/// What the source put out in one gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Emission {
    pub gate: u64,
    pub pairs: u32,
    pub herald: bool,
    /// Signal photons surviving to the converter.
    pub signal: u32,
}

pub fn generate_run(source: &SourceModel, n_gates: u64, seed: u64) -> Result<Vec<Emission>> {
    source.validate()?;
    if n_gates == 0 {
        return Err(Error::invalid("n_gates", "must be >= 1"));
    }
    let poisson = if source.multi_pair && source.pair_prob_per_gate > 0.0 {
        Some(Poisson::new(source.pair_prob_per_gate).map_err(|e| Error::invalid("pair_prob_per_gate", e.to_string()))?)
    } else {
        None
    };
    Ok(par_blocks(n_gates, |block, first, n| {
        let mut rng = substream(seed, domain::SOURCE, block);
        (first..first + n)
            .map(|gate| {
                let pairs = match &poisson {
                    Some(d) => d.sample(&mut rng) as u32,
                    None if source.multi_pair => 0,
                    None => rng.random_bool(source.pair_prob_per_gate) as u32,
                };
                if pairs == 0 {
                    return Emission {
                        gate,
                        ..Emission::default()
                    };
                }
                let p_herald = 1.0 - (1.0 - source.herald_efficiency).powi(pairs as i32);
                let herald = rng.random_bool(p_herald.clamp(0.0, 1.0));
                let signal = Binomial::new(pairs as u64, source.signal_transmission)
                    .expect("validated probability")
                    .sample(&mut rng) as u32;
                Emission {
                    gate,
                    pairs,
                    herald,
                    signal,
                }
            })
            .collect()
    }))
}
