//! Heralded-source photon statistics, gated detection, time tags and
//! correlation estimators.
//!
//! Channels: 0 herald, 1 port a (`ν_s` or beamsplitter arm a), 2 port b
//! (`ν_i` or arm b). All stochastic stages are deterministic in the seed and
//! independent of the thread count.

mod detector;
pub mod rng;
mod source;
mod stats;
mod tags;

pub use detector::{detect, route, DetectorModel, GateArrivals, Routing};
pub use source::{generate_run, Emission, SourceModel};
pub use stats::{coincidences, herald_counts, heralded_g2, G2Estimate};
pub use tags::{TimeTag, TimeTagStream, CHANNELS, HERALD, PORT_A, PORT_B};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qubit::Populations;

/// Herald-conditioned click counts at the two qubit ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamseyCounts {
    pub heralds: u64,
    pub herald_s: u64,
    pub herald_i: u64,
    pub herald_both: u64,
}

impl RamseyCounts {
    /// `(p, σ)` for a herald-conditioned fraction.
    pub fn fraction(&self, n: u64) -> (f64, f64) {
        if self.heralds == 0 {
            return (0.0, 0.0);
        }
        let h = self.heralds as f64;
        let p = n as f64 / h;
        (p, (p * (1.0 - p) / h).sqrt())
    }
}

/// Simulate `n_gates` of the full chain: source, interferometer output
/// populations (loss included), demultiplexer, gated detection.
pub fn monte_carlo_ramsey(
    output: Populations,
    source: &SourceModel,
    detector: &DetectorModel,
    noise_per_gate: f64,
    n_gates: u64,
    seed: u64,
) -> Result<RamseyCounts> {
    let emissions = generate_run(source, n_gates, seed)?;
    let arrivals = route(&emissions, Routing::Qubit(output), seed)?;
    let tags = detect(&arrivals, detector, noise_per_gate, seed)?;
    let [heralds, herald_s, herald_i, herald_both] = herald_counts(&tags, HERALD, PORT_A, PORT_B, detector.gate_width)?;
    Ok(RamseyCounts {
        heralds,
        herald_s,
        herald_i,
        herald_both,
    })
}

/// Hanbury Brown–Twiss run: heralded photons survive with `transmission`
/// and hit a 50/50 beamsplitter. Returns the estimate and the raw tags.
pub fn g2_experiment(
    source: &SourceModel,
    detector: &DetectorModel,
    noise_per_gate: f64,
    transmission: f64,
    n_gates: u64,
    window: f64,
    seed: u64,
) -> Result<(G2Estimate, TimeTagStream)> {
    let emissions = generate_run(source, n_gates, seed)?;
    let arrivals = route(&emissions, Routing::Balanced { transmission }, seed)?;
    let tags = detect(&arrivals, detector, noise_per_gate, seed)?;
    let est = heralded_g2(&tags, HERALD, PORT_A, PORT_B, window)?;
    Ok((est, tags))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal_source() -> SourceModel {
        SourceModel {
            pair_prob_per_gate: 1.0,
            herald_efficiency: 1.0,
            signal_transmission: 1.0,
            multi_pair: false,
            nu_pump: 0.0,
            nu_heralding: 0.0,
        }
    }

    fn pops(p_s: f64) -> Populations {
        Populations {
            p_s,
            p_i: 1.0 - p_s,
            p_loss: 0.0,
        }
    }

    #[test]
    fn ideal_chain_is_deterministic_at_the_poles() {
        let c = monte_carlo_ramsey(pops(0.0), &ideal_source(), &DetectorModel::ideal(), 0.0, 10_000, 1).unwrap();
        assert_eq!((c.heralds, c.herald_s, c.herald_i), (10_000, 0, 10_000));
        let c = monte_carlo_ramsey(pops(1.0), &ideal_source(), &DetectorModel::ideal(), 0.0, 10_000, 1).unwrap();
        assert_eq!((c.herald_s, c.herald_i), (10_000, 0));
    }

    #[test]
    fn half_split_within_binomial_error() {
        let c = monte_carlo_ramsey(pops(0.5), &ideal_source(), &DetectorModel::ideal(), 0.0, 100_000, 5).unwrap();
        let (p, s) = c.fraction(c.herald_s);
        assert!((p - 0.5).abs() < 3.0 * s);
    }

    #[test]
    fn streams_are_bit_identical() {
        let src = SourceModel {
            pair_prob_per_gate: 0.2,
            herald_efficiency: 0.5,
            signal_transmission: 0.7,
            multi_pair: true,
            nu_pump: 0.0,
            nu_heralding: 0.0,
        };
        let run = |seed| {
            let e = generate_run(&src, 150_000, seed).unwrap();
            let r = route(&e, Routing::Balanced { transmission: 1.0 }, seed).unwrap();
            let mut buf = Vec::new();
            detect(&r, &DetectorModel::default(), 1e-3, seed)
                .unwrap()
                .write_tsv(&mut buf)
                .unwrap();
            buf
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }
}
