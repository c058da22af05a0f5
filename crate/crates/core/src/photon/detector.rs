use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::rng::{domain, par_blocks, substream};
use super::source::Emission;
use super::tags::{TimeTag, TimeTagStream, HERALD, PORT_A, PORT_B};
use crate::error::{Error, Result};
use crate::qubit::Populations;

/// Gated single-photon detector shared by both qubit ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    pub dark_prob_per_gate: f64,
    /// Gate width (s).
    pub gate_width: f64,
    /// Dead time (s), applied within a gate.
    pub dead_time: f64,
    /// Gate repetition period (s).
    pub gate_period: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: 0.2,
            dark_prob_per_gate: 1e-5,
            gate_width: 4e-9,
            dead_time: 0.0,
            gate_period: 1e-6,
        }
    }
}

impl DetectorModel {
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_prob_per_gate: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("efficiency", self.efficiency),
            ("dark_prob_per_gate", self.dark_prob_per_gate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, format!("must be in [0, 1], got {v}")));
            }
        }
        if !(self.gate_width > 0.0) {
            return Err(Error::invalid("gate_width", "must be > 0"));
        }
        if !(self.dead_time >= 0.0) {
            return Err(Error::invalid("dead_time", "must be >= 0"));
        }
        if !(self.gate_period >= self.gate_width) {
            return Err(Error::invalid("gate_period", "must be >= gate_width"));
        }
        Ok(())
    }

    /// Probability of a noise click in one gate on one channel.
    pub fn noise_click_prob(&self, noise_per_gate: f64) -> f64 {
        (self.dark_prob_per_gate + noise_per_gate * self.efficiency).min(1.0)
    }
}

/// Photons reaching each qubit port in one gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateArrivals {
    pub gate: u64,
    pub herald: bool,
    pub a: u32,
    pub b: u32,
}

/// How signal photons reach the two ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Routing {
    /// Survive with `transmission`, then a 50/50 beamsplitter.
    Balanced { transmission: f64 },
    /// Frequency demultiplexer after the interferometer: `ν_s → a`, `ν_i → b`,
    /// lost photons reach neither.
    Qubit(Populations),
}

pub fn route(emissions: &[Emission], routing: Routing, seed: u64) -> Result<Vec<GateArrivals>> {
    let (pa, pb) = match routing {
        Routing::Balanced { transmission } => {
            if !(0.0..=1.0).contains(&transmission) {
                return Err(Error::invalid(
                    "transmission",
                    format!("must be in [0, 1], got {transmission}"),
                ));
            }
            (transmission / 2.0, transmission / 2.0)
        }
        Routing::Qubit(p) => {
            if !(p.p_s >= 0.0 && p.p_i >= 0.0 && p.p_loss >= -1e-12 && (p.total() - 1.0).abs() < 1e-9) {
                return Err(Error::NotNormalized { total: p.total() });
            }
            (p.p_s, p.p_i)
        }
    };
    // b conditioned on not going to a
    let pb_given_not_a = if pa < 1.0 {
        (pb / (1.0 - pa)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(par_blocks(emissions.len() as u64, |block, first, n| {
        let mut rng = substream(seed, domain::ROUTE, block);
        emissions[first as usize..(first + n) as usize]
            .iter()
            .map(|e| {
                let (a, b) = if e.signal == 0 {
                    (0, 0)
                } else {
                    let a = Binomial::new(e.signal as u64, pa.clamp(0.0, 1.0))
                        .expect("probability")
                        .sample(&mut rng);
                    let b = Binomial::new(e.signal as u64 - a, pb_given_not_a)
                        .expect("probability")
                        .sample(&mut rng);
                    (a as u32, b as u32)
                };
                GateArrivals {
                    gate: e.gate,
                    herald: e.herald,
                    a,
                    b,
                }
            })
            .collect()
    }))
}

fn to_ps(s: f64) -> u64 {
    (s * 1e12).round() as u64
}

/// Turn arrivals into clicks. Photons arrive at the gate centre; noise clicks
/// are uniform over the gate. Detectors are not photon-number resolving, so
/// simultaneous photons give one click. The herald channel is taken as
/// already detected.
pub fn detect(
    arrivals: &[GateArrivals],
    detector: &DetectorModel,
    noise_per_gate: f64,
    seed: u64,
) -> Result<TimeTagStream> {
    detector.validate()?;
    if !(noise_per_gate >= 0.0) {
        return Err(Error::invalid(
            "noise_per_gate",
            format!("must be >= 0, got {noise_per_gate}"),
        ));
    }
    let p_noise = detector.noise_click_prob(noise_per_gate);
    let period = to_ps(detector.gate_period);
    let width = to_ps(detector.gate_width).max(1);
    let dead = to_ps(detector.dead_time);
    let tags = par_blocks(arrivals.len() as u64, |block, first, n| {
        let mut rng = substream(seed, domain::DETECT, block);
        let mut out = Vec::new();
        let mut times = Vec::with_capacity(4);
        for g in &arrivals[first as usize..(first + n) as usize] {
            let start = g.gate * period;
            let centre = start + width / 2;
            let begin = out.len();
            if g.herald {
                out.push(TimeTag {
                    time_ps: centre,
                    channel: HERALD,
                });
            }
            for (channel, photons) in [(PORT_A, g.a), (PORT_B, g.b)] {
                times.clear();
                if (0..photons).fold(false, |hit, _| rng.random_bool(detector.efficiency) | hit) {
                    times.push(centre);
                }
                if rng.random_bool(p_noise) {
                    times.push(start + rng.random_range(0..width));
                }
                times.sort_unstable();
                let mut last: Option<u64> = None;
                for &t in &times {
                    if last.is_none_or(|l| t > l && t - l >= dead) {
                        out.push(TimeTag { time_ps: t, channel });
                        last = Some(t);
                    }
                }
            }
            out[begin..].sort_unstable();
        }
        out
    });
    Ok(TimeTagStream::from_sorted(tags))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrivals(n: u64, a: u32, b: u32) -> Vec<GateArrivals> {
        (0..n)
            .map(|gate| GateArrivals {
                gate,
                herald: true,
                a,
                b,
            })
            .collect()
    }

    #[test]
    fn perfect_detector_one_click_per_photon_gate() {
        let tags = detect(&arrivals(1000, 1, 0), &DetectorModel::ideal(), 0.0, 1).unwrap();
        assert_eq!(tags.count(PORT_A), 1000);
        assert_eq!(tags.count(PORT_B), 0);
        assert_eq!(tags.count(HERALD), 1000);
    }

    #[test]
    fn blind_detector_sees_only_dark_counts() {
        let d = DetectorModel {
            efficiency: 0.0,
            dark_prob_per_gate: 0.01,
            ..DetectorModel::default()
        };
        let n = 200_000u64;
        let tags = detect(&arrivals(n, 3, 3), &d, 0.5, 9).unwrap();
        let sigma = (n as f64 * 0.01 * 0.99).sqrt();
        for ch in [PORT_A, PORT_B] {
            assert!((tags.count(ch) as f64 - n as f64 * 0.01).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn long_dead_time_allows_one_click_per_gate() {
        let d = DetectorModel {
            efficiency: 1.0,
            dark_prob_per_gate: 1.0,
            dead_time: 4e-9,
            ..DetectorModel::default()
        };
        let tags = detect(&arrivals(5000, 2, 0), &d, 0.0, 4).unwrap();
        assert_eq!(tags.count(PORT_A), 5000);
        assert_eq!(tags.count(PORT_B), 5000);
        let free = DetectorModel { dead_time: 0.0, ..d };
        assert!(detect(&arrivals(5000, 2, 0), &free, 0.0, 4).unwrap().count(PORT_A) > 5000);
    }

    #[test]
    fn noise_clicks_scale_with_noise() {
        let d = DetectorModel {
            efficiency: 0.5,
            dark_prob_per_gate: 0.0,
            ..DetectorModel::default()
        };
        let n = 1_000_000u64;
        let empty = arrivals(n, 0, 0);
        let c1 = detect(&empty, &d, 0.004, 2).unwrap().count(PORT_A) as f64;
        let c2 = detect(&empty, &d, 0.008, 3).unwrap().count(PORT_A) as f64;
        assert!((c2 / c1 - 2.0).abs() < 0.1, "{c1} {c2}");
    }

    #[test]
    fn routing_follows_populations() {
        let em: Vec<_> = (0..100_000)
            .map(|gate| Emission {
                gate,
                pairs: 1,
                herald: true,
                signal: 1,
            })
            .collect();
        let p = Populations {
            p_s: 0.2,
            p_i: 0.5,
            p_loss: 0.3,
        };
        let r = route(&em, Routing::Qubit(p), 8).unwrap();
        let a = r.iter().map(|g| g.a as f64).sum::<f64>() / 1e5;
        let b = r.iter().map(|g| g.b as f64).sum::<f64>() / 1e5;
        assert!((a - 0.2).abs() < 3.0 * (0.2f64 * 0.8 / 1e5).sqrt());
        assert!((b - 0.5).abs() < 3.0 * (0.25f64 / 1e5).sqrt());
        assert!(r.iter().all(|g| g.a + g.b <= 1));
    }
}
