use serde::{Deserialize, Serialize};

use super::tags::{check_channel, TimeTagStream};
use crate::error::{Error, Result};

fn window_ps(window: f64) -> Result<u64> {
    if !(window > 0.0) {
        return Err(Error::invalid("window", format!("must be > 0, got {window}")));
    }
    Ok((window * 1e12).round() as u64)
}

/// Cross-channel pairs with `|Δt| ≤ window` (s), each tag used at most once,
/// matched greedily in time order.
pub fn coincidences(tags: &TimeTagStream, channels: (u8, u8), window: f64) -> Result<u64> {
    let w = window_ps(window)?;
    let a = tags.times(channels.0)?;
    let b = tags.times(channels.1)?;
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        if a[i].abs_diff(b[j]) <= w {
            n += 1;
            i += 1;
            j += 1;
        } else if a[i] < b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Estimate {
    pub g2: f64,
    pub stderr: f64,
    pub heralds: u64,
    pub herald_a: u64,
    pub herald_b: u64,
    pub herald_ab: u64,
}

fn any_within(times: &[u64], t: u64, w: u64) -> bool {
    let k = times.partition_point(|&x| x + w < t);
    k < times.len() && times[k] <= t + w
}

/// Herald-conditioned counts: heralds, heralds with an `a` click, with a `b`
/// click, and with both, all within `window` of the herald.
pub fn herald_counts(tags: &TimeTagStream, herald: u8, a: u8, b: u8, window: f64) -> Result<[u64; 4]> {
    let w = window_ps(window)?;
    for ch in [herald, a, b] {
        check_channel(ch)?;
    }
    let ta = tags.times(a)?;
    let tb = tags.times(b)?;
    let mut n = [0u64; 4];
    for t in tags.times(herald)? {
        let ha = any_within(&ta, t, w);
        let hb = any_within(&tb, t, w);
        n[0] += 1;
        n[1] += ha as u64;
        n[2] += hb as u64;
        n[3] += (ha && hb) as u64;
    }
    Ok(n)
}

/// Heralded `g²(0) = N_hab·N_h / (N_ha·N_hb)` with a binomial standard error.
///
/// With no threefolds the estimate is exactly 0 and the error is the value a
/// single threefold would have produced.
pub fn heralded_g2(tags: &TimeTagStream, herald: u8, a: u8, b: u8, window: f64) -> Result<G2Estimate> {
    let [nh, na, nb, nab] = herald_counts(tags, herald, a, b, window)?;
    if nh == 0 || na == 0 || nb == 0 {
        return Err(Error::InsufficientStatistics {
            heralds: nh,
            herald_a: na,
            herald_b: nb,
            herald_ab: nab,
        });
    }
    let (h, fa, fb, fab) = (nh as f64, na as f64, nb as f64, nab as f64);
    let unit = h / (fa * fb);
    let (g2, stderr) = if nab == 0 {
        (0.0, unit)
    } else {
        let rel2 = (1.0 - fab / h) / fab + (1.0 - fa / h) / fa + (1.0 - fb / h) / fb;
        (fab * unit, fab * unit * rel2.sqrt())
    };
    Ok(G2Estimate {
        g2,
        stderr,
        heralds: nh,
        herald_a: na,
        herald_b: nb,
        herald_ab: nab,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::tags::{TimeTag, HERALD, PORT_A, PORT_B};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp};

    fn stream(mut v: Vec<TimeTag>) -> TimeTagStream {
        v.sort();
        TimeTagStream::new(v).unwrap()
    }

    #[test]
    fn identical_streams_fully_coincide() {
        let mut v = Vec::new();
        for k in 0..500u64 {
            v.push(TimeTag {
                time_ps: k * 10_000,
                channel: PORT_A,
            });
            v.push(TimeTag {
                time_ps: k * 10_000,
                channel: PORT_B,
            });
        }
        assert_eq!(coincidences(&stream(v), (PORT_A, PORT_B), 1e-9).unwrap(), 500);
        assert_eq!(
            coincidences(&TimeTagStream::default(), (PORT_A, PORT_B), 1e-9).unwrap(),
            0
        );
        assert_eq!(
            coincidences(&TimeTagStream::default(), (PORT_A, 7), 1e-9),
            Err(Error::UnknownChannel(7))
        );
    }

    #[test]
    fn accidentals_match_poisson_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (r1, r2, duration, window) = (2e5, 3e5, 2.0, 2e-9);
        let mut v = Vec::new();
        for (ch, r) in [(PORT_A, r1), (PORT_B, r2)] {
            let exp = Exp::new(r).unwrap();
            let mut t = 0.0;
            loop {
                t += exp.sample(&mut rng);
                if t > duration {
                    break;
                }
                v.push(TimeTag {
                    time_ps: (t * 1e12) as u64,
                    channel: ch,
                });
            }
        }
        let n = coincidences(&stream(v), (PORT_A, PORT_B), window).unwrap() as f64;
        let expected = 2.0 * r1 * r2 * window * duration;
        assert!((n - expected).abs() < 3.0 * expected.sqrt(), "{n} vs {expected}");
    }

    #[test]
    fn single_photons_have_zero_g2() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut v = Vec::new();
        for k in 0..10_000u64 {
            let t = k * 1_000_000;
            v.push(TimeTag {
                time_ps: t,
                channel: HERALD,
            });
            v.push(TimeTag {
                time_ps: t,
                channel: if rng.random_bool(0.5) { PORT_A } else { PORT_B },
            });
        }
        let est = heralded_g2(&stream(v), HERALD, PORT_A, PORT_B, 4e-9).unwrap();
        assert_eq!(est.g2, 0.0);
        assert_eq!(est.herald_ab, 0);
        assert!(est.stderr > 0.0);
    }

    #[test]
    fn empty_arm_is_insufficient() {
        let v = vec![
            TimeTag {
                time_ps: 0,
                channel: HERALD,
            },
            TimeTag {
                time_ps: 0,
                channel: PORT_A,
            },
        ];
        assert!(matches!(
            heralded_g2(&stream(v), HERALD, PORT_A, PORT_B, 4e-9),
            Err(Error::InsufficientStatistics {
                heralds: 1,
                herald_a: 1,
                herald_b: 0,
                ..
            })
        ));
    }
}
