//! Multi-mode "frequency ladder" for higher-order Bragg scattering.
//!
//! The same pump pair couples every mode `ν_s + kδν` to its neighbours, so a
//! photon can leak past the idler or be down-converted to `ν_d = ν_s − δν`.
//! Modes are indexed by ascending frequency with the signal at the centre.
//! Coupling `m` links modes `m` and `m+1`; its `delta_k` is the mismatch of
//! the lower→upper conversion.
//!
//! Integration is done in the frame where the Hamiltonian is constant:
//! `db/dz = iHb` with `H[m][m+1] = κ_m`, `H[m+1][m] = κ_m*` and diagonal
//! detunings satisfying `D[m+1] − D[m] = 2δk_m`, `D[signal] = −δk_signal`.
//! With two modes this is exactly the closed form of
//! [`super::transfer_matrix`].

use num_complex::Complex64 as C64;

use super::Coupling;
use crate::error::{Error, Result};
use crate::qubit::BichromaticState;

/// Largest accepted phase advance per RK4 step (rad).
pub const MAX_PHASE_PER_STEP: f64 = 0.1;
const MIN_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct LadderOutcome {
    amplitudes: Vec<C64>,
    p_loss_in: f64,
}

impl LadderOutcome {
    pub fn n_modes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn signal_index(&self) -> usize {
        (self.amplitudes.len() - 1) / 2
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `|A_m(L)|²` for each mode, lowest frequency first.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability sitting outside the signal and idler modes.
    pub fn leakage(&self) -> f64 {
        let c = self.signal_index();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != c && *m != c + 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Project back onto the qubit; leaked probability joins the loss bucket.
    pub fn to_state(&self) -> BichromaticState {
        let c = self.signal_index();
        let amp_s = self.amplitudes[c];
        let amp_i = self.amplitudes[c + 1];
        let p_loss = (1.0 - amp_s.norm_sqr() - amp_i.norm_sqr()).max(self.p_loss_in);
        BichromaticState::with_loss(amp_s, amp_i, p_loss)
            .unwrap_or_else(|_| renormalized(amp_s, amp_i, self.p_loss_in + self.leakage()))
    }
}

// Integration error can leave the total a few 1e-12 away from one; absorb it
// into the loss bucket rather than fail.
fn renormalized(amp_s: C64, amp_i: C64, p_loss: f64) -> BichromaticState {
    let kept = amp_s.norm_sqr() + amp_i.norm_sqr();
    let p_loss = p_loss.clamp(0.0, 1.0);
    let scale = if kept > 0.0 {
        ((1.0 - p_loss) / kept).sqrt()
    } else {
        0.0
    };
    BichromaticState::with_loss(amp_s * scale, amp_i * scale, 1.0 - kept * scale * scale).expect("renormalized state")
}

fn detunings(couplings: &[Coupling]) -> Vec<f64> {
    let n = couplings.len() + 1;
    let c = (n - 1) / 2;
    let mut d = vec![0.0; n];
    d[c] = -couplings[c].delta_k;
    for m in c..n - 1 {
        d[m + 1] = d[m] + 2.0 * couplings[m].delta_k;
    }
    for m in (1..=c).rev() {
        d[m - 1] = d[m] - 2.0 * couplings[m - 1].delta_k;
    }
    d
}

/// Gershgorin bound on the spectral radius of the ladder Hamiltonian.
fn spectral_bound(couplings: &[Coupling], d: &[f64]) -> f64 {
    (0..d.len())
        .map(|m| {
            let left = if m > 0 { couplings[m - 1].kappa.norm() } else { 0.0 };
            let right = if m < couplings.len() {
                couplings[m].kappa.norm()
            } else {
                0.0
            };
            d[m].abs() + left + right
        })
        .fold(0.0, f64::max)
}

/// Smallest step count keeping the per-step phase advance at or below
/// `per_step` rad (never fewer than 100).
pub fn min_ladder_steps(couplings: &[Coupling], length: f64, per_step: f64) -> usize {
    if couplings.is_empty() {
        return MIN_STEPS;
    }
    let d = detunings(couplings);
    let needed = (spectral_bound(couplings, &d) * length / per_step).ceil();
    (needed as usize).max(MIN_STEPS)
}

/// Integrate the coupled-mode ladder over `[0, length]` with fixed-step RK4.
///
/// `state` seeds the signal (centre) and idler (centre + 1) modes; its loss
/// bucket is carried through unchanged.
pub fn ladder_simulate(
    state: &BichromaticState,
    n_modes: usize,
    couplings: &[Coupling],
    length: f64,
    steps: usize,
) -> Result<LadderOutcome> {
    if n_modes < 3 || n_modes.is_multiple_of(2) {
        return Err(Error::invalid(
            "n_modes",
            format!("must be odd and >= 3, got {n_modes}"),
        ));
    }
    if couplings.len() != n_modes - 1 {
        return Err(Error::invalid(
            "couplings",
            format!(
                "need {} couplings for {n_modes} modes, got {}",
                n_modes - 1,
                couplings.len()
            ),
        ));
    }
    if !(length > 0.0) {
        return Err(Error::invalid("length", format!("must be > 0, got {length}")));
    }
    let d = detunings(couplings);
    let bound = spectral_bound(couplings, &d);
    let advance = bound * length / steps.max(1) as f64;
    if steps < MIN_STEPS || advance > MAX_PHASE_PER_STEP {
        return Err(Error::StepTooLarge {
            advance,
            limit: MAX_PHASE_PER_STEP,
            min_steps: min_ladder_steps(couplings, length, MAX_PHASE_PER_STEP),
        });
    }

    let c = (n_modes - 1) / 2;
    let mut b = vec![C64::new(0.0, 0.0); n_modes];
    b[c] = state.amp_s();
    b[c + 1] = state.amp_i();

    let h = length / steps as f64;
    let kappas: Vec<C64> = couplings.iter().map(|c| c.kappa).collect();
    let deriv = |x: &[C64], out: &mut [C64]| {
        let i = C64::new(0.0, 1.0);
        for m in 0..n_modes {
            let mut acc = x[m] * d[m];
            if m + 1 < n_modes {
                acc += kappas[m] * x[m + 1];
            }
            if m > 0 {
                acc += kappas[m - 1].conj() * x[m - 1];
            }
            out[m] = i * acc;
        }
    };

    let zero = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![zero; n_modes],
        vec![zero; n_modes],
        vec![zero; n_modes],
        vec![zero; n_modes],
    );
    let mut tmp = vec![zero; n_modes];
    for _ in 0..steps {
        deriv(&b, &mut k1);
        for m in 0..n_modes {
            tmp[m] = b[m] + k1[m] * (h / 2.0);
        }
        deriv(&tmp, &mut k2);
        for m in 0..n_modes {
            tmp[m] = b[m] + k2[m] * (h / 2.0);
        }
        deriv(&tmp, &mut k3);
        for m in 0..n_modes {
            tmp[m] = b[m] + k3[m] * h;
        }
        deriv(&tmp, &mut k4);
        for m in 0..n_modes {
            b[m] += (k1[m] + k2[m] * 2.0 + k3[m] * 2.0 + k4[m]) * (h / 6.0);
        }
    }

    Ok(LadderOutcome {
        amplitudes: b,
        p_loss_in: state.p_loss(),
    })
}
