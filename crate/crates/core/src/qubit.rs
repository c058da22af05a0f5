//! State algebra for a photon in a superposition of two frequency modes.
//!
//! The qubit lives in the span of `|ν_s⟩` (signal) and `|ν_i⟩` (idler). Any
//! probability that leaves those two modes (leakage into neighbouring
//! frequencies, absorption) is tracked as a scalar loss bucket, so the state
//! stays pure on the qubit subspace and `|a_s|² + |a_i|² + p_loss = 1`.
//!
//! Bloch convention: `z = +1` is `|ν_i⟩` (north), `z = -1` is `|ν_s⟩` (south),
//! and the x axis points along the real equal superposition. Global phase is
//! not tracked.

use std::f64::consts::TAU;
use std::ops::Mul;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the normalization invariant.
pub const NORM_TOL: f64 = 1e-12;
/// Frobenius tolerance on `M†M - I` for accepting a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BichromaticState {
    amp_s: C64,
    amp_i: C64,
    p_loss: f64,
}

impl BichromaticState {
    /// Photon prepared in `|ν_s⟩` (south pole).
    pub fn signal() -> Self {
        Self {
            amp_s: C64::new(1.0, 0.0),
            amp_i: C64::new(0.0, 0.0),
            p_loss: 0.0,
        }
    }

    /// Photon prepared in `|ν_i⟩` (north pole).
    pub fn idler() -> Self {
        Self {
            amp_s: C64::new(0.0, 0.0),
            amp_i: C64::new(1.0, 0.0),
            p_loss: 0.0,
        }
    }

    /// Lossless state; the amplitudes must be normalized.
    pub fn new(amp_s: C64, amp_i: C64) -> Result<Self> {
        Self::with_loss(amp_s, amp_i, 0.0)
    }

    pub fn with_loss(amp_s: C64, amp_i: C64, p_loss: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_loss) {
            return Err(Error::invalid("p_loss", format!("{p_loss} not in [0, 1]")));
        }
        let total = amp_s.norm_sqr() + amp_i.norm_sqr() + p_loss;
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { total });
        }
        Ok(Self { amp_s, amp_i, p_loss })
    }

    /// `cos(α/2)|ν_s⟩ + e^{iφ} sin(α/2)|ν_i⟩`, i.e. polar angle measured from
    /// the south pole.
    pub fn from_angles(alpha: f64, phi: f64) -> Self {
        Self {
            amp_s: C64::new((alpha / 2.0).cos(), 0.0),
            amp_i: C64::from_polar((alpha / 2.0).sin(), phi),
            p_loss: 0.0,
        }
    }

    pub fn amp_s(&self) -> C64 {
        self.amp_s
    }

    pub fn amp_i(&self) -> C64 {
        self.amp_i
    }

    pub fn p_loss(&self) -> f64 {
        self.p_loss
    }

    /// Move additional probability into the loss bucket, scaling the qubit
    /// amplitudes so the total stays one. `extra` is a fraction of the
    /// probability currently in the qubit subspace.
    pub fn attenuate(&self, extra: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&extra) {
            return Err(Error::invalid("extra", format!("{extra} not in [0, 1]")));
        }
        let keep = (1.0 - extra).sqrt();
        let kept = self.amp_s.norm_sqr() + self.amp_i.norm_sqr();
        Ok(Self {
            amp_s: self.amp_s * keep,
            amp_i: self.amp_i * keep,
            p_loss: self.p_loss + kept * extra,
        })
    }

    /// Total probability; equals one for every valid state.
    pub fn total(&self) -> f64 {
        self.amp_s.norm_sqr() + self.amp_i.norm_sqr() + self.p_loss
    }
}

/// 2×2 unitary acting on `(a_s, a_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    m: [[C64; 2]; 2],
}

impl TransferMatrix {
    /// Validating constructor. Rejects matrices whose `‖M†M - I‖_F` exceeds
    /// [`UNITARY_TOL`].
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        let t = Self { m };
        let deviation = t.unitarity_defect();
        if deviation > UNITARY_TOL || !deviation.is_finite() {
            return Err(Error::NonUnitary {
                deviation,
                tolerance: UNITARY_TOL,
            });
        }
        Ok(t)
    }

    /// For matrices unitary by construction (closed-form rotations).
    pub(crate) fn from_unitary(m: [[C64; 2]; 2]) -> Self {
        debug_assert!(Self { m }.unitarity_defect() < UNITARY_TOL);
        Self { m }
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
        }
    }

    /// Diagonal phase `diag(1, e^{iφ})`; the free-evolution step as a matrix.
    pub fn phase(phi: f64) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, C64::from_polar(1.0, phi.rem_euclid(TAU))]],
        }
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = self.m;
        Self {
            m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
        }
    }

    /// Frobenius norm of `M†M - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().matmul(self);
        let mut acc = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { 1.0 } else { 0.0 };
                acc += (p.m[r][c] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    fn matmul(&self, rhs: &Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, out) in row.iter_mut().enumerate() {
                *out = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self { m }
    }

    /// `self · first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Self) -> Self {
        self.matmul(first)
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: Self) -> Self {
        self.matmul(&rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub p_s: f64,
    pub p_i: f64,
    pub p_loss: f64,
}

impl Populations {
    pub fn total(&self) -> f64 {
        self.p_s + self.p_i + self.p_loss
    }

    /// Convex combination `w·self + (1-w)·other`.
    pub fn mix(&self, other: &Populations, w: f64) -> Populations {
        Populations {
            p_s: w * self.p_s + (1.0 - w) * other.p_s,
            p_i: w * self.p_i + (1.0 - w) * other.p_i,
            p_loss: w * self.p_loss + (1.0 - w) * other.p_loss,
        }
    }
}

pub fn apply(u: &TransferMatrix, s: &BichromaticState) -> BichromaticState {
    let m = &u.m;
    BichromaticState {
        amp_s: m[0][0] * s.amp_s + m[0][1] * s.amp_i,
        amp_i: m[1][0] * s.amp_s + m[1][1] * s.amp_i,
        p_loss: s.p_loss,
    }
}

/// Azimuthal rotation: the idler amplitude picks up `e^{iφ}`.
pub fn phase_rotation(s: &BichromaticState, phi: f64) -> BichromaticState {
    BichromaticState {
        amp_s: s.amp_s,
        amp_i: s.amp_i * C64::from_polar(1.0, phi.rem_euclid(TAU)),
        p_loss: s.p_loss,
    }
}

pub fn bloch_coords(s: &BichromaticState) -> BlochVector {
    let coh = s.amp_s.conj() * s.amp_i;
    BlochVector {
        x: 2.0 * coh.re,
        y: 2.0 * coh.im,
        z: s.amp_i.norm_sqr() - s.amp_s.norm_sqr(),
    }
}

pub fn populations(s: &BichromaticState) -> Populations {
    Populations {
        p_s: s.amp_s.norm_sqr(),
        p_i: s.amp_i.norm_sqr(),
        p_loss: s.p_loss,
    }
}
