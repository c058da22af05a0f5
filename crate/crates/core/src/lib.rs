//! Simulator for single-photon frequency qubits driven by Bragg-scattering
//! four-wave mixing in optical fiber.
//!
//! The crate is layered bottom-up:
//!
//! - [`qubit`]: two-mode state algebra and 2×2 transfer matrices.
//! - [`bsfwm`]: pump/fiber parameters to coupling, closed-form rotations and
//!   the multi-mode frequency ladder.
//! - [`dispersion`]: β₂(ν, T), phase mismatch, acceptance bandwidth and the
//!   zero-GVD time-of-flight fit.
//! - [`noise`]: Raman and spontaneous-FWM noise per detection gate.
//! - [`photon`]: heralded source, gated detectors, time tags, coincidences
//!   and g²(0).
//! - [`experiments`]: Rabi and Ramsey scans, fringe fitting, visibility
//!   budget and GVD thermometry.
//! - [`config`] / [`cli`]: TOML run configuration and the command front end.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bsfwm;
pub mod cli;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod experiments;
pub mod noise;
pub mod photon;
pub mod qubit;
pub mod units;

pub use error::{Error, Result};
