use std::f64::consts::TAU;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::ScanResult;
use crate::error::{Error, Result};

pub const MAX_FIT_ITERATIONS: usize = 200;

/// `p_s(x) = A + B·cos(2πx/Λ + φ₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    /// `B/A`, the contrast `(max − min)/(max + min)` of the fitted curve.
    pub visibility: f64,
    pub visibility_stderr: f64,
    pub offset: f64,
    pub amplitude: f64,
    pub amplitude_stderr: f64,
    /// φ₀ (rad) at `x = 0`.
    pub phase: f64,
    /// Λ in sweep units.
    pub period: f64,
    pub period_stderr: f64,
    pub rms: f64,
    pub iterations: usize,
}

pub fn fit_fringes(scan: &ScanResult) -> Result<FringeFit> {
    let xs = scan.xs();
    let ys = scan.p_s();
    let errs: Vec<f64> = scan.points.iter().map(|p| p.err).collect();
    fit_sinusoid(&xs, &ys, &errs)
}

struct Problem<'a> {
    x: Vec<f64>,
    y: &'a [f64],
    w: Vec<f64>,
}

impl Problem<'_> {
    fn basis(&self, f: f64, i: usize) -> (f64, f64) {
        (TAU * f * self.x[i]).sin_cos()
    }

    fn cost(&self, p: &Vector4<f64>) -> f64 {
        (0..self.x.len())
            .map(|i| {
                let (s, c) = self.basis(p[3], i);
                let r = self.y[i] - (p[0] + p[1] * c + p[2] * s);
                self.w[i] * r * r
            })
            .sum()
    }

    /// Normal matrix and gradient of the weighted least-squares problem.
    fn normal(&self, p: &Vector4<f64>) -> (Matrix4<f64>, Vector4<f64>) {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for i in 0..self.x.len() {
            let (s, c) = self.basis(p[3], i);
            let r = self.y[i] - (p[0] + p[1] * c + p[2] * s);
            let j = Vector4::new(1.0, c, s, TAU * self.x[i] * (p[2] * c - p[1] * s));
            jtj += self.w[i] * j * j.transpose();
            jtr += self.w[i] * r * j;
        }
        (jtj, jtr)
    }

    /// Linear parameters for a fixed frequency.
    fn linear(&self, f: f64) -> Option<Vector4<f64>> {
        let mut m = nalgebra::Matrix3::zeros();
        let mut v = nalgebra::Vector3::zeros();
        for i in 0..self.x.len() {
            let (s, c) = self.basis(f, i);
            let j = nalgebra::Vector3::new(1.0, c, s);
            m += self.w[i] * j * j.transpose();
            v += self.w[i] * self.y[i] * j;
        }
        let sol = m.lu().solve(&v)?;
        Some(Vector4::new(sol[0], sol[1], sol[2], f))
    }
}

fn fit_sinusoid(xs: &[f64], ys: &[f64], errs: &[f64]) -> Result<FringeFit> {
    let n = xs.len();
    if n < 8 {
        return Err(Error::invalid("scan", format!("need at least 8 points, got {n}")));
    }
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = hi - lo;
    if !(span > 0.0) || ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::invalid("scan", "degenerate sweep"));
    }
    // Zero errors (e.g. p = 0 exactly in a counting run) borrow the smallest
    // positive one; all-zero means unweighted.
    let floor = errs.iter().copied().filter(|&e| e > 0.0).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = if floor.is_finite() {
        errs.iter().map(|&e| 1.0 / e.max(floor).powi(2)).collect()
    } else {
        vec![1.0; n]
    };
    let mid = 0.5 * (lo + hi);
    let prob = Problem {
        x: xs.iter().map(|x| x - mid).collect(),
        y: ys,
        w,
    };

    // Fourier seed on a fine frequency grid.
    let wsum: f64 = prob.w.iter().sum();
    let mean = (0..n).map(|i| prob.w[i] * ys[i]).sum::<f64>() / wsum;
    let (f_lo, f_hi) = (0.5 / span, n as f64 / (2.0 * span));
    let grid = 4000;
    let mut best = (f_lo, -1.0);
    #[allow(clippy::needless_range_loop)]
    for k in 0..=grid {
        let f = f_lo + (f_hi - f_lo) * k as f64 / grid as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for i in 0..n {
            let (s, c) = prob.basis(f, i);
            re += prob.w[i] * (ys[i] - mean) * c;
            im += prob.w[i] * (ys[i] - mean) * s;
        }
        let power = re * re + im * im;
        if power > best.1 {
            best = (f, power);
        }
    }
    let mut p = prob.linear(best.0).ok_or(Error::FitNonConvergence {
        iterations: 0,
        rms: f64::NAN,
    })?;
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let no_fringes = |amp: f64, sd: f64| Error::NoFringes {
        amplitude: amp,
        uncertainty: sd,
    };
    if p[1].hypot(p[2]) <= 1e-12 * scale.max(1e-300) {
        return Err(no_fringes(p[1].hypot(p[2]), 0.0));
    }

    // Levenberg–Marquardt with diagonal scaling.
    let mut cost = prob.cost(&p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_FIT_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = prob.normal(&p);
        let mut damped = jtj;
        for d in 0..4 {
            damped[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
        }
        let step = match damped.lu().solve(&jtr) {
            Some(s) => s,
            None => {
                lambda *= 10.0;
                continue;
            }
        };
        let trial = p + step;
        let trial_cost = prob.cost(&trial);
        if trial_cost <= cost {
            let drop = cost - trial_cost;
            p = trial;
            cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-12);
            let rel_step = (step[3] / p[3])
                .abs()
                .max(step.rows(0, 3).norm() / (p.rows(0, 3).norm() + 1e-300));
            if drop <= 1e-14 * cost + 1e-32 || rel_step < 1e-13 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                // no descent direction left: at the minimum to working precision
                converged = true;
                break;
            }
        }
    }
    let rms = (cost / wsum).sqrt();
    if !converged {
        return Err(Error::FitNonConvergence { iterations, rms });
    }

    let (jtj, _) = prob.normal(&p);
    let s2 = cost / (n as f64 - 4.0);
    let cov = jtj
        .try_inverse()
        .map(|m| m * s2)
        .unwrap_or_else(|| Matrix4::from_element(f64::NAN));
    let (a0, a, b, f) = (p[0], p[1], p[2], p[3]);
    let amp = a.hypot(b);
    let grad_amp = Vector4::new(0.0, a / amp, b / amp, 0.0);
    let amp_sd = (grad_amp.transpose() * cov * grad_amp)[0].max(0.0).sqrt();
    if !(amp > 3.0 * amp_sd) {
        return Err(no_fringes(amp, amp_sd));
    }
    let vis = amp / a0;
    let grad_v = Vector4::new(-amp / (a0 * a0), a / (amp * a0), b / (amp * a0), 0.0);
    let vis_sd = (grad_v.transpose() * cov * grad_v)[0].max(0.0).sqrt();
    let period = 1.0 / f.abs();
    let period_sd = cov[(3, 3)].max(0.0).sqrt() / (f * f);
    if span < period * (1.0 - 1e-9) {
        return Err(Error::invalid(
            "scan",
            format!("sweep of {span:.6e} is shorter than the fitted period {period:.6e}"),
        ));
    }
    // A + B cos(2πf(x − mid) + ψ) with a = B cos ψ, b = −B sin ψ
    let psi = (-b).atan2(a);
    let phase = (psi - TAU * f * mid).rem_euclid(TAU);
    // cos is even, so a negative frequency flips the phase
    let phase = if f < 0.0 { (-phase).rem_euclid(TAU) } else { phase };
    Ok(FringeFit {
        visibility: vis,
        visibility_stderr: vis_sd,
        offset: a0,
        amplitude: amp,
        amplitude_stderr: amp_sd,
        phase,
        period,
        period_stderr: period_sd,
        rms,
        iterations,
    })
}
