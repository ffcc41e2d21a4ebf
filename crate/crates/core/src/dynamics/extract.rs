//! Output correlators from a recorded evolution.
//!
//! At each recorded time the fields inside a spatial window are fitted to
//! the two plane waves of each channel at the requested detuning, by least
//! squares. The fitted amplitudes are then demodulated at that detuning over
//! the time window, which resolves frequencies to `2π / T`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::propagator::IncidentWave;
use super::state::ModeState;
use super::DynamicsError;

/// Number of sub-windows used for the variance estimate.
const SUB_WINDOWS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputWindow {
    /// Spatial region outside the coupling region, before any absorber.
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub detunings: Vec<f64>,
    /// Frequency resolution required, in units of `g0`.
    pub bin_width: f64,
    pub big_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorEstimate {
    pub d: f64,
    /// `|α₊|²`: outgoing over incoming flux in the `+1` channel.
    pub alpha_sq: f64,
    /// `|β|²`: outgoing `−1` flux per incoming `+1` flux.
    pub beta_sq: f64,
    /// Standard error of `beta_sq` from sub-window scatter.
    pub beta_sq_std_error: f64,
    /// Incoming `−1` amplitude relative to the incoming `+1` amplitude;
    /// nonzero values indicate reflections from the absorber.
    pub spurious_incoming: f64,
}

/// Least-squares amplitudes `(a, b)` of `a e^{−iqx} + b e^{iqx}`.
fn fit_two_waves(xs: &[f64], field: &[Complex64], q: f64) -> (Complex64, Complex64) {
    // normal equations of the 2×2 problem
    let (mut s11, mut s12, mut s22) = (0.0, Complex64::default(), 0.0);
    let (mut r1, mut r2) = (Complex64::default(), Complex64::default());
    for (&x, &f) in xs.iter().zip(field) {
        let e1 = Complex64::from_polar(1.0, -q * x);
        let e2 = e1.conj();
        s11 += 1.0;
        s22 += 1.0;
        s12 += e1.conj() * e2;
        r1 += e1.conj() * f;
        r2 += e2.conj() * f;
    }
    let det = s11 * s22 - s12.norm_sqr();
    let a = (s22 * r1 - s12 * r2) / det;
    let b = (s11 * r2 - s12.conj() * r1) / det;
    (a, b)
}

struct Amplitudes {
    u_in: Complex64,
    u_out: Complex64,
    w_out: Complex64,
    w_in: Complex64,
}

fn demodulate(samples: &[(f64, Amplitudes)], d: f64) -> Amplitudes {
    let n = samples.len() as f64;
    let mut acc = Amplitudes {
        u_in: Complex64::default(),
        u_out: Complex64::default(),
        w_out: Complex64::default(),
        w_in: Complex64::default(),
    };
    for (t, a) in samples {
        let rot = Complex64::from_polar(1.0 / n, d * t);
        acc.u_in += a.u_in * rot;
        acc.u_out += a.u_out * rot;
        acc.w_out += a.w_out * rot;
        acc.w_in += a.w_in * rot;
    }
    acc
}

/// Estimates `|α|²` and `|β|²` for an input in the `+1` channel.
///
/// If the run used a scattered-field split, pass its `incident` wave so
/// that the total field is reconstructed before fitting.
pub fn extract_output_correlators(
    history: &[ModeState],
    grid: &GridSpec,
    window: &OutputWindow,
    incident: Option<&IncidentWave>,
) -> Result<Vec<CorrelatorEstimate>, DynamicsError> {
    let span = window.t_max - window.t_min;
    let resolution = 2.0 * PI / span;
    if !(span > 0.0) || resolution > window.bin_width {
        return Err(DynamicsError::WindowTooShort {
            resolution,
            bin_width: window.bin_width,
        });
    }
    let states: Vec<&ModeState> = history
        .iter()
        .filter(|s| s.t >= window.t_min - 1e-12 && s.t <= window.t_max + 1e-12)
        .collect();
    if states.len() < 2 * SUB_WINDOWS {
        return Err(DynamicsError::Setup {
            reason: format!("only {} snapshots inside the time window", states.len()),
        });
    }
    let idx: Vec<usize> = (0..grid.n_points)
        .filter(|&j| (window.x_min..=window.x_max).contains(&grid.position(j)))
        .collect();
    if idx.len() < 4 {
        return Err(DynamicsError::Setup {
            reason: "output window contains fewer than 4 grid points".into(),
        });
    }
    let xs: Vec<f64> = idx.iter().map(|&j| grid.position(j) - grid.x_min).collect();

    window
        .detunings
        .iter()
        .map(|&d| {
            if !(window.big_m - d.abs() > 0.0) {
                return Err(DynamicsError::Setup {
                    reason: format!("exterior channel closed at d = {d}"),
                });
            }
            let qp = (window.big_m + d).sqrt();
            let qm = (window.big_m - d).sqrt();
            let samples: Vec<(f64, Amplitudes)> = states
                .iter()
                .map(|s| {
                    let u: Vec<Complex64> = idx
                        .iter()
                        .zip(&xs)
                        .map(|(&j, &x)| s.u[j] + incident.map_or(Complex64::default(), |inc| inc.value(x, s.t)))
                        .collect();
                    let w: Vec<Complex64> = idx.iter().map(|&j| s.w[j]).collect();
                    let (u_in, u_out) = fit_two_waves(&xs, &u, qp);
                    // for the conjugated field e^{−iqx} is outgoing
                    let (w_out, w_in) = fit_two_waves(&xs, &w, qm);
                    (s.t, Amplitudes { u_in, u_out, w_out, w_in })
                })
                .collect();
            let estimate = |amps: &Amplitudes| {
                let incoming = amps.u_in.norm_sqr();
                (
                    amps.u_out.norm_sqr() / incoming,
                    qm * amps.w_out.norm_sqr() / (qp * incoming),
                    (qm / qp).sqrt() * amps.w_in.norm() / amps.u_in.norm(),
                )
            };
            let (alpha_sq, beta_sq, spurious_incoming) = estimate(&demodulate(&samples, d));
            let chunk = samples.len() / SUB_WINDOWS;
            let subs: Vec<f64> = samples
                .chunks_exact(chunk)
                .take(SUB_WINDOWS)
                .map(|c| estimate(&demodulate(c, d)).1)
                .collect();
            let mean = subs.iter().sum::<f64>() / subs.len() as f64;
            let var = subs.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (subs.len() - 1) as f64;
            Ok(CorrelatorEstimate {
                d,
                alpha_sq,
                beta_sq,
                beta_sq_std_error: (var / subs.len() as f64).sqrt(),
                spurious_incoming,
            })
        })
        .collect()
}
