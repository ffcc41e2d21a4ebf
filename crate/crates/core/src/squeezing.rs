//! Closed-form squeezing spectrum of the hard-wall plus uniform-slab model.
//!
//! The outgoing modes at detunings `±Δ` form a two-mode squeezed state with
//!
//! ```text
//! r = |arctanh( tanh(2θ) · sin((k₊ − k₋) a) )|
//! ```
//!
//! where `tanh(2θ) = 1/sqrt(1 + d²)` and `k± = sqrt(2m(mu ± g0 sqrt(1 + d²)))`.
//! The argument of `arctanh` reaching one marks a threshold, where the
//! linearised model predicts unbounded gain.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DimensionlessParams, ModelError};

/// Margins closer to zero than this are flagged `near_threshold`.
pub const NEAR_THRESHOLD_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SqueezingError {
    #[error("interior channel closed: big_m = {big_m} < sqrt(1 + d²) = {splitting} (k₋ is imaginary)")]
    ClosedChannel { big_m: f64, splitting: f64 },
    #[error("detuning grid must be strictly increasing (index {index})")]
    UnorderedGrid { index: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Squeezing at one detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingValue {
    /// Squeezing parameter; infinite at or above threshold.
    pub r: f64,
    pub above_threshold: bool,
    /// `tanh(2θ) sin(phase)`, or the amplitude ratio `|β|/|α|`.
    pub arctanh_argument: f64,
    /// `1 - |arctanh_argument|`, evaluated without cancellation.
    pub margin: f64,
    pub near_threshold: bool,
}

impl SqueezingValue {
    /// Builds a value from the arctanh argument and its separately computed
    /// margin `1 - |argument|`.
    pub fn from_argument(argument: f64, margin: f64) -> Self {
        let above_threshold = margin <= 0.0;
        let r = if above_threshold {
            f64::INFINITY
        } else if argument.abs() < 0.5 {
            argument.abs().atanh()
        } else {
            // arctanh(1 - m) = ln((2 - m)/m) / 2
            0.5 * ((2.0 - margin) / margin).ln()
        };
        Self {
            r,
            above_threshold,
            arctanh_argument: argument,
            margin,
            near_threshold: !above_threshold && margin < NEAR_THRESHOLD_MARGIN,
        }
    }

    pub fn from_ratio(ratio: f64) -> Self {
        Self::from_argument(ratio, 1.0 - ratio.abs())
    }

    pub fn zero() -> Self {
        Self::from_argument(0.0, 1.0)
    }

    /// `sinh²(r)`, the mean number of atoms per output mode.
    pub fn occupation(&self) -> f64 {
        self.r.sinh().powi(2)
    }
}

/// `tanh(2θ)` with `θ = arctanh(sqrt(d² + 1) - d)`, in the equivalent even
/// form `1/sqrt(1 + d²)`.
pub fn tanh_two_theta(d: f64) -> f64 {
    d.hypot(1.0).recip()
}

/// Phase `(k₊ − k₋) a` with the exact wavenumbers.
///
/// In reduced units `q± = sqrt(M ± s)` and the region length is
/// `A = kappa sqrt(M)`, so
/// `A (q₊ − q₋) = kappa M (sqrt(1 + s/M) − sqrt(1 − s/M))`,
/// rewritten as `2 kappa s / (sqrt(1 + s/M) + sqrt(1 − s/M))` to avoid the
/// cancellation at large `M`.
pub fn wavenumber_phase(params: &DimensionlessParams) -> Result<f64, SqueezingError> {
    params.validate()?;
    let s = params.splitting();
    let ratio = s / params.big_m;
    if ratio > 1.0 {
        return Err(SqueezingError::ClosedChannel {
            big_m: params.big_m,
            splitting: s,
        });
    }
    Ok(2.0 * params.kappa * s / ((1.0 + ratio).sqrt() + (1.0 - ratio).sqrt()))
}

/// Squeezing for amplitude `1/s` and phase `phase`, with the margin to
/// threshold computed from `s - 1 = d²/(s + 1)` and
/// `1 - |sin φ| = 2 sin²(π/4 − φ'/2)`, `φ' = φ mod π`.
fn squeezing_from_phase(d: f64, phase: f64) -> SqueezingValue {
    let s = d.hypot(1.0);
    let argument = phase.sin() / s;
    let reduced = phase.rem_euclid(PI);
    let half = (FRAC_PI_4 - 0.5 * reduced).sin();
    let sin_gap = 2.0 * half * half;
    let splitting_gap = d * d / (s + 1.0);
    let margin = (splitting_gap + sin_gap) / s;
    SqueezingValue::from_argument(argument, margin)
}

/// Squeezing with the exact wavenumbers `k±`.
pub fn r_analytic(params: &DimensionlessParams) -> Result<SqueezingValue, SqueezingError> {
    let phase = wavenumber_phase(params)?;
    Ok(squeezing_from_phase(params.d, phase))
}

/// `M → ∞` limit: `arctanh_argument = sin(kappa s)/s`.
pub fn r_large_mu_limit(d: f64, kappa: f64) -> SqueezingValue {
    squeezing_from_phase(d, kappa * d.hypot(1.0))
}

/// `r0 = |arctanh(sin kappa)|`.
pub fn r_zero_detuning(kappa: f64) -> SqueezingValue {
    r_large_mu_limit(0.0, kappa)
}

/// `[pi/2 + n pi for n in 0..=n_max]`.
pub fn threshold_kappas(n_max: usize) -> Vec<f64> {
    (0..=n_max).map(|n| FRAC_PI_2 + n as f64 * PI).collect()
}

/// Condensate loss rate `2 g0 sinh²(r0) / N0` due to output coupling.
///
/// `n0` must be at least one.
pub fn loss_rate(r0: f64, g0: f64, n0: f64) -> f64 {
    2.0 * g0 * r0.sinh().powi(2) / n0
}

/// Which closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticModel {
    /// Exact `k±` at finite `M`.
    #[default]
    ExactWavenumbers,
    /// `M → ∞` limit.
    LargeMu,
}

impl AnalyticModel {
    pub fn evaluate(self, params: &DimensionlessParams) -> Result<SqueezingValue, SqueezingError> {
        match self {
            Self::ExactWavenumbers => r_analytic(params),
            Self::LargeMu => {
                params.validate()?;
                Ok(r_large_mu_limit(params.d, params.kappa))
            }
        }
    }

    /// Phase whose crossing of `pi/2 + n pi` marks a threshold at `d = 0`.
    pub fn phase(self, params: &DimensionlessParams) -> Result<f64, SqueezingError> {
        match self {
            Self::ExactWavenumbers => wavenumber_phase(params),
            Self::LargeMu => Ok(params.kappa * params.splitting()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub d: f64,
    pub value: SqueezingValue,
}

/// Squeezing versus detuning at fixed `big_m` and `kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSpectrum {
    pub points: Vec<SpectrumPoint>,
    pub big_m: f64,
    pub kappa: f64,
}

impl SqueezingSpectrum {
    pub fn from_points(points: Vec<SpectrumPoint>, big_m: f64, kappa: f64) -> Result<Self, SqueezingError> {
        check_increasing(points.iter().map(|p| p.d))?;
        Ok(Self { points, big_m, kappa })
    }

    pub fn any_above_threshold(&self) -> bool {
        self.points.iter().any(|p| p.value.above_threshold)
    }
}

pub(crate) fn check_increasing(values: impl Iterator<Item = f64>) -> Result<(), SqueezingError> {
    let mut prev = f64::NEG_INFINITY;
    for (index, v) in values.enumerate() {
        if !(v > prev) {
            return Err(SqueezingError::UnorderedGrid { index });
        }
        prev = v;
    }
    Ok(())
}

/// Evaluates `model` over `d_grid`.
pub fn squeezing_spectrum(
    d_grid: &[f64],
    big_m: f64,
    kappa: f64,
    model: AnalyticModel,
) -> Result<SqueezingSpectrum, SqueezingError> {
    check_increasing(d_grid.iter().copied())?;
    let points = d_grid
        .iter()
        .map(|&d| {
            let params = DimensionlessParams::new(d, big_m, kappa)?;
            Ok(SpectrumPoint {
                d,
                value: model.evaluate(&params)?,
            })
        })
        .collect::<Result<Vec<_>, SqueezingError>>()?;
    Ok(SqueezingSpectrum { points, big_m, kappa })
}
