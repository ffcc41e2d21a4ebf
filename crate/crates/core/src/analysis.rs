//! Sweeps over the reduced parameters: spectrum grids, threshold search,
//! method comparison and the output-flux diagnostic.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DimensionlessParams, ModelError};
use crate::scattering::{r_scattering, ScatteringError};
use crate::squeezing::{r_analytic, r_large_mu_limit, wavenumber_phase, SqueezingError, SqueezingSpectrum, SqueezingValue};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("empty {axis} grid")]
    EmptyGrid { axis: &'static str },
    #[error("invalid range [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },
    #[error("spectrum is at or above threshold at d = {d}")]
    AboveThresholdInSpectrum { d: f64 },
    #[error("at d = {d}, kappa = {kappa}: {source}")]
    Point {
        d: f64,
        kappa: f64,
        #[source]
        source: Box<AnalysisError>,
    },
    #[error(transparent)]
    Squeezing(#[from] SqueezingError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form with the exact wavenumbers.
    #[default]
    Analytic,
    /// Closed form in the `M → ∞` limit.
    LargeMu,
    /// Numerical mode matching.
    Scattering,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::LargeMu => "large_mu",
            Self::Scattering => "scattering",
        }
    }

    /// Squeezing at one point. A singular matching system only occurs at
    /// a threshold and is reported as a flagged value.
    pub fn evaluate(self, params: &DimensionlessParams) -> Result<SqueezingValue, AnalysisError> {
        match self {
            Self::Analytic => Ok(r_analytic(params)?),
            Self::LargeMu => Ok(r_large_mu_limit(params.d, params.kappa)),
            Self::Scattering => match r_scattering(params) {
                Err(ScatteringError::IllConditioned { .. }) => Ok(SqueezingValue::from_argument(1.0, 0.0)),
                other => Ok(other?),
            },
        }
    }
}

/// `n` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n).map(|j| min + (max - min) * j as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub d: f64,
    pub kappa: f64,
    pub value: SqueezingValue,
    /// `kappa` is at or past the first threshold at this `d`. At finite `M`
    /// and `d = 0` the argument only touches one there, so `value` alone
    /// misses points just beyond it.
    pub past_threshold: bool,
}

impl GridPoint {
    pub fn above_threshold(&self) -> bool {
        self.value.above_threshold || self.past_threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub big_m: f64,
    pub method: Method,
    /// Ordered by `d`, then `kappa`.
    pub points: Vec<GridPoint>,
}

impl SpectrumGrid {
    /// Largest finite `r` below threshold at each `d`, with its `kappa`.
    pub fn ridge(&self) -> Vec<(f64, f64, f64)> {
        let mut out: Vec<(f64, f64, f64)> = Vec::new();
        for p in &self.points {
            if !p.value.r.is_finite() || p.past_threshold {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == p.d => {
                    if p.value.r > last.2 {
                        *last = (p.d, p.kappa, p.value.r);
                    }
                }
                _ => out.push((p.d, p.kappa, p.value.r)),
            }
        }
        out
    }
}

/// Evaluates `method` on the rectangular grid `d_values × kappa_values`.
pub fn spectrum_grid(d_values: &[f64], kappa_values: &[f64], big_m: f64, method: Method) -> Result<SpectrumGrid, AnalysisError> {
    if d_values.is_empty() {
        return Err(AnalysisError::EmptyGrid { axis: "detuning" });
    }
    if kappa_values.is_empty() {
        return Err(AnalysisError::EmptyGrid { axis: "kappa" });
    }
    let kappa_top = kappa_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let model_m = (method != Method::LargeMu).then_some(big_m);
    let first: Vec<Option<f64>> = d_values
        .par_iter()
        .map(|&d| {
            if kappa_top <= 0.0 {
                return Ok(None);
            }
            let report = find_thresholds(d, model_m, 0.0, kappa_top, 1e-12)?;
            Ok(report.first().map(|c| c.kappa))
        })
        .collect::<Result<_, AnalysisError>>()?;
    let nk = kappa_values.len();
    let points = (0..d_values.len() * nk)
        .into_par_iter()
        .map(|idx| {
            let (id, kappa) = (idx / nk, kappa_values[idx % nk]);
            let d = d_values[id];
            let wrap = |e: AnalysisError| AnalysisError::Point { d, kappa, source: Box::new(e) };
            let params = DimensionlessParams::new(d, big_m, kappa).map_err(|e| wrap(e.into()))?;
            let value = method.evaluate(&params).map_err(wrap)?;
            let past_threshold = first[id].is_some_and(|k| kappa >= k);
            Ok(GridPoint {
                d,
                kappa,
                value,
                past_threshold,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(SpectrumGrid { big_m, method, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCrossing {
    pub kappa: f64,
    /// Nearest `pi/2 + n pi`.
    pub nominal: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub d: f64,
    /// `None` for the `M → ∞` limit.
    pub big_m: Option<f64>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub tolerance: f64,
    pub crossings: Vec<ThresholdCrossing>,
}

impl ThresholdReport {
    pub fn first(&self) -> Option<&ThresholdCrossing> {
        self.crossings.first()
    }
}

/// `1 − |argument|`, given the sign of `cos(phase)`: it passes through zero
/// where the argument reaches ±1 and jumps elsewhere.
fn signed_margin(d: f64, big_m: Option<f64>, kappa: f64) -> Result<(f64, f64), AnalysisError> {
    let (phase, value) = match big_m {
        None => (kappa * d.hypot(1.0), r_large_mu_limit(d, kappa)),
        Some(m) => {
            let p = DimensionlessParams::new(d, m, kappa)?;
            (wavenumber_phase(&p)?, r_analytic(&p)?)
        }
    };
    let sign = if phase.cos() >= 0.0 { 1.0 } else { -1.0 };
    Ok((sign * value.margin, value.margin))
}

/// Scan plus bisection for the kappas where the closed-form arctanh
/// argument reaches one.
pub fn find_thresholds(
    d: f64,
    big_m: Option<f64>,
    kappa_min: f64,
    kappa_max: f64,
    tolerance: f64,
) -> Result<ThresholdReport, AnalysisError> {
    if !(kappa_min >= 0.0 && kappa_max > kappa_min && kappa_max.is_finite()) {
        return Err(AnalysisError::InvalidRange {
            min: kappa_min,
            max: kappa_max,
        });
    }
    // the phase is close to linear in kappa with slope ≈ s, so 64 samples
    // per half period cannot skip a sign change
    let s = d.hypot(1.0);
    let n_scan = (((kappa_max - kappa_min) * s / PI * 128.0).ceil() as usize).max(16);
    let kappas = linspace(kappa_min, kappa_max, n_scan + 1);
    let f = |k: f64| signed_margin(d, big_m, k).map(|v| v.0);
    let values = kappas.iter().map(|&k| f(k)).collect::<Result<Vec<_>, _>>()?;
    let mut crossings = Vec::new();
    for w in 0..n_scan {
        let (mut lo, mut hi) = (kappas[w], kappas[w + 1]);
        let (flo, fhi) = (values[w], values[w + 1]);
        if flo == 0.0 || flo.signum() == fhi.signum() {
            continue;
        }
        let lo_sign = flo.signum();
        while hi - lo > 0.25 * tolerance {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid)?.signum() == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let kappa = 0.5 * (lo + hi);
        // a genuine crossing has the margin vanishing; otherwise the sign
        // flip is the jump at cos(phase) = 0 with |argument| < 1
        let margin = signed_margin(d, big_m, kappa)?.1;
        if margin.abs() > 1e-6 {
            continue;
        }
        let n = ((kappa - FRAC_PI_2) / PI).round();
        let nominal = FRAC_PI_2 + n * PI;
        crossings.push(ThresholdCrossing {
            kappa,
            nominal,
            deviation: kappa - nominal,
        });
    }
    Ok(ThresholdReport {
        d,
        big_m,
        kappa_min,
        kappa_max,
        tolerance,
        crossings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub big_m: f64,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Point of the largest discrepancy.
    pub worst_d: f64,
    pub worst_kappa: f64,
    pub compared: usize,
    /// Points skipped because one method is at or above threshold.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub primary: CompareRow,
    pub tolerance: f64,
    pub pass: bool,
    /// One row per `M` of the dependence table.
    pub table: Vec<CompareRow>,
    /// Whether `max_abs` decreases strictly along the table.
    pub monotone: bool,
}

/// `|r_scattering − r_analytic|` over a grid at one `M`.
pub fn compare_at(d_values: &[f64], kappa_values: &[f64], big_m: f64) -> Result<CompareRow, AnalysisError> {
    let analytic = spectrum_grid(d_values, kappa_values, big_m, Method::Analytic)?;
    let scattering = spectrum_grid(d_values, kappa_values, big_m, Method::Scattering)?;
    let mut row = CompareRow {
        big_m,
        max_abs: 0.0,
        mean_abs: 0.0,
        worst_d: f64::NAN,
        worst_kappa: f64::NAN,
        compared: 0,
        skipped: 0,
    };
    let mut sum = 0.0;
    for (a, s) in analytic.points.iter().zip(&scattering.points) {
        if a.above_threshold() || s.above_threshold() {
            row.skipped += 1;
            continue;
        }
        let diff = (a.value.r - s.value.r).abs();
        sum += diff;
        row.compared += 1;
        if diff > row.max_abs || row.worst_d.is_nan() {
            row.max_abs = diff;
            row.worst_d = a.d;
            row.worst_kappa = a.kappa;
        }
    }
    if row.compared > 0 {
        row.mean_abs = sum / row.compared as f64;
    }
    Ok(row)
}

pub fn compare_methods(
    d_values: &[f64],
    kappa_values: &[f64],
    big_m: f64,
    m_table: &[f64],
    tolerance: f64,
) -> Result<CompareReport, AnalysisError> {
    let primary = compare_at(d_values, kappa_values, big_m)?;
    let table = m_table
        .iter()
        .map(|&m| compare_at(d_values, kappa_values, m))
        .collect::<Result<Vec<_>, _>>()?;
    let monotone = table.windows(2).all(|w| w[1].max_abs < w[0].max_abs);
    Ok(CompareReport {
        pass: primary.max_abs <= tolerance,
        primary,
        tolerance,
        table,
        monotone,
    })
}

/// Stated with every flux result, since no closed-form flux is available.
pub const FLUX_DEFINITION: &str =
    "flux = (1/2pi) * integral dDelta of sum over both channels of sinh^2(r_Delta), trapezoid rule over the computed detunings, Delta = d * g0";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxEstimate {
    /// Atoms per second.
    pub atoms_per_second: f64,
    pub d_min: f64,
    pub d_max: f64,
}

/// `(1/2π) Σ_channels Σ_bins sinh²(r) Δω` for bins of width `width_d · g0`.
pub fn flux_from_bins(bins: &[(f64, f64)], g0: f64) -> f64 {
    let integral: f64 = bins.iter().map(|&(width_d, occupation)| width_d * g0 * occupation).sum();
    2.0 * integral / (2.0 * PI)
}

pub fn flux_estimate(spectrum: &SqueezingSpectrum, g0: f64) -> Result<FluxEstimate, AnalysisError> {
    if let Some(p) = spectrum.points.iter().find(|p| p.value.above_threshold) {
        return Err(AnalysisError::AboveThresholdInSpectrum { d: p.d });
    }
    if spectrum.points.len() < 2 {
        return Err(AnalysisError::EmptyGrid { axis: "detuning" });
    }
    let bins: Vec<(f64, f64)> = spectrum
        .points
        .windows(2)
        .map(|w| (w[1].d - w[0].d, 0.5 * (w[0].value.occupation() + w[1].value.occupation())))
        .collect();
    Ok(FluxEstimate {
        atoms_per_second: flux_from_bins(&bins, g0),
        d_min: spectrum.points[0].d,
        d_max: spectrum.points[spectrum.points.len() - 1].d,
    })
}
