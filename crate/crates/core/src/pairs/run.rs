use serde::{Deserialize, Serialize};

use super::amplitude::{pair_amplitude, PairAmplitude, PairModel};
use super::metrics::{bell_metrics, internal_reduced_state, BellMetrics, InternalState};
use super::quadrant::{post_select, quadrant_decompose};
use super::PairError;
use crate::dynamics::{Boundary, CouplingRamp, GridSpec, RampShape};

/// One pulse of weak coupling followed by free escape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairRunConfig {
    pub big_m: f64,
    pub half_width: f64,
    /// Periodic box `[−length/2, length/2)`.
    pub length: f64,
    pub n_points: usize,
    pub dt: f64,
    /// Peak coupling in units of `g0`.
    pub g_peak: f64,
    pub gamma: f64,
    pub pulse_on: f64,
    pub pulse_off: f64,
    pub t0: f64,
    /// Extra potential for the `+1` atom left of the condensate.
    pub asymmetry: f64,
}

impl Default for PairRunConfig {
    fn default() -> Self {
        Self {
            big_m: 12.0,
            half_width: 1.0,
            length: 64.0,
            n_points: 512,
            dt: 0.005,
            g_peak: 0.1,
            gamma: 4.0,
            pulse_on: 0.6,
            pulse_off: 1.6,
            t0: 3.0,
            asymmetry: 0.0,
        }
    }
}

impl PairRunConfig {
    pub fn grid(&self) -> GridSpec {
        GridSpec::new(-0.5 * self.length, 0.5 * self.length, self.n_points, self.dt).with_boundary(Boundary::Periodic)
    }

    pub fn model(&self) -> PairModel {
        PairModel::free(self.big_m, self.half_width, self.n_points).with_left_step(&self.grid(), self.asymmetry)
    }

    pub fn ramp(&self) -> CouplingRamp {
        CouplingRamp {
            g_peak: self.g_peak,
            gamma: self.gamma,
            shape: RampShape::Window {
                on: self.pulse_on,
                off: self.pulse_off,
            },
            region_min: -self.half_width,
            region_max: self.half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRunSummary {
    pub asymmetry: f64,
    pub norm_sq: f64,
    /// `[LL, LR, RL, RR]`.
    pub weights: [f64; 4],
    pub leakage: f64,
    pub inside_max: f64,
    pub inside_weight: f64,
    pub exchange_residual: f64,
    pub success_probability: f64,
    pub state: InternalState,
    pub metrics: BellMetrics,
}

pub fn run_pairs(cfg: &PairRunConfig) -> Result<(PairAmplitude, PairRunSummary), PairError> {
    let fa = pair_amplitude(&cfg.model(), &cfg.ramp(), &cfg.grid(), cfg.t0)?;
    let q = quadrant_decompose(&fa);
    let s = post_select(&q)?;
    let summary = PairRunSummary {
        asymmetry: cfg.asymmetry,
        norm_sq: fa.norm_sq,
        weights: q.weights(),
        leakage: q.leakage,
        inside_max: fa.inside_max,
        inside_weight: fa.inside_weight,
        exchange_residual: fa.exchange_residual(),
        success_probability: s.success_probability,
        state: internal_reduced_state(&s),
        metrics: bell_metrics(&s),
    };
    Ok((fa, summary))
}
