use serde::{Deserialize, Serialize};

use super::grid::GridSpec;

/// Time profile of the coupling, scaled to a peak of one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RampShape {
    /// `(1 + tanh(gamma (t − center)))/2`; switches on and stays on.
    TanhOn { center: f64 },
    /// `sech(gamma (t − center))`; on and off again.
    Sech { center: f64 },
    /// `(tanh(gamma (t − on)) − tanh(gamma (t − off)))/2`.
    Window { on: f64, off: f64 },
    Constant,
}

/// `g(x, t) = g_peak · shape(t)` on `[region_min, region_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingRamp {
    pub g_peak: f64,
    pub gamma: f64,
    pub shape: RampShape,
    pub region_min: f64,
    pub region_max: f64,
}

impl CouplingRamp {
    /// Default ramp: smooth switch-on centred at `center`.
    pub fn tanh_on(g_peak: f64, gamma: f64, center: f64, region: (f64, f64)) -> Self {
        Self {
            g_peak,
            gamma,
            shape: RampShape::TanhOn { center },
            region_min: region.0,
            region_max: region.1,
        }
    }

    pub fn constant(g_peak: f64, region: (f64, f64)) -> Self {
        Self {
            g_peak,
            gamma: 0.0,
            shape: RampShape::Constant,
            region_min: region.0,
            region_max: region.1,
        }
    }

    pub fn off() -> Self {
        Self::constant(0.0, (0.0, 0.0))
    }

    pub fn with_shape(self, shape: RampShape) -> Self {
        Self { shape, ..self }
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let g = self.gamma;
        let f = match self.shape {
            RampShape::TanhOn { center } => 0.5 * (1.0 + (g * (t - center)).tanh()),
            RampShape::Sech { center } => (g * (t - center)).cosh().recip(),
            RampShape::Window { on, off } => 0.5 * ((g * (t - on)).tanh() - (g * (t - off)).tanh()),
            RampShape::Constant => 1.0,
        };
        self.g_peak * f.clamp(0.0, 1.0)
    }

    /// Fraction of each grid cell `[x − h/2, x + h/2]` covered by the region.
    ///
    /// Using the overlap keeps the integrated coupling equal to
    /// `g_peak × region length` independently of where the edges fall.
    pub fn spatial_weights(&self, grid: &GridSpec) -> Vec<f64> {
        let h = grid.spacing();
        grid.positions()
            .into_iter()
            .map(|x| {
                let lo = (x - 0.5 * h).max(self.region_min);
                let hi = (x + 0.5 * h).min(self.region_max);
                ((hi - lo) / h).clamp(0.0, 1.0)
            })
            .collect()
    }
}
