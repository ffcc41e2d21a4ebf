//! First-order two-atom amplitude `f(x, y, t)`.
//!
//! `x` is the position of the `+1` atom, `y` that of the `−1` atom. In the
//! frame rotating at twice the chemical potential
//!
//! ```text
//! i ∂t f = (h₊(x) + h₋(y) − 2M) f + g(x, t) δ(x − y),   h± = −∂² + V±
//! ```
//!
//! with `f = 0` initially. The δ is one grid cell wide with height `1/dx`.
//! Stepping is Strang split: exact kinetic phases on a periodic 2D FFT
//! around the potential phase. The diagonal source is integrated exactly
//! over each step for the free part, which keeps the time stepping from
//! aliasing far off-resonant pairs onto the resonance.

use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::PairError;
use crate::dynamics::{Boundary, CouplingRamp, GridSpec};
use crate::dynamics::spectral::LineTransform;

/// Largest created norm² accepted as first order.
pub const PERTURBATION_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    /// Chemical potential in units of `g0`.
    pub big_m: f64,
    /// Condensate occupies `[−half_width, half_width]`, reduced units.
    pub half_width: f64,
    /// Potential felt by the `+1` atom, sampled on the grid.
    pub v_plus: Vec<f64>,
    /// Potential felt by the `−1` atom.
    pub v_minus: Vec<f64>,
}

impl PairModel {
    pub fn free(big_m: f64, half_width: f64, n_points: usize) -> Self {
        Self {
            big_m,
            half_width,
            v_plus: vec![0.0; n_points],
            v_minus: vec![0.0; n_points],
        }
    }

    /// Adds `delta_v` to the `+1` potential left of the condensate.
    pub fn with_left_step(mut self, grid: &GridSpec, delta_v: f64) -> Self {
        for (j, v) in self.v_plus.iter_mut().enumerate() {
            if grid.position(j) < -self.half_width {
                *v += delta_v;
            }
        }
        self
    }

    /// Coupling switched on only inside the condensate.
    pub fn ramp_region(&self) -> (f64, f64) {
        (-self.half_width, self.half_width)
    }

    /// Largest single-atom wavenumber a pair of total energy `2M` plus the
    /// ramp bandwidth can populate.
    pub fn max_wavenumber(&self, ramp: &CouplingRamp) -> f64 {
        let v_min = self.v_plus.iter().chain(&self.v_minus).copied().fold(0.0, f64::min);
        (2.0 * self.big_m + 2.0 * ramp.gamma - v_min).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairAmplitude {
    /// Row-major, `f[i * n + j] = f(x_i, y_j)`.
    pub f: Vec<Complex64>,
    pub grid: GridSpec,
    pub t0: f64,
    pub half_width: f64,
    /// `∫∫ |f|² dx dy`.
    pub norm_sq: f64,
    /// Largest `|f|` with both atoms inside the condensate.
    pub inside_max: f64,
    /// Weight with both atoms inside the condensate.
    pub inside_weight: f64,
}

impl PairAmplitude {
    pub fn n(&self) -> usize {
        self.grid.n_points
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.f[i * self.n() + j]
    }

    pub fn cell_area(&self) -> f64 {
        self.grid.spacing().powi(2)
    }

    /// Largest `|f(x, y) − f(y, x)|`.
    pub fn exchange_residual(&self) -> f64 {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| (self.at(i, j) - self.at(j, i)).norm())
            .fold(0.0, f64::max)
    }

    /// Writes `x,y,density` rows for every `stride`-th point on each axis.
    pub fn write_density<W: Write>(&self, out: &mut W, stride: usize) -> io::Result<()> {
        let stride = stride.max(1);
        writeln!(out, "# t0 = {}", self.t0)?;
        writeln!(out, "# half_width = {}", self.half_width)?;
        writeln!(out, "x,y,density")?;
        let n = self.n();
        for i in (0..n).step_by(stride) {
            for j in (0..n).step_by(stride) {
                let (x, y) = (self.grid.position(i), self.grid.position(j));
                writeln!(out, "{x},{y},{:e}", self.at(i, j).norm_sqr())?;
            }
        }
        Ok(())
    }
}

struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn rows(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        data.par_chunks_mut(self.n).for_each(|row| fft.process(row));
    }

    fn transpose(&self, data: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                data.swap(i * n + j, j * n + i);
            }
        }
    }

    /// Multiplies the 2D spectrum by `phases`, which must be symmetric
    /// under exchange of the two axes. With `source`, the spectrum of a
    /// diagonal array, `filter[k] · diag[(k_a + k_b) mod n]`, is added first.
    fn apply(&self, data: &mut [Complex64], phases: &[Complex64], source: Option<(&[f64], &[Complex64])>) {
        let n = self.n;
        self.rows(data, &self.forward);
        self.transpose(data);
        self.rows(data, &self.forward);
        let scale = 1.0 / (n * n) as f64;
        data.par_chunks_mut(n).enumerate().for_each(|(a, row)| {
            for (b, z) in row.iter_mut().enumerate() {
                let idx = a * n + b;
                if let Some((filter, diag)) = source {
                    *z += filter[idx] * diag[(a + b) % n];
                }
                *z *= phases[idx] * scale;
            }
        });
        self.rows(data, &self.inverse);
        self.transpose(data);
        self.rows(data, &self.inverse);
    }
}

fn pair_energies(k: &[f64], big_m: f64) -> Vec<f64> {
    k.iter().flat_map(|&ka| k.iter().map(move |&kb| ka * ka + kb * kb - 2.0 * big_m)).collect()
}

fn phases(energies: &[f64], t: f64) -> Vec<Complex64> {
    energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect()
}

/// `sinc(E dt / 2)`: a source held over one step and propagated freely
/// equals the midpoint injection times this factor. Without it the
/// once-per-step injection also drives pairs at `E ≈ 2π m / dt`.
fn step_filter(energies: &[f64], dt: f64) -> Vec<f64> {
    energies
        .iter()
        .map(|&e| {
            let x = 0.5 * e * dt;
            if x.abs() < 1e-8 {
                1.0
            } else {
                x.sin() / x
            }
        })
        .collect()
}

/// Evolves the pair amplitude from zero at `t = 0` to `t0`.
pub fn pair_amplitude(model: &PairModel, ramp: &CouplingRamp, grid: &GridSpec, t0: f64) -> Result<PairAmplitude, PairError> {
    let n = grid.n_points;
    if grid.boundary != Boundary::Periodic {
        return Err(PairError::Setup {
            reason: "pair grid must be periodic".into(),
        });
    }
    if model.v_plus.len() != n || model.v_minus.len() != n {
        return Err(PairError::Setup {
            reason: format!("potentials must have {n} samples"),
        });
    }
    if !(grid.x_min < -model.half_width && grid.x_max > model.half_width) {
        return Err(PairError::Setup {
            reason: format!("domain [{}, {}] does not contain the condensate", grid.x_min, grid.x_max),
        });
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(PairError::Setup {
            reason: format!("t0 = {t0} must be positive"),
        });
    }
    grid.validate(model.max_wavenumber(ramp))?;

    let h = grid.spacing();
    let steps = (t0 / grid.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = t0 / steps as f64;
    let line = LineTransform::new(grid);
    let energies = pair_energies(line.wavenumbers(), model.big_m);
    let (half, full) = (phases(&energies, 0.5 * dt), phases(&energies, dt));
    let filter = step_filter(&energies, dt);
    let fft = Fft2::new(n);
    let weights = ramp.spatial_weights(grid);
    let i = Complex64::i();
    // potential phase over a full and a half step, per axis
    let pot = |v: &[f64], t: f64| -> Vec<Complex64> { v.iter().map(|&x| Complex64::from_polar(1.0, -x * t)).collect() };
    let (pp, pm) = (pot(&model.v_plus, dt), pot(&model.v_minus, dt));
    let (hp, hm) = (pot(&model.v_plus, 0.5 * dt), pot(&model.v_minus, 0.5 * dt));

    let mut f = vec![Complex64::default(); n * n];
    // diagonal source of the previous step, already transformed
    let mut pending: Option<Vec<Complex64>> = None;
    for step in 0..steps {
        let kinetic = if step == 0 { &half } else { &full };
        fft.apply(&mut f, kinetic, pending.as_deref().map(|d| (filter.as_slice(), d)));
        f.par_chunks_mut(n).enumerate().for_each(|(a, row)| {
            for (z, q) in row.iter_mut().zip(&pm) {
                *z *= pp[a] * q;
            }
        });
        let g_t = ramp.envelope((step as f64 + 0.5) * dt);
        pending = (g_t != 0.0).then(|| {
            let mut diag: Vec<Complex64> = (0..n).map(|a| -i * dt * g_t * weights[a] / h * hp[a] * hm[a]).collect();
            fft.forward.process(&mut diag);
            diag
        });
    }
    fft.apply(&mut f, &half, pending.as_deref().map(|d| (filter.as_slice(), d)));

    let area = h * h;
    let norm_sq = f.iter().map(|z| z.norm_sqr()).sum::<f64>() * area;
    if norm_sq > PERTURBATION_LIMIT {
        return Err(PairError::PerturbationInvalid {
            norm_sq,
            limit: PERTURBATION_LIMIT,
        });
    }
    let inside: Vec<usize> = (0..n).filter(|&a| grid.position(a).abs() <= model.half_width).collect();
    let (mut inside_max, mut inside_weight) = (0.0f64, 0.0);
    for &a in &inside {
        for &b in &inside {
            let z = f[a * n + b];
            inside_max = inside_max.max(z.norm());
            inside_weight += z.norm_sqr() * area;
        }
    }
    Ok(PairAmplitude {
        f,
        grid: *grid,
        t0,
        half_width: model.half_width,
        norm_sq,
        inside_max,
        inside_weight,
    })
}
