//! Split-step integrator for the linear mode equations.
//!
//! In the frame rotating at the chemical potential the mode functions obey
//!
//! ```text
//! i ∂t u =  (−∂² − M + V) u + g(x, t) w
//! i ∂t w = −(−∂² − M + V) w − g(x, t) u
//! ```
//!
//! (reduced units). A stationary solution `∝ e^{−i d t}` reproduces the
//! interior eigenproblem `[[M + d, −g], [−g, M − d]]` of the scattering
//! solver. Each step is a Strang splitting: a half step of the kinetic
//! term, exact in the sine or Fourier basis, then the exact exponential of
//! the local 2×2 generator `[[−iV, −ig], [ig, iV]]`, then another kinetic
//! half step. The local generator squares to `(g² − V²)·1`, so its
//! exponential is `C + S·G` with hyperbolic or circular `C`, `S`; it
//! conserves `|u|² − |w|²` pointwise, and the kinetic steps conserve `|u|²`
//! and `|w|²` separately.
//!
//! With an [`IncidentWave`], the fields are the scattered part of a
//! total-field/scattered-field split: the known free standing wave
//! `u_inc = (e^{−iqx} − e^{iqx}) e^{−idt}` (wall at `x_min`) enters only
//! through the sources `−iV u_inc` and `ig u_inc`, integrated with the
//! exponential midpoint rule.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::ramp::CouplingRamp;
use super::spectral::LineTransform;
use super::state::ModeState;
use super::DynamicsError;

/// Steps between growth checks.
const CHECK_INTERVAL: usize = 256;

/// Free standing wave at detuning `d` reflected from the wall at `x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    pub d: f64,
    pub wavenumber: f64,
}

impl IncidentWave {
    pub fn new(d: f64, big_m: f64) -> Result<Self, DynamicsError> {
        if !(big_m + d > 0.0) {
            return Err(DynamicsError::Setup {
                reason: format!("incident channel closed: M + d = {}", big_m + d),
            });
        }
        Ok(Self {
            d,
            wavenumber: (big_m + d).sqrt(),
        })
    }

    /// Incoming amplitude is one; the wall reflection has amplitude −1.
    pub fn value(&self, x_from_wall: f64, t: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, -self.d * t);
        Complex64::new(0.0, -2.0 * (self.wavenumber * x_from_wall).sin()) * phase
    }
}

/// Everything the integrator needs besides the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamModel {
    /// Chemical potential in units of `g0`; sets the rotating frame.
    pub big_m: f64,
    /// Potential sampled at the grid points, reduced units.
    pub potential: Vec<f64>,
    pub ramp: CouplingRamp,
    #[serde(default)]
    pub incident: Option<IncidentWave>,
}

impl BeamModel {
    pub fn free(big_m: f64, n_points: usize, ramp: CouplingRamp) -> Self {
        Self {
            big_m,
            potential: vec![0.0; n_points],
            ramp,
            incident: None,
        }
    }

    /// Largest wavenumber the model populates at detuning `d`.
    pub fn max_wavenumber(&self, d: f64) -> f64 {
        let v_min = self.potential.iter().copied().fold(0.0, f64::min);
        let split = d.hypot(self.ramp.g_peak).max(d.abs());
        (self.big_m + split - v_min).max(0.0).sqrt()
    }
}

pub struct Propagator {
    grid: GridSpec,
    model: BeamModel,
    positions: Vec<f64>,
    weights: Vec<f64>,
    eta: Vec<f64>,
    line: LineTransform,
    dt: f64,
    half_u: Vec<Complex64>,
    full_u: Vec<Complex64>,
    half_w: Vec<Complex64>,
    full_w: Vec<Complex64>,
}

impl Propagator {
    pub fn new(model: &BeamModel, grid: &GridSpec, d: f64) -> Result<Self, DynamicsError> {
        if model.potential.len() != grid.n_points {
            return Err(DynamicsError::Setup {
                reason: format!("potential has {} samples, grid has {}", model.potential.len(), grid.n_points),
            });
        }
        let k_incident = model.incident.map_or(0.0, |w| w.wavenumber);
        grid.validate(model.max_wavenumber(d).max(k_incident))?;
        let line = LineTransform::new(grid);
        let mut p = Self {
            grid: *grid,
            model: model.clone(),
            positions: grid.positions(),
            weights: model.ramp.spatial_weights(grid),
            eta: grid.absorption_profile(),
            line,
            dt: f64::NAN,
            half_u: Vec::new(),
            full_u: Vec::new(),
            half_w: Vec::new(),
            full_w: Vec::new(),
        };
        p.set_dt(grid.dt);
        Ok(p)
    }

    fn set_dt(&mut self, dt: f64) {
        if dt == self.dt {
            return;
        }
        let m = self.model.big_m;
        let gen = |k: f64| k * k - m;
        self.half_u = self.line.phases(gen, 0.5 * dt);
        self.full_u = self.line.phases(gen, dt);
        self.half_w = self.half_u.iter().map(|z| z.conj()).collect();
        self.full_w = self.full_u.iter().map(|z| z.conj()).collect();
        self.dt = dt;
    }

    fn kinetic(&mut self, state: &mut ModeState, half: bool) {
        let (pu, pw) = if half {
            (&self.half_u, &self.half_w)
        } else {
            (&self.full_u, &self.full_w)
        };
        self.line.apply(&mut state.u, pu);
        self.line.apply(&mut state.w, pw);
    }

    fn local(&self, state: &mut ModeState, t_mid: f64, dt: f64) {
        let envelope = self.model.ramp.envelope(t_mid);
        let x_wall = self.grid.x_min;
        let i = Complex64::i();
        for j in 0..state.u.len() {
            let g = envelope * self.weights[j];
            let v = self.model.potential[j];
            let eta = self.eta[j];
            let (u, w) = (state.u[j], state.w[j]);
            let (c, s) = generator_exp(g, v, dt);
            let damp = (-eta * dt).exp();
            let mut nu = (c * u + s * (-i * v * u - i * g * w)) * damp;
            let mut nw = (c * w + s * (i * g * u + i * v * w)) * damp;
            if let Some(inc) = self.model.incident {
                if g != 0.0 || v != 0.0 {
                    let ui = inc.value(self.positions[j] - x_wall, t_mid);
                    let (fu, fw) = (-i * v * ui, i * g * ui);
                    let (ch, sh) = generator_exp(g, v, 0.5 * dt);
                    let damp_h = (-0.5 * eta * dt).exp() * dt;
                    nu += (ch * fu + sh * (-i * v * fu - i * g * fw)) * damp_h;
                    nw += (ch * fw + sh * (i * g * fu + i * v * fw)) * damp_h;
                }
            }
            state.u[j] = nu;
            state.w[j] = nw;
        }
    }

    fn check_growth(&self, state: &ModeState, initial: f64, t0: f64) -> Result<(), DynamicsError> {
        let norm = state.total_norm(&self.grid);
        if !norm.is_finite() {
            return Err(DynamicsError::InstabilityDetected { t: state.t, norm, bound: f64::INFINITY });
        }
        if self.model.incident.is_none() {
            let bound = initial * (2.0 * self.model.ramp.g_peak * (state.t - t0)).exp() * (1.0 + 1e-8) + 1e-300;
            if norm > bound {
                return Err(DynamicsError::InstabilityDetected { t: state.t, norm, bound });
            }
        }
        Ok(())
    }

    /// Advances `state` to `t_final` with the largest step not exceeding
    /// the grid's `dt` that lands exactly on `t_final`.
    pub fn advance(&mut self, state: &mut ModeState, t_final: f64) -> Result<(), DynamicsError> {
        if state.len() != self.grid.n_points {
            return Err(DynamicsError::Setup {
                reason: format!("state has {} points, grid has {}", state.len(), self.grid.n_points),
            });
        }
        let span = t_final - state.t;
        if span <= 0.0 {
            return Ok(());
        }
        let steps = (span / self.grid.dt - 1e-9).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        self.set_dt(dt);
        let t0 = state.t;
        let initial = state.total_norm(&self.grid);
        self.kinetic(state, true);
        for n in 0..steps {
            self.local(state, t0 + (n as f64 + 0.5) * dt, dt);
            self.kinetic(state, n + 1 == steps);
            state.t = t0 + (n + 1) as f64 * dt;
            if (n + 1) % CHECK_INTERVAL == 0 {
                self.check_growth(state, initial, t0)?;
            }
        }
        state.t = t_final;
        self.check_growth(state, initial, t0)
    }
}

/// `exp(G t) = C + S·G` for `G = [[−iV, −ig], [ig, iV]]`, `G² = (g² − V²)`.
fn generator_exp(g: f64, v: f64, t: f64) -> (f64, f64) {
    let lam2 = g * g - v * v;
    if lam2 > 0.0 {
        let lam = lam2.sqrt();
        ((lam * t).cosh(), (lam * t).sinh() / lam)
    } else if lam2 < 0.0 {
        let om = (-lam2).sqrt();
        ((om * t).cos(), (om * t).sin() / om)
    } else {
        (1.0, t)
    }
}

/// Advances `state` to `t_final`.
pub fn evolve(state: ModeState, model: &BeamModel, grid: &GridSpec, t_final: f64) -> Result<ModeState, DynamicsError> {
    let mut state = state;
    let mut prop = Propagator::new(model, grid, state.label.d)?;
    prop.advance(&mut state, t_final)?;
    Ok(state)
}

/// Evolves through the increasing `times`, returning a snapshot at each.
pub fn evolve_recording(
    state: ModeState,
    model: &BeamModel,
    grid: &GridSpec,
    times: &[f64],
) -> Result<Vec<ModeState>, DynamicsError> {
    let mut state = state;
    let mut prop = Propagator::new(model, grid, state.label.d)?;
    let mut history = Vec::with_capacity(times.len());
    for &t in times {
        prop.advance(&mut state, t)?;
        history.push(state.clone());
    }
    Ok(history)
}
