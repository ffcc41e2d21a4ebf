//! Physical and reduced parameters of the spin-exchange beam model.
//!
//! All solvers work in reduced units: energies and rates in units of the
//! peak coupling `g0`, times in units of `1/g0`, and lengths in units of
//! `1/sqrt(2 m g0 / hbar)`, so that the kinetic operator becomes `-d²/dξ²`.
//! Physical SI quantities only appear at the conversion boundary in this
//! module.
//!
//! Rates (`g0`, `mu`, `gamma`, detunings) are angular frequencies in rad/s;
//! with `hbar = 1` an energy `E` corresponds to the rate `E / hbar`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Mass of a sodium-23 atom in kg.
pub const SODIUM_MASS: f64 = 3.82e-26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} is outside its domain ({constraint})")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

fn check(name: &'static str, value: f64, ok: bool, constraint: &'static str) -> Result<(), ModelError> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(ModelError::Domain {
            name,
            value,
            constraint,
        })
    }
}

/// Model parameters in SI units (rates in rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Peak spin-exchange coupling rate.
    pub g0: f64,
    /// Condensate chemical potential expressed as a rate.
    pub mu: f64,
    /// Length of the condensate region, m.
    pub a: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Coupling ramp rate.
    pub gamma: f64,
    /// Number of condensate atoms.
    pub n0: f64,
}

impl PhysicalParams {
    pub fn new(g0: f64, mu: f64, a: f64, mass: f64, gamma: f64, n0: f64) -> Result<Self, ModelError> {
        let p = Self {
            g0,
            mu,
            a,
            mass,
            gamma,
            n0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the beam velocity `sqrt(2 hbar mu / m)` instead
    /// of the chemical potential.
    pub fn from_velocity(g0: f64, velocity: f64, a: f64, mass: f64, gamma: f64, n0: f64) -> Result<Self, ModelError> {
        check("velocity", velocity, velocity > 0.0, "> 0")?;
        check("mass", mass, mass > 0.0, "> 0")?;
        Self::new(g0, chemical_potential_from_velocity(velocity, mass), a, mass, gamma, n0)
    }

    /// A zero-length region is admitted (it yields `kappa = 0`).
    pub fn validate(&self) -> Result<(), ModelError> {
        check("g0", self.g0, self.g0 > 0.0, "> 0")?;
        check("mu", self.mu, self.mu > 0.0, "> 0")?;
        check("a", self.a, self.a >= 0.0, ">= 0")?;
        check("mass", self.mass, self.mass > 0.0, "> 0")?;
        check("gamma", self.gamma, self.gamma >= 0.0, ">= 0")?;
        check("n0", self.n0, self.n0 >= 1.0, ">= 1")?;
        Ok(())
    }

    /// Beam velocity `sqrt(2 hbar mu / m)` in m/s.
    pub fn velocity(&self) -> f64 {
        (2.0 * HBAR * self.mu / self.mass).sqrt()
    }

    /// Length unit of the reduced model, `1/sqrt(2 m g0 / hbar)`, in m.
    pub fn length_unit(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.g0)).sqrt()
    }
}

/// Chemical potential (as a rate) of atoms moving at `velocity`.
pub fn chemical_potential_from_velocity(velocity: f64, mass: f64) -> f64 {
    mass * velocity * velocity / (2.0 * HBAR)
}

/// Reduced parameters: detuning `d = delta/g0`, `big_m = mu/g0` and the
/// interaction coefficient `kappa = g0 * transit_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub d: f64,
    pub big_m: f64,
    pub kappa: f64,
}

impl DimensionlessParams {
    pub fn new(d: f64, big_m: f64, kappa: f64) -> Result<Self, ModelError> {
        let p = Self { d, big_m, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check("d", self.d, true, "finite")?;
        check("big_m", self.big_m, self.big_m > 0.0, "> 0")?;
        check("kappa", self.kappa, self.kappa >= 0.0, ">= 0")?;
        Ok(())
    }

    /// Region length in reduced length units.
    ///
    /// With `ξ = x sqrt(2 m g0)`, `kappa = 2 a g0 / sqrt(2 mu / m)` becomes
    /// `A / sqrt(M)`, hence `A = kappa sqrt(M)`.
    pub fn region_length(&self) -> f64 {
        self.kappa * self.big_m.sqrt()
    }

    /// `s = sqrt(1 + d²)`, the reduced interior splitting.
    pub fn splitting(&self) -> f64 {
        self.d.hypot(1.0)
    }

    pub fn with_d(self, d: f64) -> Self {
        Self { d, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }
}

/// Time for a beam at `sqrt(2 hbar mu / m)` to cross the region twice, in s.
pub fn transit_time(p: &PhysicalParams) -> Result<f64, ModelError> {
    p.validate()?;
    Ok(2.0 * p.a / p.velocity())
}

/// Converts to reduced parameters at detuning `delta` (rad/s).
pub fn to_dimensionless(p: &PhysicalParams, delta: f64) -> Result<DimensionlessParams, ModelError> {
    check("delta", delta, true, "finite")?;
    let t_bar = transit_time(p)?;
    DimensionlessParams::new(delta / p.g0, p.mu / p.g0, p.g0 * t_bar)
}

/// Thresholds for the `≫` relations the model relies on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityThresholds {
    /// Largest acceptable `gamma/g0`.
    pub max_gamma_over_g0: f64,
    /// Largest acceptable `g0/mu`.
    pub max_g0_over_mu: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self {
            max_gamma_over_g0: 0.1,
            max_g0_over_mu: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub steady_output_ok: bool,
    /// `gamma / g0`.
    pub gamma_over_g0: f64,
    pub large_mu_ok: bool,
    /// `g0 / mu`.
    pub g0_over_mu: f64,
    /// `kappa` lies below the first threshold `pi/2`.
    pub below_threshold: bool,
    /// Distance of `kappa` to the nearest threshold `pi/2 + n pi`.
    pub threshold_distance: f64,
    pub kappa: f64,
    /// Both exterior channels and both interior modes propagate for every
    /// detuning of the supplied grid.
    pub channels_open: bool,
}

/// Distance of `kappa` to the nearest element of `{pi/2 + n pi, n >= 0}`.
pub fn threshold_distance(kappa: f64) -> f64 {
    if kappa <= FRAC_PI_2 {
        return FRAC_PI_2 - kappa;
    }
    let phase = (kappa - FRAC_PI_2).rem_euclid(PI);
    phase.min(PI - phase)
}

pub fn validity(p: &PhysicalParams, d_grid: &[f64], thresholds: &ValidityThresholds) -> Result<ValidityReport, ModelError> {
    let reduced = to_dimensionless(p, 0.0)?;
    let gamma_over_g0 = p.gamma / p.g0;
    let g0_over_mu = p.g0 / p.mu;
    let channels_open = d_grid
        .iter()
        .all(|&d| reduced.big_m > d.hypot(1.0) && reduced.big_m > d.abs());
    Ok(ValidityReport {
        steady_output_ok: gamma_over_g0 <= thresholds.max_gamma_over_g0,
        gamma_over_g0,
        large_mu_ok: g0_over_mu <= thresholds.max_g0_over_mu,
        g0_over_mu,
        below_threshold: reduced.kappa < FRAC_PI_2,
        threshold_distance: threshold_distance(reduced.kappa),
        kappa: reduced.kappa,
        channels_open,
    })
}
