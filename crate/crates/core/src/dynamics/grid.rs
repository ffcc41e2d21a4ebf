use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::DynamicsError;

/// Minimum number of grid points per shortest wavelength.
pub const POINTS_PER_WAVELENGTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Field vanishes at both ends; points sit strictly inside the interval.
    #[default]
    Dirichlet,
    /// Periodic box; points start at `x_min`.
    Periodic,
}

/// Complex absorbing layer `eta(x) = strength · (depth/width)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Absorber {
    pub width: f64,
    pub strength: f64,
    pub left: bool,
    pub right: bool,
}

impl Absorber {
    pub fn right(width: f64, strength: f64) -> Self {
        Self {
            width,
            strength,
            left: false,
            right: true,
        }
    }

    pub fn both(width: f64, strength: f64) -> Self {
        Self {
            width,
            strength,
            left: true,
            right: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub absorber: Option<Absorber>,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, dt: f64) -> Self {
        Self {
            x_min,
            x_max,
            n_points,
            dt,
            boundary: Boundary::Dirichlet,
            absorber: None,
        }
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn with_absorber(self, absorber: Absorber) -> Self {
        Self {
            absorber: Some(absorber),
            ..self
        }
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => self.length() / (self.n_points + 1) as f64,
            Boundary::Periodic => self.length() / self.n_points as f64,
        }
    }

    pub fn position(&self, j: usize) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => self.x_min + (j + 1) as f64 * self.spacing(),
            Boundary::Periodic => self.x_min + j as f64 * self.spacing(),
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    /// Largest wavenumber the grid represents.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn absorption_profile(&self) -> Vec<f64> {
        let Some(abs) = self.absorber else {
            return vec![0.0; self.n_points];
        };
        self.positions()
            .into_iter()
            .map(|x| {
                let right = if abs.right { x - (self.x_max - abs.width) } else { 0.0 };
                let left = if abs.left { (self.x_min + abs.width) - x } else { 0.0 };
                let depth = right.max(left).max(0.0) / abs.width;
                abs.strength * depth * depth
            })
            .collect()
    }

    /// Checks the static invariants and that `k_max` is sampled with at
    /// least [`POINTS_PER_WAVELENGTH`] points per wavelength.
    pub fn validate(&self, k_max: f64) -> Result<(), DynamicsError> {
        let fail = |reason: String| Err(DynamicsError::Resolution { reason });
        if self.n_points < 16 {
            return fail(format!("n_points = {} < 16", self.n_points));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt = {} must be positive", self.dt));
        }
        if !(self.x_max > self.x_min) || !self.length().is_finite() {
            return fail(format!("empty interval [{}, {}]", self.x_min, self.x_max));
        }
        if let Some(abs) = self.absorber {
            let sides = abs.left as u8 + abs.right as u8;
            if !(abs.width > 0.0) || abs.strength < 0.0 || abs.width * f64::from(sides) >= self.length() {
                return fail(format!("absorber {abs:?} does not fit the domain"));
            }
        }
        let wavelength = 2.0 * PI / k_max;
        let ppw = wavelength / self.spacing();
        if ppw < POINTS_PER_WAVELENGTH {
            return fail(format!(
                "{ppw:.2} points per wavelength at k_max = {k_max:.4}, need {POINTS_PER_WAVELENGTH}"
            ));
        }
        Ok(())
    }
}
