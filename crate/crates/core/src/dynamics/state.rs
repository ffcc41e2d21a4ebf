use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Plus,
    Minus,
}

/// Which input operator the mode functions belong to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeLabel {
    pub channel: Channel,
    /// Reduced detuning of the incoming wave.
    pub d: f64,
}

/// Mode functions of one input operator: `u` multiplies it in the `+1`
/// field, `w` in the conjugated `−1` field. Both are sampled on the grid in
/// the frame rotating at the chemical potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub u: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub t: f64,
    pub label: ModeLabel,
}

impl ModeState {
    pub fn zeros(n: usize, label: ModeLabel) -> Self {
        Self {
            u: vec![Complex64::default(); n],
            w: vec![Complex64::default(); n],
            t: 0.0,
            label,
        }
    }

    pub fn from_fn(grid: &GridSpec, label: ModeLabel, f: impl Fn(f64) -> (Complex64, Complex64)) -> Self {
        let (u, w) = grid.positions().into_iter().map(f).unzip();
        Self { u, w, t: 0.0, label }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `∫ (|u|² + |w|²) dx`.
    pub fn total_norm(&self, grid: &GridSpec) -> f64 {
        let h = grid.spacing();
        self.u.iter().chain(&self.w).map(|z| z.norm_sqr()).sum::<f64>() * h
    }

    /// `a · self + b · other`, keeping the time and label of `self`.
    pub fn combine(&self, a: Complex64, other: &ModeState, b: Complex64) -> ModeState {
        let mix = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        ModeState {
            u: mix(&self.u, &other.u),
            w: mix(&self.w, &other.w),
            t: self.t,
            label: self.label,
        }
    }

    /// Writes `x, re_u, im_u, re_w, im_w` rows with a `#` comment header.
    pub fn write_snapshot<W: Write>(&self, grid: &GridSpec, out: &mut W) -> io::Result<()> {
        writeln!(out, "# t = {}", self.t)?;
        writeln!(out, "# channel = {:?}, d = {}", self.label.channel, self.label.d)?;
        writeln!(out, "x,re_u,im_u,re_w,im_w")?;
        for (j, (u, w)) in self.u.iter().zip(&self.w).enumerate() {
            writeln!(out, "{},{},{},{},{}", grid.position(j), u.re, u.im, w.re, w.im)?;
        }
        Ok(())
    }
}

/// `∫ (|u|² − |w|²) dx` by the grid quadrature.
pub fn symplectic_norm(state: &ModeState, grid: &GridSpec) -> f64 {
    let h = grid.spacing();
    state
        .u
        .iter()
        .zip(&state.w)
        .map(|(u, w)| u.norm_sqr() - w.norm_sqr())
        .sum::<f64>()
        * h
}
