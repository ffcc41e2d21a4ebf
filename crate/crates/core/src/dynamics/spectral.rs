//! Exact propagation of `exp(-i f(k) t)` along one grid line.
//!
//! Periodic lines use a plain FFT. Dirichlet lines are embedded as the odd
//! extension `[0, x₁ … x_N, 0, −x_N … −x₁]` of period `2(N + 1)`; a phase
//! that depends only on `|k|` keeps the extension odd, so the result is the
//! sine-series propagation of the original samples.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Boundary, GridSpec};

pub struct LineTransform {
    boundary: Boundary,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Wavenumber of each extended-buffer index.
    wavenumbers: Vec<f64>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl LineTransform {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n_points;
        let (len, period) = match grid.boundary {
            Boundary::Periodic => (n, grid.length()),
            Boundary::Dirichlet => (2 * (n + 1), 2.0 * grid.length()),
        };
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let wavenumbers = (0..len)
            .map(|j| {
                let m = if j <= len / 2 { j as f64 } else { j as f64 - len as f64 };
                2.0 * PI * m / period
            })
            .collect();
        Self {
            boundary: grid.boundary,
            n,
            forward,
            inverse,
            wavenumbers,
            buffer: vec![Complex64::default(); len],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Phase table `exp(-i · generator(k) · t)` for this line.
    pub fn phases(&self, generator: impl Fn(f64) -> f64, t: f64) -> Vec<Complex64> {
        self.wavenumbers
            .iter()
            .map(|&k| Complex64::from_polar(1.0, -generator(k) * t))
            .collect()
    }

    /// Multiplies the spectrum of `line` by `phases` in place.
    pub fn apply(&mut self, line: &mut [Complex64], phases: &[Complex64]) {
        debug_assert_eq!(line.len(), self.n);
        debug_assert_eq!(phases.len(), self.buffer.len());
        let n = self.n;
        match self.boundary {
            Boundary::Periodic => self.buffer.copy_from_slice(line),
            Boundary::Dirichlet => {
                self.buffer[0] = Complex64::default();
                self.buffer[n + 1] = Complex64::default();
                for (j, &v) in line.iter().enumerate() {
                    self.buffer[j + 1] = v;
                    self.buffer[2 * n + 1 - j] = -v;
                }
            }
        }
        self.forward.process_with_scratch(&mut self.buffer, &mut self.scratch);
        for (b, p) in self.buffer.iter_mut().zip(phases) {
            *b *= p;
        }
        self.inverse.process_with_scratch(&mut self.buffer, &mut self.scratch);
        let scale = 1.0 / self.buffer.len() as f64;
        let offset = match self.boundary {
            Boundary::Periodic => 0,
            Boundary::Dirichlet => 1,
        };
        for (j, v) in line.iter_mut().enumerate() {
            *v = self.buffer[j + offset] * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_mode_picks_up_its_phase() {
        let grid = GridSpec::new(0.0, 5.0, 63, 0.01);
        let mut t = LineTransform::new(&grid);
        let k = 7.0 * PI / grid.length();
        let xs = grid.positions();
        let mut line: Vec<Complex64> = xs.iter().map(|&x| Complex64::from((k * x).sin())).collect();
        let phases = t.phases(|q| q * q, 0.3);
        t.apply(&mut line, &phases);
        let expect = Complex64::from_polar(1.0, -k * k * 0.3);
        for (v, &x) in line.iter().zip(&xs) {
            assert!((v - expect * (k * x).sin()).norm() < 1e-12);
        }
    }

    #[test]
    fn periodic_plane_wave() {
        let grid = GridSpec::new(-2.0, 2.0, 64, 0.01).with_boundary(Boundary::Periodic);
        let mut t = LineTransform::new(&grid);
        let k = 2.0 * PI * 3.0 / grid.length();
        let xs = grid.positions();
        let mut line: Vec<Complex64> = xs.iter().map(|&x| Complex64::from_polar(1.0, k * x)).collect();
        let phases = t.phases(|q| q * q - 1.0, 0.7);
        t.apply(&mut line, &phases);
        for (v, &x) in line.iter().zip(&xs) {
            let expect = Complex64::from_polar(1.0, k * x - (k * k - 1.0) * 0.7);
            assert!((v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary() {
        let grid = GridSpec::new(0.0, 3.0, 40, 0.01);
        let mut t = LineTransform::new(&grid);
        let mut line: Vec<Complex64> = (0..40).map(|j| Complex64::new((j as f64).sin(), (j * j) as f64 % 3.0)).collect();
        let before: f64 = line.iter().map(|z| z.norm_sqr()).sum();
        let phases = t.phases(|q| q * q, 1.234);
        t.apply(&mut line, &phases);
        let after: f64 = line.iter().map(|z| z.norm_sqr()).sum();
        assert!((before - after).abs() < 1e-12 * before);
    }
}
