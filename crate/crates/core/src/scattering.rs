//! Stationary two-channel scattering off the coupled slab.
//!
//! At detuning `d` the mode functions `u` (coefficient in the `+1` field)
//! and `w` (coefficient in the conjugated `−1` field) obey, in reduced units,
//!
//! ```text
//! -u'' = (M + d) u − c(ξ) w
//! -w'' = (M − d) w − c(ξ) u
//! ```
//!
//! with `c = 1` inside `0 ≤ ξ ≤ A`, zero outside, and a hard wall
//! `u(0) = w(0) = 0`. Outside the slab
//! `u = a e^{−i q₊ ξ} + b e^{i q₊ ξ}` and `w = c e^{i q₋ ξ} + e e^{−i q₋ ξ}`
//! (incoming and outgoing roles swap for the conjugated field). Matching
//! values and derivatives at `ξ = A` gives a 4×4 linear system per
//! incoming channel. Amplitudes are flux normalised by `sqrt(q)`, which
//! makes the 2×2 scattering matrix pseudo-unitary for the metric
//! `diag(1, −1)`.

use nalgebra::{Matrix4, Matrix4x2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DimensionlessParams, ModelError};
use crate::squeezing::SqueezingValue;

/// Target accuracy of the Bogoliubov identities for well-conditioned input.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Systems with a 1-norm condition estimate above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("exterior channel closed: M − |d| = {gap} ≤ 0 (no outgoing flux)")]
    ClosedExteriorChannel { gap: f64 },
    #[error("matching system is ill-conditioned (condition estimate {condition:e}); likely at a threshold")]
    IllConditioned { condition: f64 },
    #[error("channel ratios disagree: |β₊/α₊| = {plus}, |β₋/α₋| = {minus}")]
    InconsistentChannels { plus: f64, minus: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One eigenpair of the interior coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorMode {
    /// Eigenvalue `q²` of `[[M + d, −c], [−c, M − d]]`.
    pub eigenvalue: f64,
    /// `sqrt(eigenvalue)`, on the positive imaginary axis when negative.
    /// The mode also propagates with `−wavevector`.
    pub wavevector: Complex64,
    /// Unit eigenvector `(u, w)`.
    pub eigenvector: [f64; 2],
}

impl InteriorMode {
    pub fn is_evanescent(&self) -> bool {
        self.eigenvalue < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorModes {
    /// Mode with eigenvalue `M + sqrt(d² + c²)`.
    pub upper: InteriorMode,
    /// Mode with eigenvalue `M − sqrt(d² + c²)`.
    pub lower: InteriorMode,
    /// Exterior wavenumbers `sqrt(M + d)` and `sqrt(M − d)`.
    pub exterior_plus: Complex64,
    pub exterior_minus: Complex64,
    pub plus_channel_open: bool,
    pub minus_channel_open: bool,
}

fn sqrt_signed(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

/// Interior modes for unit coupling.
pub fn interior_modes(params: &DimensionlessParams) -> Result<InteriorModes, ScatteringError> {
    interior_modes_scaled(params, 1.0)
}

/// Interior modes with the coupling scaled by `coupling` (0 decouples the
/// channels).
pub fn interior_modes_scaled(params: &DimensionlessParams, coupling: f64) -> Result<InteriorModes, ScatteringError> {
    params.validate()?;
    let (m, d) = (params.big_m, params.d);
    let s = d.hypot(coupling);
    // Jacobi rotation diagonalising [[m + d, -c], [-c, m - d]].
    let angle = 0.5 * (-2.0 * coupling).atan2(2.0 * d);
    let (sn, cs) = angle.sin_cos();
    let first = [cs, sn];
    let second = [-sn, cs];
    let rayleigh = |v: [f64; 2]| (m + d) * v[0] * v[0] - 2.0 * coupling * v[0] * v[1] + (m - d) * v[1] * v[1];
    let (up_vec, low_vec) = if rayleigh(first) >= rayleigh(second) {
        (first, second)
    } else {
        (second, first)
    };
    let mode = |eigenvalue: f64, eigenvector: [f64; 2]| InteriorMode {
        eigenvalue,
        wavevector: sqrt_signed(eigenvalue),
        eigenvector,
    };
    Ok(InteriorModes {
        upper: mode(m + s, up_vec),
        lower: mode(m - s, low_vec),
        exterior_plus: sqrt_signed(m + d),
        exterior_minus: sqrt_signed(m - d),
        plus_channel_open: m + d > 0.0,
        minus_channel_open: m - d > 0.0,
    })
}

/// Value and derivative at `x` of the wall-satisfying interior solution
/// with eigenvalue `lambda`, scaled to stay O(1) at `x = len`.
fn wall_solution(lambda: f64, x: f64, len: f64) -> (f64, f64) {
    if lambda > 0.0 {
        let p = lambda.sqrt();
        ((p * x).sin(), p * (p * x).cos())
    } else if lambda < 0.0 {
        let p = (-lambda).sqrt();
        let scale = (p * len).cosh();
        ((p * x).sinh() / scale, p * (p * x).cosh() / scale)
    } else {
        (x, 1.0)
    }
}

/// The Bogoliubov coefficients `B±(mu ± Δ) = α± A±(mu ± Δ) + β± A∓†(mu ∓ Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovCoefficients {
    pub alpha_p: Complex64,
    pub beta_p: Complex64,
    pub alpha_m: Complex64,
    pub beta_m: Complex64,
    pub d: f64,
    pub big_m: f64,
    pub kappa: f64,
}

/// Deviations from the identities that preserve the commutators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantResiduals {
    /// `||α₊|² − |β₊|² − 1|`
    pub plus_norm: f64,
    /// `||α₋|² − |β₋|² − 1|`
    pub minus_norm: f64,
    /// `|α₊β₋ − α₋β₊|`
    pub cross: f64,
    /// `||β₊/α₊| − |β₋/α₋||`
    pub ratio: f64,
}

impl InvariantResiduals {
    pub fn max(&self) -> f64 {
        self.plus_norm.max(self.minus_norm).max(self.cross).max(self.ratio)
    }
}

impl BogoliubovCoefficients {
    pub fn residuals(&self) -> InvariantResiduals {
        InvariantResiduals {
            plus_norm: (self.alpha_p.norm_sqr() - self.beta_p.norm_sqr() - 1.0).abs(),
            minus_norm: (self.alpha_m.norm_sqr() - self.beta_m.norm_sqr() - 1.0).abs(),
            cross: (self.alpha_p * self.beta_m - self.alpha_m * self.beta_p).norm(),
            ratio: (self.plus_ratio() - self.minus_ratio()).abs(),
        }
    }

    pub fn plus_ratio(&self) -> f64 {
        self.beta_p.norm() / self.alpha_p.norm()
    }

    pub fn minus_ratio(&self) -> f64 {
        self.beta_m.norm() / self.alpha_m.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSolution {
    pub coefficients: BogoliubovCoefficients,
    /// 1-norm condition estimate of the matching system.
    pub condition: f64,
}

/// Solves the matching problem for unit coupling.
pub fn solve_scattering(params: &DimensionlessParams) -> Result<ScatteringSolution, ScatteringError> {
    solve_scattering_scaled(params, 1.0)
}

/// Solves the matching problem with the interior coupling scaled by
/// `coupling`.
pub fn solve_scattering_scaled(params: &DimensionlessParams, coupling: f64) -> Result<ScatteringSolution, ScatteringError> {
    let modes = interior_modes_scaled(params, coupling)?;
    let gap = params.big_m - params.d.abs();
    if gap <= 0.0 {
        return Err(ScatteringError::ClosedExteriorChannel { gap });
    }
    let len = params.region_length();
    let qp = modes.exterior_plus.re;
    let qm = modes.exterior_minus.re;
    let i = Complex64::i();

    // Unknowns: interior amplitudes of the upper and lower modes, outgoing
    // u amplitude, outgoing w amplitude. Derivative rows are divided by the
    // channel wavenumber to balance the system.
    let mut system = Matrix4::<Complex64>::zeros();
    for (col, mode) in [modes.upper, modes.lower].iter().enumerate() {
        let (val, der) = wall_solution(mode.eigenvalue, len, len);
        let [vu, vw] = mode.eigenvector;
        system[(0, col)] = Complex64::from(vu * val);
        system[(1, col)] = Complex64::from(vu * der / qp);
        system[(2, col)] = Complex64::from(vw * val);
        system[(3, col)] = Complex64::from(vw * der / qm);
    }
    let out_p = (i * qp * len).exp();
    let out_m = (-i * qm * len).exp();
    system[(0, 2)] = -out_p;
    system[(1, 2)] = -i * out_p;
    system[(2, 3)] = -out_m;
    system[(3, 3)] = i * out_m;

    // Column 0: unit incoming u wave; column 1: unit incoming w wave.
    let in_p = (-i * qp * len).exp();
    let in_m = (i * qm * len).exp();
    let mut rhs = Matrix4x2::<Complex64>::zeros();
    rhs[(0, 0)] = in_p;
    rhs[(1, 0)] = -i * in_p;
    rhs[(2, 1)] = in_m;
    rhs[(3, 1)] = i * in_m;

    let lu = system.lu();
    let inverse = lu
        .try_inverse()
        .ok_or(ScatteringError::IllConditioned { condition: f64::INFINITY })?;
    let condition = one_norm(&system) * one_norm(&inverse);
    if !(condition <= MAX_CONDITION) {
        return Err(ScatteringError::IllConditioned { condition });
    }
    let x = inverse * rhs;

    let flux = (qm / qp).sqrt();
    let s11 = x[(2, 0)];
    let s21 = x[(3, 0)] * flux;
    let s12 = x[(2, 1)] / flux;
    let s22 = x[(3, 1)];
    Ok(ScatteringSolution {
        coefficients: BogoliubovCoefficients {
            alpha_p: s11,
            beta_p: s12,
            alpha_m: s22.conj(),
            beta_m: s21.conj(),
            d: params.d,
            big_m: params.big_m,
            kappa: params.kappa,
        },
        condition,
    })
}

fn one_norm(m: &Matrix4<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `tanh r = |β₊|/|α₊| = |β₋|/|α₋|`, averaging the two channel ratios.
pub fn r_from_coefficients(c: &BogoliubovCoefficients) -> Result<SqueezingValue, ScatteringError> {
    let plus = c.plus_ratio();
    let minus = c.minus_ratio();
    if !((plus - minus).abs() <= 10.0 * SOLVER_TOLERANCE) {
        return Err(ScatteringError::InconsistentChannels { plus, minus });
    }
    if plus >= 1.0 || minus >= 1.0 {
        return Ok(SqueezingValue::from_argument(plus.max(minus), 0.0));
    }
    Ok(SqueezingValue::from_ratio(0.5 * (plus + minus)))
}

/// Squeezing from the numerical scattering solution.
pub fn r_scattering(params: &DimensionlessParams) -> Result<SqueezingValue, ScatteringError> {
    r_from_coefficients(&solve_scattering(params)?.coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::squeezing::r_analytic;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dp(d: f64, big_m: f64, kappa: f64) -> DimensionlessParams {
        DimensionlessParams::new(d, big_m, kappa).unwrap()
    }

    #[test]
    fn interior_modes_at_zero_detuning() {
        let m = interior_modes(&dp(0.0, 100.0, 1.0)).unwrap();
        assert_relative_eq!(m.upper.eigenvalue, 101.0);
        assert_relative_eq!(m.lower.eigenvalue, 99.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // up to overall sign: (1, -1)/sqrt(2) and (1, 1)/sqrt(2)
        let up = m.upper.eigenvector;
        assert_relative_eq!(up[0] * up[1], -0.5, epsilon = 1e-15);
        assert_relative_eq!(up[0].abs(), h, epsilon = 1e-15);
        let low = m.lower.eigenvector;
        assert_relative_eq!(low[0] * low[1], 0.5, epsilon = 1e-15);
        assert!(m.plus_channel_open && m.minus_channel_open);
    }

    #[test]
    fn interior_modes_match_characteristic_polynomial() {
        for &(d, big_m) in &[(0.3, 50.0), (-2.0, 10.0), (7.0, 5.0), (1e-8, 1.0)] {
            let m = interior_modes(&dp(d, big_m, 1.0)).unwrap();
            // roots of (M + d − λ)(M − d − λ) − 1
            let s = (1.0f64 + d * d).sqrt();
            for (mode, lambda) in [(m.upper, big_m + s), (m.lower, big_m - s)] {
                assert_relative_eq!(mode.eigenvalue, lambda, max_relative = 1e-14);
                let [u, w] = mode.eigenvector;
                assert_relative_eq!(u * u + w * w, 1.0, epsilon = 1e-14);
                assert!(((big_m + d) * u - w - lambda * u).abs() < 1e-12 * big_m.max(1.0));
                assert!((-u + (big_m - d) * w - lambda * w).abs() < 1e-12 * big_m.max(1.0));
            }
        }
    }

    #[test]
    fn evanescent_interior_mode() {
        let m = interior_modes(&dp(3.0, 2.0, 1.0)).unwrap();
        assert!(m.lower.is_evanescent());
        assert!(m.lower.wavevector.im > 0.0 && m.lower.wavevector.re == 0.0);
        assert!(!m.minus_channel_open);
    }

    #[test]
    fn decoupled_channels_reflect_elastically() {
        let sol = solve_scattering_scaled(&dp(0.4, 30.0, 1.1), 0.0).unwrap();
        let c = sol.coefficients;
        // Exterior waves are referenced to the wall at ξ = 0, so the hard-wall
        // reflection phase is −1.
        assert_relative_eq!(c.alpha_p.re, -1.0, epsilon = 1e-12);
        assert!(c.alpha_p.im.abs() < 1e-12);
        assert_relative_eq!(c.alpha_m.re, -1.0, epsilon = 1e-12);
        assert!(c.beta_p.norm() < 1e-14 && c.beta_m.norm() < 1e-14);
    }

    #[test]
    fn zero_length_region_has_no_pair_creation() {
        let c = solve_scattering(&dp(0.5, 40.0, 0.0)).unwrap().coefficients;
        assert!(c.beta_p.norm() < 1e-14);
        assert!(c.beta_m.norm() < 1e-14);
    }

    #[test]
    fn agrees_with_closed_form_at_large_mu() {
        let params = dp(0.0, 100.0, 1.0);
        let c = solve_scattering(&params).unwrap().coefficients;
        let r = r_from_coefficients(&c).unwrap().r;
        assert!((r - 1.2246).abs() < 1e-2);
        assert!((r - r_analytic(&params).unwrap().r).abs() < 1e-2);
    }

    #[test]
    fn closed_exterior_channel_is_rejected() {
        assert!(matches!(
            solve_scattering(&dp(5.0, 4.0, 1.0)),
            Err(ScatteringError::ClosedExteriorChannel { .. })
        ));
    }

    #[test]
    fn near_threshold_is_flagged() {
        // bisect the finite-M threshold phase and step onto it
        let mut lo = 1.5;
        let mut hi = 1.65;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let phase = crate::squeezing::wavenumber_phase(&dp(0.0, 100.0, mid)).unwrap();
            if phase < std::f64::consts::FRAC_PI_2 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let near = solve_scattering(&dp(0.0, 100.0, lo));
        match near {
            Err(ScatteringError::IllConditioned { .. }) => {}
            Ok(sol) => assert!(r_from_coefficients(&sol.coefficients).unwrap().r > 3.0),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn ratio_inversion() {
        let base = BogoliubovCoefficients {
            alpha_p: Complex64::new(1.0, 0.0),
            beta_p: Complex64::new(0.0, 0.0),
            alpha_m: Complex64::new(1.0, 0.0),
            beta_m: Complex64::new(0.0, 0.0),
            d: 0.0,
            big_m: 1.0,
            kappa: 0.0,
        };
        assert_eq!(r_from_coefficients(&base).unwrap().r, 0.0);
        let t = 2.0f64.tanh();
        let c = BogoliubovCoefficients {
            beta_p: Complex64::new(0.0, t),
            beta_m: Complex64::new(t, 0.0),
            ..base
        };
        assert_relative_eq!(r_from_coefficients(&c).unwrap().r, 2.0, epsilon = 1e-12);
        let bad = BogoliubovCoefficients {
            beta_m: Complex64::new(0.5, 0.0),
            ..c
        };
        assert!(matches!(
            r_from_coefficients(&bad),
            Err(ScatteringError::InconsistentChannels { .. })
        ));
    }

    proptest! {
        #[test]
        fn bogoliubov_identities_hold(d in -3.0f64..3.0, big_m in 10.0f64..200.0, kappa in 0.0f64..1.3) {
            let c = solve_scattering(&dp(d, big_m, kappa)).unwrap().coefficients;
            let res = c.residuals();
            prop_assert!(res.max() < SOLVER_TOLERANCE, "{res:?}");
        }

        #[test]
        fn detuning_symmetry(d in 0.0f64..3.0, kappa in 0.0f64..1.3) {
            let a = r_scattering(&dp(d, 60.0, kappa)).unwrap().r;
            let b = r_scattering(&dp(-d, 60.0, kappa)).unwrap().r;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
