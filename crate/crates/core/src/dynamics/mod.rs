//! Time-domain evolution of the mode functions on a spatial grid.

pub mod extract;
pub mod grid;
pub mod propagator;
pub mod ramp;
pub mod spectral;
pub mod state;
pub mod steady;

use thiserror::Error;

pub use extract::{extract_output_correlators, CorrelatorEstimate, OutputWindow};
pub use grid::{Absorber, Boundary, GridSpec, POINTS_PER_WAVELENGTH};
pub use propagator::{evolve, evolve_recording, BeamModel, IncidentWave, Propagator};
pub use ramp::{CouplingRamp, RampShape};
pub use state::{symplectic_norm, Channel, ModeLabel, ModeState};
pub use steady::{run_steady_output, steady_output_sweep, SteadyOutputConfig, SteadyOutputResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("grid does not resolve the dynamics: {reason}")]
    Resolution { reason: String },
    #[error("invalid setup: {reason}")]
    Setup { reason: String },
    #[error("norm {norm:.6e} at t = {t} exceeds the growth bound {bound:.6e}")]
    InstabilityDetected { t: f64, norm: f64, bound: f64 },
    #[error("window resolves {resolution:.4e} in frequency, coarser than the bin width {bin_width:.4e}")]
    WindowTooShort { resolution: f64, bin_width: f64 },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Scattering(#[from] crate::scattering::ScatteringError),
    #[error(transparent)]
    Squeezing(#[from] crate::squeezing::SqueezingError),
}
