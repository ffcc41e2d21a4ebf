//! Weak-coupling pair amplitude and the entanglement of the post-selected
//! internal state.

pub mod amplitude;
pub mod metrics;
pub mod quadrant;
pub mod run;

use thiserror::Error;

pub use amplitude::{pair_amplitude, PairAmplitude, PairModel};
pub use metrics::{bell_metrics, bell_metrics_of, internal_reduced_state, BellMetrics, InternalState};
pub use quadrant::{post_select, quadrant_decompose, ProjectedPairState, QuadrantDecomposition};
pub use run::{run_pairs, PairRunConfig, PairRunSummary};

use crate::dynamics::DynamicsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairError {
    #[error("grid does not resolve the pair dynamics: {reason}")]
    Resolution { reason: String },
    #[error("invalid pair setup: {reason}")]
    Setup { reason: String },
    #[error("created norm² {norm_sq:.4e} exceeds {limit}; first order no longer applies")]
    PerturbationInvalid { norm_sq: f64, limit: f64 },
    #[error("no weight with one atom on each side")]
    EmptyPostSelection,
}

impl From<DynamicsError> for PairError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Resolution { reason } => PairError::Resolution { reason },
            other => PairError::Setup { reason: other.to_string() },
        }
    }
}
