//! Squeezing spectra, scattering coefficients, beam dynamics and pair
//! entanglement for atom pairs produced by spin-exchange collisions.

pub mod analysis;
pub mod dynamics;
pub mod model;
pub mod pairs;
pub mod scattering;
pub mod squeezing;

pub use analysis::{AnalysisError, Method, SpectrumGrid, ThresholdReport};
pub use dynamics::{CouplingRamp, DynamicsError, GridSpec, ModeState};
pub use model::{DimensionlessParams, ModelError, PhysicalParams, ValidityReport, ValidityThresholds};
pub use pairs::{PairAmplitude, PairError, ProjectedPairState, QuadrantDecomposition};
pub use scattering::{BogoliubovCoefficients, InteriorModes, ScatteringError};
pub use squeezing::{SqueezingError, SqueezingSpectrum, SqueezingValue};
