//! Fixed problem sizes shared by the benchmarks.

use num_complex::Complex64;
use spinbeam_core::dynamics::{BeamModel, Channel, CouplingRamp, GridSpec, ModeLabel, ModeState};
use spinbeam_core::pairs::PairRunConfig;

/// Slab of `M = 100`, `kappa = 1` in a 1023-point Dirichlet box.
pub fn propagation_case() -> (BeamModel, GridSpec, ModeState) {
    let big_m: f64 = 100.0;
    let slab = big_m.sqrt();
    let grid = GridSpec::new(0.0, 70.0, 1023, 0.01);
    let model = BeamModel::free(big_m, grid.n_points, CouplingRamp::constant(1.0, (0.0, slab)));
    let label = ModeLabel {
        channel: Channel::Plus,
        d: 0.0,
    };
    let q = big_m.sqrt();
    let state = ModeState::from_fn(&grid, label, |x| {
        let env = (-(x - 35.0).powi(2) / 8.0).exp();
        (Complex64::from_polar(env, -q * x), Complex64::default())
    });
    (model, grid, state)
}

/// Symmetric pair run on a 256² grid.
pub fn small_pair_case() -> PairRunConfig {
    PairRunConfig {
        big_m: 4.0,
        length: 32.0,
        n_points: 256,
        t0: 2.5,
        ..PairRunConfig::default()
    }
}
