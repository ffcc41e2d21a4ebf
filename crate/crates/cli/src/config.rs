//! TOML run configuration.
//!
//! A config file holds exactly one of `[dimensionless]` or `[physical]`,
//! plus optional `[grid]`, `[threshold]`, `[compare]`, `[dynamics]`,
//! `[pairs]` and `[output]` tables. Unknown keys are rejected. Without a
//! config file the defaults below apply (`M = 100`, `kappa = 1`, `d = 0`).

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spinbeam_core::dynamics::SteadyOutputConfig;
use spinbeam_core::model::{to_dimensionless, validity, SODIUM_MASS};
use spinbeam_core::pairs::PairRunConfig;
use spinbeam_core::{DimensionlessParams, Method, ModelError, PhysicalParams, ValidityReport, ValidityThresholds};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("parameter block: {0}")]
    Block(String),
    #[error("field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("--grid {arg}: {reason}")]
    Override { arg: String, reason: String },
    #[error("config sets mode `{config}` but the `{command}` command was run")]
    ModeMismatch { config: Mode, command: Mode },
    #[error("cannot serialize config: {0}")]
    Serialize(String),
    #[error("physical block: {0}")]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Spectrum,
    Threshold,
    Compare,
    Dynamics,
    Pairs,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Spectrum => "spectrum",
            Self::Threshold => "threshold",
            Self::Compare => "compare",
            Self::Dynamics => "dynamics",
            Self::Pairs => "pairs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Analytic,
    #[value(name = "large_mu")]
    LargeMu,
    Scattering,
    /// Analytic and scattering side by side.
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<Method> {
        match self {
            Self::Analytic => vec![Method::Analytic],
            Self::LargeMu => vec![Method::LargeMu],
            Self::Scattering => vec![Method::Scattering],
            Self::Both => vec![Method::Analytic, Method::Scattering],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessBlock {
    /// `mu / g0`.
    pub big_m: f64,
    /// `g0 t̄`.
    pub kappa: f64,
    /// Detuning `Delta / g0`.
    #[serde(default)]
    pub d: f64,
}

impl Default for DimensionlessBlock {
    fn default() -> Self {
        Self {
            big_m: 100.0,
            kappa: 1.0,
            d: 0.0,
        }
    }
}

/// SI inputs; rates in rad/s. Give either `velocity` (m/s) or `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalBlock {
    pub g0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Region length, m.
    pub a: f64,
    #[serde(default = "sodium")]
    pub mass: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "one")]
    pub n0: f64,
    /// Detuning, rad/s.
    #[serde(default)]
    pub delta: f64,
}

fn sodium() -> f64 {
    SODIUM_MASS
}

fn one() -> f64 {
    1.0
}

impl PhysicalBlock {
    pub fn params(&self) -> Result<PhysicalParams, ConfigError> {
        match (self.velocity, self.mu) {
            (Some(v), None) => Ok(PhysicalParams::from_velocity(self.g0, v, self.a, self.mass, self.gamma, self.n0)?),
            (None, Some(mu)) => Ok(PhysicalParams::new(self.g0, mu, self.a, self.mass, self.gamma, self.n0)?),
            (Some(_), Some(_)) => Err(ConfigError::Block(
                "[physical] sets both `velocity` and `mu`; keep one".into(),
            )),
            (None, None) => Err(ConfigError::Block("[physical] needs `velocity` or `mu`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    pub d_min: f64,
    pub d_max: f64,
    pub d_points: usize,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_points: usize,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self {
            d_min: 0.0,
            d_max: 3.0,
            d_points: 41,
            kappa_min: 0.0,
            kappa_max: 1.45,
            kappa_points: 30,
        }
    }
}

pub const GRID_KEYS: [&str; 6] = ["d_min", "d_max", "d_points", "kappa_min", "kappa_max", "kappa_points"];

impl GridBlock {
    pub fn d_values(&self) -> Vec<f64> {
        spinbeam_core::analysis::linspace(self.d_min, self.d_max, self.d_points)
    }

    pub fn kappa_values(&self) -> Vec<f64> {
        spinbeam_core::analysis::linspace(self.kappa_min, self.kappa_max, self.kappa_points)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let field = |f: &str, reason: &str| ConfigError::Field {
            field: format!("grid.{f}"),
            reason: reason.to_string(),
        };
        for (name, min, max, n) in [
            ("d", self.d_min, self.d_max, self.d_points),
            ("kappa", self.kappa_min, self.kappa_max, self.kappa_points),
        ] {
            if n == 0 {
                return Err(field(&format!("{name}_points"), "grid is empty; need at least one point"));
            }
            if !(min.is_finite() && max.is_finite()) {
                return Err(field(&format!("{name}_min"), "bounds must be finite"));
            }
            if max < min {
                return Err(field(&format!("{name}_max"), &format!("{max} is below {name}_min = {min}")));
            }
            if n > 1 && max == min {
                return Err(field(&format!("{name}_max"), "several points need a non-empty range"));
            }
        }
        if self.kappa_min < 0.0 {
            return Err(field("kappa_min", "kappa must be >= 0"));
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, arg: &str) -> Result<(), ConfigError> {
        let err = |reason: String| ConfigError::Override {
            arg: arg.to_string(),
            reason,
        };
        let (key, value) = arg
            .split_once('=')
            .ok_or_else(|| err("expected key=value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let float = || value.parse::<f64>().map_err(|e| err(format!("{value:?} is not a number: {e}")));
        let count = || value.parse::<usize>().map_err(|e| err(format!("{value:?} is not a count: {e}")));
        match key {
            "d_min" => self.d_min = float()?,
            "d_max" => self.d_max = float()?,
            "d_points" => self.d_points = count()?,
            "kappa_min" => self.kappa_min = float()?,
            "kappa_max" => self.kappa_max = float()?,
            "kappa_points" => self.kappa_points = count()?,
            other => return Err(err(format!("unknown key `{other}`; expected one of {}", GRID_KEYS.join(", ")))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdBlock {
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// Width of the final bisection bracket.
    pub tolerance: f64,
}

impl Default for ThresholdBlock {
    fn default() -> Self {
        Self {
            kappa_min: 0.0,
            kappa_max: 2.0,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareBlock {
    /// Largest admissible `max |r_scattering - r_analytic|`.
    pub tolerance: f64,
    /// `M` values of the dependence table.
    pub m_table: Vec<f64>,
}

impl Default for CompareBlock {
    fn default() -> Self {
        Self {
            tolerance: 0.01,
            m_table: vec![10.0, 30.0, 100.0, 300.0],
        }
    }
}

/// Numerical settings of the time-domain run; the physics comes from the
/// parameter block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsBlock {
    /// Ramp rates in units of `g0`, run in order.
    pub gammas: Vec<f64>,
    pub peak_delay: f64,
    pub length: f64,
    pub n_points: usize,
    pub dt: f64,
    pub probe_offset: f64,
    pub probe_width: f64,
    pub absorber_width: f64,
    pub absorber_strength: f64,
    pub sample_span: f64,
    pub samples: usize,
    /// Relative `|beta|^2` error allowed at the slowest rate.
    pub tolerance: f64,
}

impl Default for DynamicsBlock {
    fn default() -> Self {
        let s = SteadyOutputConfig::default();
        Self {
            gammas: vec![0.3, 0.1, 0.03, 0.01],
            peak_delay: s.peak_delay,
            length: s.length,
            n_points: s.n_points,
            dt: s.dt,
            probe_offset: s.probe_offset,
            probe_width: s.probe_width,
            absorber_width: s.absorber_width,
            absorber_strength: s.absorber_strength,
            sample_span: s.sample_span,
            samples: s.samples,
            tolerance: 0.05,
        }
    }
}

impl DynamicsBlock {
    pub fn steady_config(&self, p: &DimensionlessParams) -> SteadyOutputConfig {
        SteadyOutputConfig {
            big_m: p.big_m,
            kappa: p.kappa,
            d: p.d,
            gamma: self.gammas.first().copied().unwrap_or(0.01),
            peak_delay: self.peak_delay,
            length: self.length,
            n_points: self.n_points,
            dt: self.dt,
            probe_offset: self.probe_offset,
            probe_width: self.probe_width,
            absorber_width: self.absorber_width,
            absorber_strength: self.absorber_strength,
            sample_span: self.sample_span,
            samples: self.samples,
        }
    }
}

/// Pair runs use their own weak-coupling model, so `big_m` lives here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairsBlock {
    /// Left-step heights `delta V` on the `+1` potential, one run each.
    pub asymmetries: Vec<f64>,
    /// Every `density_stride`-th grid point is written to the density file.
    pub density_stride: usize,
    pub big_m: f64,
    pub half_width: f64,
    pub length: f64,
    pub n_points: usize,
    pub dt: f64,
    pub g_peak: f64,
    pub gamma: f64,
    pub pulse_on: f64,
    pub pulse_off: f64,
    pub t0: f64,
}

impl Default for PairsBlock {
    fn default() -> Self {
        let p = PairRunConfig::default();
        Self {
            asymmetries: vec![0.0],
            density_stride: 4,
            big_m: p.big_m,
            half_width: p.half_width,
            length: p.length,
            n_points: p.n_points,
            dt: p.dt,
            g_peak: p.g_peak,
            gamma: p.gamma,
            pulse_on: p.pulse_on,
            pulse_off: p.pulse_off,
            t0: p.t0,
        }
    }
}

impl PairsBlock {
    pub fn run_config(&self, asymmetry: f64) -> PairRunConfig {
        PairRunConfig {
            big_m: self.big_m,
            half_width: self.half_width,
            length: self.length,
            n_points: self.n_points,
            dt: self.dt,
            g_peak: self.g_peak,
            gamma: self.gamma,
            pulse_on: self.pulse_on,
            pulse_off: self.pulse_off,
            t0: self.t0,
            asymmetry,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

pub const DEFAULT_OUT_DIR: &str = "spinbeam-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensionless: Option<DimensionlessBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalBlock>,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub threshold: ThresholdBlock,
    #[serde(default)]
    pub compare: CompareBlock,
    #[serde(default)]
    pub dynamics: DynamicsBlock,
    #[serde(default)]
    pub pairs: PairsBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            method: MethodChoice::default(),
            dimensionless: Some(DimensionlessBlock::default()),
            physical: None,
            grid: GridBlock::default(),
            threshold: ThresholdBlock::default(),
            compare: CompareBlock::default(),
            dynamics: DynamicsBlock::default(),
            pairs: PairsBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

/// Parameters after resolving the block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub reduced: DimensionlessParams,
    pub physical: Option<PhysicalParams>,
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Serialize(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match (&self.dimensionless, &self.physical) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::Block(
                    "both [dimensionless] and [physical] are present; keep exactly one".into(),
                ))
            }
            (None, None) => {
                return Err(ConfigError::Block(
                    "no parameter block; add [dimensionless] (big_m, kappa, d) or [physical] (g0, velocity or mu, a)".into(),
                ))
            }
            _ => {}
        }
        self.resolve()?;
        self.grid.validate()?;
        let t = &self.threshold;
        if !(t.tolerance > 0.0) {
            return Err(field("threshold.tolerance", "must be > 0"));
        }
        if !(t.kappa_min >= 0.0 && t.kappa_max > t.kappa_min && t.kappa_max.is_finite()) {
            return Err(field("threshold.kappa_max", "need 0 <= kappa_min < kappa_max"));
        }
        if !(self.compare.tolerance >= 0.0) {
            return Err(field("compare.tolerance", "must be >= 0"));
        }
        if self.compare.m_table.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(field("compare.m_table", "entries must be positive"));
        }
        if self.dynamics.gammas.is_empty() {
            return Err(field("dynamics.gammas", "need at least one rate"));
        }
        if self.dynamics.gammas.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(field("dynamics.gammas", "rates must be positive"));
        }
        if self.pairs.asymmetries.is_empty() {
            return Err(field("pairs.asymmetries", "need at least one entry (0 for the symmetric run)"));
        }
        if self.pairs.density_stride == 0 {
            return Err(field("pairs.density_stride", "must be >= 1"));
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        if let Some(p) = &self.physical {
            let physical = p.params()?;
            let reduced = to_dimensionless(&physical, p.delta)?;
            return Ok(Resolved {
                reduced,
                physical: Some(physical),
            });
        }
        let b = self
            .dimensionless
            .as_ref()
            .ok_or_else(|| ConfigError::Block("no parameter block".into()))?;
        let reduced = DimensionlessParams::new(b.d, b.big_m, b.kappa)?;
        Ok(Resolved {
            reduced,
            physical: None,
        })
    }

    /// Rejects a `mode` key that disagrees with the command.
    pub fn check_mode(&self, command: Mode) -> Result<(), ConfigError> {
        match self.mode {
            Some(m) if m != command => Err(ConfigError::ModeMismatch { config: m, command }),
            _ => Ok(()),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

fn field(field: &str, reason: &str) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Validity of the reduced parameters; with physical inputs the full
/// `≫`-relation report is included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validity {
    pub kappa: f64,
    pub below_threshold: bool,
    pub threshold_distance: f64,
    pub channels_open: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical: Option<ValidityReport>,
}

pub fn validity_of(resolved: &Resolved, d_grid: &[f64]) -> Result<Validity, ConfigError> {
    let p = resolved.reduced;
    let physical = match &resolved.physical {
        Some(ph) => Some(validity(ph, d_grid, &ValidityThresholds::default())?),
        None => None,
    };
    Ok(Validity {
        kappa: p.kappa,
        below_threshold: p.kappa < std::f64::consts::FRAC_PI_2,
        threshold_distance: spinbeam_core::model::threshold_distance(p.kappa),
        channels_open: d_grid.iter().all(|&d| p.big_m > d.hypot(1.0)),
        physical,
    })
}
