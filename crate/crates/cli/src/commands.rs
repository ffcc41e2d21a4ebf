//! The five run modes. Each writes its data files into an [`OutputDir`];
//! [`execute`] adds the resolved config and the run record.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io;

use chrono::Utc;
use serde::Serialize;
use spinbeam_core::analysis::{compare_methods, find_thresholds, flux_estimate, spectrum_grid, CompareRow, FLUX_DEFINITION};
use spinbeam_core::dynamics::{steady_output_sweep, SteadyOutputConfig, SteadyOutputResult};
use spinbeam_core::pairs::{run_pairs, PairRunSummary};
use spinbeam_core::squeezing::{squeezing_spectrum, AnalyticModel};
use spinbeam_core::{AnalysisError, DynamicsError, PairError, ThresholdReport};
use thiserror::Error;

use crate::config::{validity_of, ConfigError, MethodChoice, Mode, Resolved, RunConfig};
use crate::record::{sha256_hex, timestamp, OutputDir, RunRecord, RECORD_FILE};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("output: {0}")]
    Io(#[from] io::Error),
    #[error("solver: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("time-domain solver: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("pair solver: {0}")]
    Pairs(#[from] PairError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Analysis(AnalysisError::EmptyGrid { .. } | AnalysisError::InvalidRange { .. }) => 1,
            Self::Analysis(_) | Self::Dynamics(_) | Self::Pairs(_) => 2,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub out_dir: std::path::PathBuf,
    /// Set when a configured tolerance is not met.
    pub tolerance_failure: Option<String>,
}

pub const CONFIG_FILE: &str = "config.toml";

pub fn execute(mode: Mode, cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.check_mode(mode)?;
    cfg.validate()?;
    let resolved = cfg.resolve()?;
    let validity = validity_of(&resolved, &cfg.grid.d_values())?;
    let started = Utc::now();
    let mut out = OutputDir::create(&cfg.out_dir())?;

    let tolerance_failure = match mode {
        Mode::Spectrum => spectrum(cfg, &resolved, &mut out)?,
        Mode::Threshold => threshold(cfg, &resolved, &mut out)?,
        Mode::Compare => compare(cfg, &resolved, &mut out)?,
        Mode::Dynamics => dynamics(cfg, &resolved, &mut out)?,
        Mode::Pairs => pairs(cfg, &mut out)?,
    };

    let hashed = RunConfig {
        mode: Some(mode),
        output: Default::default(),
        ..cfg.clone()
    }
    .to_toml()?;
    out.write(CONFIG_FILE, hashed.as_bytes())?;
    let record = RunRecord {
        tool: "spinbeam",
        version: env!("CARGO_PKG_VERSION"),
        command: mode.to_string(),
        config_sha256: sha256_hex(hashed.as_bytes()),
        started_at: timestamp(started),
        finished_at: timestamp(Utc::now()),
        files: out.files().to_vec(),
        validity,
        status: match &tolerance_failure {
            None => "ok".into(),
            Some(msg) => format!("tolerance failure: {msg}"),
        },
    };
    let root = out.root().to_path_buf();
    out.write_json(RECORD_FILE, &record)?;
    Ok(Outcome {
        out_dir: root,
        tolerance_failure,
    })
}

fn csv_header(lines: &[String]) -> String {
    lines.iter().map(|l| format!("# {l}\n")).collect()
}

fn axis(name: &str, min: f64, max: f64, n: usize) -> String {
    format!("{name}: {n} points from {min} to {max}")
}

#[derive(Serialize)]
struct RidgePoint {
    d: f64,
    kappa: f64,
    r: f64,
    /// `pi / (2 sqrt(1 + d^2))`, the first large-`M` threshold at this `d`.
    threshold_locus: f64,
}

#[derive(Serialize)]
struct MethodSummary {
    method: &'static str,
    file: String,
    points: usize,
    above_threshold_points: usize,
    max_r_below_threshold: f64,
    ridge: Vec<RidgePoint>,
}

#[derive(Serialize)]
struct FluxReport {
    definition: &'static str,
    kappa: f64,
    big_m: f64,
    model: &'static str,
    d_min: f64,
    d_max: f64,
    /// Atoms per unit `1/g0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    flux_in_g0_units: Option<f64>,
    /// Only with a physical parameter block.
    #[serde(skip_serializing_if = "Option::is_none")]
    atoms_per_second: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unavailable: Option<String>,
}

#[derive(Serialize)]
struct SpectrumSummary {
    big_m: f64,
    kappa: f64,
    d_points: usize,
    kappa_points: usize,
    methods: Vec<MethodSummary>,
    flux: FluxReport,
}

fn spectrum(cfg: &RunConfig, res: &Resolved, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    let (d_values, kappa_values) = (cfg.grid.d_values(), cfg.grid.kappa_values());
    let big_m = res.reduced.big_m;
    let methods = cfg.method.methods();
    let mut summaries = Vec::new();
    for &method in &methods {
        let grid = spectrum_grid(&d_values, &kappa_values, big_m, method)?;
        let mut text = csv_header(&[
            "spinbeam spectrum".into(),
            format!("method: {}", method.name()),
            format!("big_m: {big_m}"),
            axis("delta_over_g0", cfg.grid.d_min, cfg.grid.d_max, cfg.grid.d_points),
            axis("kappa", cfg.grid.kappa_min, cfg.grid.kappa_max, cfg.grid.kappa_points),
            "rows ordered by delta_over_g0, then kappa".into(),
            "r: squeezing parameter, inf where the arctanh argument reaches 1".into(),
            "above_threshold: kappa at or past the first threshold crossing for this delta_over_g0".into(),
        ]);
        text.push_str("delta_over_g0,kappa,r,above_threshold\n");
        for p in &grid.points {
            let _ = writeln!(text, "{},{},{},{}", p.d, p.kappa, p.value.r, p.above_threshold());
        }
        let file = if methods.len() == 1 {
            "spectrum.csv".to_string()
        } else {
            format!("spectrum_{}.csv", method.name())
        };
        out.write(&file, text.as_bytes())?;
        summaries.push(MethodSummary {
            method: method.name(),
            file,
            points: grid.points.len(),
            above_threshold_points: grid.points.iter().filter(|p| p.above_threshold()).count(),
            max_r_below_threshold: grid
                .points
                .iter()
                .filter(|p| !p.above_threshold())
                .map(|p| p.value.r)
                .fold(0.0, f64::max),
            ridge: grid
                .ridge()
                .into_iter()
                .map(|(d, kappa, r)| RidgePoint {
                    d,
                    kappa,
                    r,
                    threshold_locus: FRAC_PI_2 / d.hypot(1.0),
                })
                .collect(),
        });
    }
    let summary = SpectrumSummary {
        big_m,
        kappa: res.reduced.kappa,
        d_points: d_values.len(),
        kappa_points: kappa_values.len(),
        methods: summaries,
        flux: flux_report(cfg, res, &d_values),
    };
    out.write_json("spectrum_summary.json", &summary)?;
    Ok(None)
}

/// The flux is a diagnostic; failures are reported, not raised.
fn flux_report(cfg: &RunConfig, res: &Resolved, d_values: &[f64]) -> FluxReport {
    let model = match cfg.method {
        MethodChoice::LargeMu => AnalyticModel::LargeMu,
        _ => AnalyticModel::ExactWavenumbers,
    };
    let (big_m, kappa) = (res.reduced.big_m, res.reduced.kappa);
    let estimate = squeezing_spectrum(d_values, big_m, kappa, model)
        .map_err(AnalysisError::from)
        .and_then(|s| flux_estimate(&s, 1.0));
    let mut report = FluxReport {
        definition: FLUX_DEFINITION,
        kappa,
        big_m,
        model: match model {
            AnalyticModel::LargeMu => "large_mu",
            AnalyticModel::ExactWavenumbers => "analytic",
        },
        d_min: d_values.first().copied().unwrap_or(f64::NAN),
        d_max: d_values.last().copied().unwrap_or(f64::NAN),
        flux_in_g0_units: None,
        atoms_per_second: None,
        unavailable: None,
    };
    match estimate {
        Ok(e) => {
            report.atoms_per_second = res.physical.map(|p| e.atoms_per_second * p.g0);
            report.flux_in_g0_units = Some(e.atoms_per_second);
        }
        Err(e) => report.unavailable = Some(e.to_string()),
    }
    report
}

#[derive(Serialize)]
struct ThresholdEntry {
    model: &'static str,
    status: &'static str,
    #[serde(flatten)]
    report: ThresholdReport,
}

#[derive(Serialize)]
struct ThresholdSummary {
    d: f64,
    entries: Vec<ThresholdEntry>,
}

fn threshold(cfg: &RunConfig, res: &Resolved, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    let models: Vec<(&'static str, Option<f64>)> = match cfg.method {
        MethodChoice::Analytic => vec![("analytic", Some(res.reduced.big_m))],
        MethodChoice::LargeMu => vec![("large_mu", None)],
        MethodChoice::Both => vec![("analytic", Some(res.reduced.big_m)), ("large_mu", None)],
        MethodChoice::Scattering => {
            return Err(ConfigError::Field {
                field: "method".into(),
                reason: "the threshold search uses the closed forms; choose analytic, large_mu or both".into(),
            }
            .into())
        }
    };
    let t = &cfg.threshold;
    let d = res.reduced.d;
    let mut text = csv_header(&[
        "spinbeam threshold".into(),
        format!("d: {d}"),
        format!("kappa range: [{}, {}]", t.kappa_min, t.kappa_max),
        format!("bisection tolerance: {}", t.tolerance),
        "nominal: nearest pi/2 + n pi".into(),
    ]);
    text.push_str("model,big_m,kappa,nominal,deviation\n");
    let mut entries = Vec::new();
    for (name, big_m) in models {
        let report = find_thresholds(d, big_m, t.kappa_min, t.kappa_max, t.tolerance)?;
        for c in &report.crossings {
            let m = big_m.map_or("inf".to_string(), |m| m.to_string());
            let _ = writeln!(text, "{name},{m},{},{},{}", c.kappa, c.nominal, c.deviation);
        }
        entries.push(ThresholdEntry {
            model: name,
            status: if report.crossings.is_empty() { "none in range" } else { "found" },
            report,
        });
    }
    out.write("threshold.csv", text.as_bytes())?;
    out.write_json("threshold.json", &ThresholdSummary { d, entries })?;
    Ok(None)
}

fn compare_row_csv(rows: &[CompareRow]) -> String {
    let mut text = String::from("big_m,max_abs,mean_abs,worst_d,worst_kappa,compared,skipped\n");
    for r in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            r.big_m, r.max_abs, r.mean_abs, r.worst_d, r.worst_kappa, r.compared, r.skipped
        );
    }
    text
}

fn compare(cfg: &RunConfig, res: &Resolved, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    let (d_values, kappa_values) = (cfg.grid.d_values(), cfg.grid.kappa_values());
    let c = &cfg.compare;
    let report = compare_methods(&d_values, &kappa_values, res.reduced.big_m, &c.m_table, c.tolerance)?;
    let mut text = csv_header(&[
        "spinbeam compare: |r_scattering - r_analytic|".into(),
        axis("delta_over_g0", cfg.grid.d_min, cfg.grid.d_max, cfg.grid.d_points),
        axis("kappa", cfg.grid.kappa_min, cfg.grid.kappa_max, cfg.grid.kappa_points),
        "skipped: points at or above threshold in either method".into(),
    ]);
    text.push_str(&compare_row_csv(&report.table));
    out.write("compare_table.csv", text.as_bytes())?;
    out.write_json("compare.json", &report)?;
    Ok((!report.pass).then(|| {
        format!(
            "max |delta r| = {:.3e} at M = {} exceeds {}",
            report.primary.max_abs, report.primary.big_m, report.tolerance
        )
    }))
}

#[derive(Serialize)]
struct DynamicsComparison {
    gamma: f64,
    beta_sq: f64,
    analytic_beta_sq: f64,
    scattering_beta_sq: f64,
    error_vs_analytic: f64,
    error_vs_scattering: f64,
    tolerance: f64,
    within_tolerance: bool,
}

#[derive(Serialize)]
struct DynamicsSummary {
    config: SteadyOutputConfig,
    results: Vec<SteadyOutputResult>,
    /// At the slowest rate.
    comparison: DynamicsComparison,
    /// `|error_vs_scattering|` shrinks as `gamma` decreases.
    monotone: bool,
}

fn dynamics(cfg: &RunConfig, res: &Resolved, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    let base = cfg.dynamics.steady_config(&res.reduced);
    let results = steady_output_sweep(&base, &cfg.dynamics.gammas)?;
    let mut text = csv_header(&[
        "spinbeam dynamics: output |beta|^2 at the coupling peak".into(),
        format!("big_m: {}, kappa: {}, d: {}", base.big_m, base.kappa, base.d),
        "errors are relative".into(),
    ]);
    text.push_str("gamma,beta_sq,alpha_sq,beta_sq_std_error,scattering_beta_sq,analytic_beta_sq,error_vs_scattering,error_vs_analytic\n");
    for r in &results {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            r.gamma,
            r.beta_sq,
            r.alpha_sq,
            r.beta_sq_std_error,
            r.scattering_beta_sq,
            r.analytic_beta_sq,
            r.error_vs_scattering,
            r.error_vs_analytic
        );
    }
    out.write("dynamics.csv", text.as_bytes())?;
    let mut by_rate = results.clone();
    by_rate.sort_by(|a, b| b.gamma.total_cmp(&a.gamma));
    let monotone = by_rate
        .windows(2)
        .all(|w| w[1].error_vs_scattering.abs() < w[0].error_vs_scattering.abs());
    let slowest = by_rate.last().expect("validated non-empty");
    let tolerance = cfg.dynamics.tolerance;
    let summary = DynamicsSummary {
        config: base.clone(),
        comparison: DynamicsComparison {
            gamma: slowest.gamma,
            beta_sq: slowest.beta_sq,
            analytic_beta_sq: slowest.analytic_beta_sq,
            scattering_beta_sq: slowest.scattering_beta_sq,
            error_vs_analytic: slowest.error_vs_analytic,
            error_vs_scattering: slowest.error_vs_scattering,
            tolerance,
            within_tolerance: slowest.error_vs_analytic.abs() <= tolerance,
        },
        results,
        monotone,
    };
    out.write_json("dynamics.json", &summary)?;
    let c = &summary.comparison;
    Ok((!c.within_tolerance).then(|| {
        format!(
            "|beta|^2 error {:.2}% at gamma = {} exceeds {}%",
            100.0 * c.error_vs_analytic,
            c.gamma,
            100.0 * c.tolerance
        )
    }))
}

#[derive(Serialize)]
struct PairsSummary {
    runs: Vec<PairFileSummary>,
    /// Along increasing asymmetry, whether each figure strictly decreases.
    decreasing: Option<Decreasing>,
}

#[derive(Serialize)]
struct PairFileSummary {
    density_file: String,
    #[serde(flatten)]
    summary: PairRunSummary,
}

#[derive(Serialize)]
struct Decreasing {
    phase_optimized_fidelity: bool,
    fidelity: bool,
    entropy: bool,
    single_side_entropy: bool,
    chsh: bool,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn pairs(cfg: &RunConfig, out: &mut OutputDir) -> Result<Option<String>, CliError> {
    let p = &cfg.pairs;
    let mut runs = Vec::new();
    for (i, &dv) in p.asymmetries.iter().enumerate() {
        let (amplitude, summary) = run_pairs(&p.run_config(dv))?;
        let mut buf = csv_header(&[
            "spinbeam pair density |f(x, y)|^2".into(),
            format!("asymmetry: {dv}"),
            format!("stride: {}", p.density_stride),
            "x: position of the +1 atom, y: position of the -1 atom".into(),
        ])
        .into_bytes();
        amplitude.write_density(&mut buf, p.density_stride)?;
        let name = format!("pair_density_{i}.csv");
        out.write(&name, &buf)?;
        runs.push(PairFileSummary {
            density_file: name,
            summary,
        });
    }
    let mut text = csv_header(&["spinbeam pairs: post-selected internal state".into()]);
    text.push_str(
        "asymmetry,fidelity,phase_optimized_fidelity,chsh,entropy,single_side_entropy,concurrence,success_probability,leakage,norm_sq\n",
    );
    for r in &runs {
        let (s, m) = (&r.summary, &r.summary.metrics);
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{},{}",
            s.asymmetry,
            m.fidelity,
            m.phase_optimized_fidelity,
            m.chsh,
            m.entropy,
            m.single_side_entropy,
            m.concurrence,
            s.success_probability,
            s.leakage,
            s.norm_sq
        );
    }
    out.write("pairs.csv", text.as_bytes())?;
    let decreasing = (runs.len() > 1).then(|| {
        let mut sorted: Vec<&PairRunSummary> = runs.iter().map(|r| &r.summary).collect();
        sorted.sort_by(|a, b| a.asymmetry.total_cmp(&b.asymmetry));
        let series = |f: fn(&PairRunSummary) -> f64| strictly_decreasing(&sorted.iter().map(|s| f(s)).collect::<Vec<_>>());
        Decreasing {
            phase_optimized_fidelity: series(|s| s.metrics.phase_optimized_fidelity),
            fidelity: series(|s| s.metrics.fidelity),
            entropy: series(|s| s.metrics.entropy),
            single_side_entropy: series(|s| s.metrics.single_side_entropy),
            chsh: series(|s| s.metrics.chsh),
        }
    });
    out.write_json("pairs.json", &PairsSummary { runs, decreasing })?;
    Ok(None)
}

