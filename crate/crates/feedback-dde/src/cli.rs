//! Pipeline front end: JSON run configuration, the five pipeline commands,
//! and the stable exit-code contract shared with the binary.
//!
//! Exit codes: 0 success, 2 validation/configuration, 3 certificate,
//! 4 runtime (blow-up or non-convergence). Every command echoes its
//! effective configuration into the output directory, so a run can be
//! reproduced from its outputs alone.

use crate::bounds::{
    self, compute_bounds, homotopy_scan, miranda_certificate, BoundsBox, BoundsError, Certificate,
    HomotopyScan,
};
use crate::dde::{self, DdeError, HistorySegment};
use crate::model::{ModelError, ModelSpec, SamplingConfig, TestosteronePreset, ValidationReport};
use crate::periodic::{
    box_containment, find_periodic, ContainmentReport, PeriodicConfig, PeriodicError,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// Built-in model presets a config may reference instead of a full spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum PresetConfig {
    Testosterone(TestosteronePreset),
}

impl PresetConfig {
    pub fn build(&self) -> Result<ModelSpec, ModelError> {
        match self {
            PresetConfig::Testosterone(p) => p.build(),
        }
    }
}

/// Initial history choice for simulation and orbit search.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HistoryChoice {
    /// Constant history at the box center.
    #[default]
    Center,
    /// Constant history at the root of the averaged map.
    PhiRoot,
    /// Constant history at an explicit state vector.
    Constant(Vec<f64>),
}

fn default_delta() -> f64 {
    0.05
}
fn default_extremum_grid() -> usize {
    256
}
fn default_quad_nodes() -> usize {
    256
}
fn default_face_samples() -> usize {
    9
}
fn default_lambda_steps() -> usize {
    10
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_periods() -> usize {
    2000
}
fn default_lambda() -> f64 {
    1.0
}
fn default_horizon_periods() -> f64 {
    10.0
}
fn default_samples() -> usize {
    64
}
fn default_slack() -> f64 {
    1e-9
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One run configuration: the model source (exactly one of `model`,
/// `model_path`, `preset`), numeric knobs, and the output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetConfig>,
    /// Explicit box override; skips the bound recursion when present.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_override: Option<BoundsBox>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_extremum_grid")]
    pub extremum_grid: usize,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    #[serde(default = "default_face_samples")]
    pub face_samples: usize,
    #[serde(default = "default_lambda_steps")]
    pub lambda_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_periods")]
    pub max_periods: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_horizon_periods")]
    pub horizon_periods: f64,
    #[serde(default)]
    pub history: HistoryChoice,
    #[serde(default = "default_samples")]
    pub t_samples: usize,
    #[serde(default = "default_samples")]
    pub x_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("cannot parse config {}: {e}", path.display()))
    }

    /// Range checks mirroring the contracts of the modules that consume
    /// each field.
    pub fn validate_ranges(&self) -> Result<(), String> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.extremum_grid < 16 {
            return Err(format!(
                "extremum_grid must be at least 16, got {}",
                self.extremum_grid
            ));
        }
        if self.quad_nodes < 2 {
            return Err(format!("quad_nodes must be at least 2, got {}", self.quad_nodes));
        }
        if self.face_samples < 2 {
            return Err(format!(
                "face_samples must be at least 2, got {}",
                self.face_samples
            ));
        }
        if self.lambda_steps < 1 {
            return Err("lambda_steps must be at least 1".into());
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(format!("lambda must lie in (0, 1], got {}", self.lambda));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if let Some(step) = self.step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(format!("step must be positive, got {step}"));
            }
        }
        if self.max_periods == 0 {
            return Err("max_periods must be at least 1".into());
        }
        if !(self.horizon_periods >= 0.0 && self.horizon_periods.is_finite()) {
            return Err(format!(
                "horizon_periods must be finite and ≥ 0, got {}",
                self.horizon_periods
            ));
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return Err(format!("slack must be finite and ≥ 0, got {}", self.slack));
        }
        Ok(())
    }

    pub fn resolve_model(&self) -> Result<ModelSpec, String> {
        let sources =
            self.model.is_some() as u8 + self.model_path.is_some() as u8 + self.preset.is_some() as u8;
        if sources != 1 {
            return Err(format!(
                "config must name exactly one model source (model, model_path, preset); found {sources}"
            ));
        }
        let model = if let Some(model) = &self.model {
            model.clone()
        } else if let Some(path) = &self.model_path {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read model {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| format!("cannot parse model {}: {e}", path.display()))?
        } else {
            self.preset
                .as_ref()
                .expect("source counted above")
                .build()
                .map_err(|e| format!("preset: {e}"))?
        };
        model.validate().map_err(|e| e.to_string())?;
        Ok(model)
    }

    pub fn sampling(&self) -> SamplingConfig {
        SamplingConfig {
            t_samples: self.t_samples,
            x_samples: self.x_samples,
            seed: self.seed,
        }
    }

    pub fn periodic(&self) -> PeriodicConfig {
        PeriodicConfig {
            tol: self.tol,
            max_periods: self.max_periods,
            lambda: self.lambda,
            step: self.step,
            quad_nodes: self.quad_nodes,
        }
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), String> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| format!("cannot serialize {name}: {e}"))?;
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Validate ranges, create the output directory, and echo the effective
/// config into it.
fn prepare_out(config: &RunConfig) -> Result<(), String> {
    config.validate_ranges()?;
    fs::create_dir_all(&config.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", config.out_dir.display()))?;
    write_json(&config.out_dir, "config.json", config)
}

fn fail(code: i32, message: &str) -> i32 {
    eprintln!("error: {message}");
    code
}

fn box_error_code(err: &BoundsError) -> i32 {
    match err {
        BoundsError::Model(ModelError::Structure(_))
        | BoundsError::Model(ModelError::InvalidParameter { .. }) => EXIT_VALIDATION,
        _ => EXIT_CERTIFICATE,
    }
}

/// Resolve the working box: explicit override (validated) or the bound
/// recursion.
fn resolve_box(config: &RunConfig, model: &ModelSpec) -> Result<BoundsBox, (i32, String)> {
    if let Some(bbox) = &config.box_override {
        if bbox.dim() != model.dim() {
            return Err((
                EXIT_VALIDATION,
                format!(
                    "box override has dimension {}, model needs {}",
                    bbox.dim(),
                    model.dim()
                ),
            ));
        }
        bbox.validate()
            .map_err(|e| (EXIT_CERTIFICATE, e.to_string()))?;
        return Ok(bbox.clone());
    }
    compute_bounds(model, config.delta, config.extremum_grid)
        .map_err(|e| (box_error_code(&e), e.to_string()))
}

/// `validate`: hypothesis report; exit 0 on all-pass, 2 otherwise.
pub fn cmd_validate(config: &RunConfig) -> i32 {
    if let Err(e) = prepare_out(config) {
        return fail(EXIT_VALIDATION, &e);
    }
    let model = match config.resolve_model() {
        Ok(m) => m,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    let report = match model.check_conditions(&config.sampling()) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_VALIDATION, &e.to_string()),
    };
    if let Err(e) = write_json(&config.out_dir, "report.json", &report) {
        return fail(EXIT_VALIDATION, &e);
    }
    print_report(&report);
    if report.all_passed {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

fn print_report(report: &ValidationReport) {
    for check in &report.checks {
        println!(
            "hypothesis {} ({}): {} — {}",
            check.hypothesis,
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.detail
        );
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    println!(
        "validation: {}",
        if report.all_passed { "PASS" } else { "FAIL" }
    );
}

/// `bounds`: a-priori box only; exit 0, 2 (validation) or 3 (recursion).
pub fn cmd_bounds(config: &RunConfig) -> i32 {
    if let Err(e) = prepare_out(config) {
        return fail(EXIT_VALIDATION, &e);
    }
    let model = match config.resolve_model() {
        Ok(m) => m,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    match model.check_conditions(&config.sampling()) {
        Ok(report) if !report.all_passed => {
            print_report(&report);
            return fail(EXIT_VALIDATION, "model fails hypothesis validation");
        }
        Ok(_) => {}
        Err(e) => return fail(EXIT_VALIDATION, &e.to_string()),
    }
    let bbox = match resolve_box(config, &model) {
        Ok(b) => b,
        Err((code, e)) => return fail(code, &e),
    };
    if let Err(e) = write_json(&config.out_dir, "bounds.json", &bbox) {
        return fail(EXIT_VALIDATION, &e);
    }
    for k in 0..bbox.dim() {
        println!(
            "component {k}: ({:.6e}, {:.6e})",
            bbox.lower[k], bbox.upper[k]
        );
    }
    EXIT_OK
}

#[derive(Debug, Serialize)]
pub struct CertificateDocument {
    pub bounds: BoundsBox,
    pub certificate: Certificate,
}

fn build_certificate(
    config: &RunConfig,
    model: &ModelSpec,
) -> Result<(BoundsBox, Certificate), (i32, String)> {
    let bbox = resolve_box(config, model)?;
    let mut certificate = miranda_certificate(model, &bbox, config.face_samples, config.quad_nodes);
    let scan: HomotopyScan = homotopy_scan(
        model,
        &bbox,
        config.lambda_steps,
        config.face_samples,
        config.quad_nodes,
    );
    certificate.homotopy = Some(scan);
    Ok((bbox, certificate))
}

/// `certify`: box + face signs + homotopy scan + degree; exit 0 valid,
/// 3 invalid.
pub fn cmd_certify(config: &RunConfig) -> i32 {
    if let Err(e) = prepare_out(config) {
        return fail(EXIT_VALIDATION, &e);
    }
    let model = match config.resolve_model() {
        Ok(m) => m,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    match model.check_conditions(&config.sampling()) {
        Ok(report) if !report.all_passed => {
            print_report(&report);
            return fail(EXIT_VALIDATION, "model fails hypothesis validation");
        }
        Ok(_) => {}
        Err(e) => return fail(EXIT_VALIDATION, &e.to_string()),
    }
    let (bbox, certificate) = match build_certificate(config, &model) {
        Ok(pair) => pair,
        Err((code, e)) => return fail(code, &e),
    };
    let doc = CertificateDocument {
        bounds: bbox,
        certificate,
    };
    if let Err(e) = write_json(&config.out_dir, "certificate.json", &doc) {
        return fail(EXIT_VALIDATION, &e);
    }
    let cert = &doc.certificate;
    println!(
        "face signs: {} (slack {:.3e})",
        if cert.face_valid { "strict" } else { "VIOLATED" },
        cert.face_slack()
    );
    if let Some(scan) = &cert.homotopy {
        println!("homotopy: min |h| = {:.3e} over {} samples", scan.min_norm, scan.points);
    }
    match cert.degree {
        Some(degree) if cert.is_valid() => {
            println!("degree = {degree}");
            println!("certificate: VALID");
            EXIT_OK
        }
        _ => {
            println!("certificate: INVALID");
            if let Some(v) = &cert.violation {
                eprintln!(
                    "error: sign violation on component {} ({:?} face) at {:?}: phi = {:.6e}",
                    v.component, v.side, v.point, v.value
                );
            }
            EXIT_CERTIFICATE
        }
    }
}

fn initial_segment(
    config: &RunConfig,
    model: &ModelSpec,
    step: f64,
) -> Result<HistorySegment, (i32, String)> {
    let values = match &config.history {
        HistoryChoice::Constant(values) => {
            if values.len() != model.dim() {
                return Err((
                    EXIT_VALIDATION,
                    format!(
                        "history vector has length {}, model needs {}",
                        values.len(),
                        model.dim()
                    ),
                ));
            }
            if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err((
                    EXIT_VALIDATION,
                    "history vector must be finite and nonnegative".into(),
                ));
            }
            values.clone()
        }
        HistoryChoice::Center => resolve_box(config, model)?.center(),
        HistoryChoice::PhiRoot => {
            let bbox = resolve_box(config, model)?;
            bounds::phi_root(model, &bbox, 1e-10, config.quad_nodes)
                .map_err(|e| (EXIT_CERTIFICATE, e.to_string()))?
        }
    };
    let nodes = dde::history_nodes(model.max_delay(), step);
    Ok(HistorySegment::constant(&values, 0.0, step, nodes))
}

fn dde_error_code(err: &DdeError) -> i32 {
    match err {
        DdeError::BlowUp { .. } | DdeError::HistoryUnderflow { .. } => EXIT_RUNTIME,
        _ => EXIT_VALIDATION,
    }
}

/// `simulate`: integrate over the configured horizon and write the
/// trajectory CSV; exit 0, 2 on configuration errors, 4 on blow-up.
pub fn cmd_simulate(config: &RunConfig) -> i32 {
    if let Err(e) = prepare_out(config) {
        return fail(EXIT_VALIDATION, &e);
    }
    let model = match config.resolve_model() {
        Ok(m) => m,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    let step = config.step.unwrap_or_else(|| dde::default_step(&model));
    let init = match initial_segment(config, &model, step) {
        Ok(seg) => seg,
        Err((code, e)) => return fail(code, &e),
    };
    // snap the horizon onto the step grid; commensuration with the period
    // stays a hard requirement inside integrate()
    let horizon = config.horizon_periods * model.period;
    let t1 = (horizon / step).round() * step;
    let trajectory = match dde::integrate(&model, &init, t1, step, config.lambda) {
        Ok(t) => t,
        Err(e) => return fail(dde_error_code(&e), &e.to_string()),
    };
    let path = config.out_dir.join("trajectory.csv");
    let result = fs::File::create(&path).and_then(|mut file| {
        trajectory.write_csv(&mut file, true)
    });
    if let Err(e) = result {
        return fail(EXIT_VALIDATION, &format!("cannot write {}: {e}", path.display()));
    }
    println!(
        "integrated {} steps over [{:.6}, {:.6}] into {}",
        trajectory.steps(),
        trajectory.t0(),
        trajectory.t1(),
        path.display()
    );
    EXIT_OK
}

/// Metadata written next to the orbit CSV.
#[derive(Debug, Serialize)]
pub struct OrbitMetadata {
    pub residual: f64,
    pub iterations: usize,
    pub lambda: f64,
    pub amplitude: Vec<f64>,
    pub containment: ContainmentReport,
}

/// `find-periodic`: full pipeline (validate → box → certificate → return-map
/// search → containment); exit 0 converged-and-contained, 2 validation,
/// 3 certificate, 4 non-convergence or blow-up.
pub fn cmd_find_periodic(config: &RunConfig) -> i32 {
    if let Err(e) = prepare_out(config) {
        return fail(EXIT_VALIDATION, &e);
    }
    let model = match config.resolve_model() {
        Ok(m) => m,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    match model.check_conditions(&config.sampling()) {
        Ok(report) if !report.all_passed => {
            print_report(&report);
            return fail(EXIT_VALIDATION, "model fails hypothesis validation");
        }
        Ok(_) => {}
        Err(e) => return fail(EXIT_VALIDATION, &e.to_string()),
    }
    let (bbox, certificate) = match build_certificate(config, &model) {
        Ok(pair) => pair,
        Err((code, e)) => return fail(code, &e),
    };
    let doc = CertificateDocument {
        bounds: bbox,
        certificate,
    };
    if let Err(e) = write_json(&config.out_dir, "certificate.json", &doc) {
        return fail(EXIT_VALIDATION, &e);
    }
    if !doc.certificate.is_valid() {
        return fail(EXIT_CERTIFICATE, "certificate invalid; not searching for an orbit");
    }
    let orbit = match find_periodic(&model, &doc.bounds, &config.periodic()) {
        Ok(orbit) => orbit,
        Err(PeriodicError::NonConvergence {
            periods,
            last_residual,
            ..
        }) => {
            return fail(
                EXIT_RUNTIME,
                &PeriodicError::NonConvergence {
                    periods,
                    last_residual,
                    residual_history: Vec::new(),
                }
                .to_string(),
            );
        }
        Err(PeriodicError::Integration(e)) => return fail(dde_error_code(&e), &e.to_string()),
        Err(PeriodicError::Bounds(e)) => return fail(EXIT_CERTIFICATE, &e.to_string()),
    };
    let containment = box_containment(&orbit, &doc.bounds, config.slack);
    let metadata = OrbitMetadata {
        residual: orbit.residual,
        iterations: orbit.iterations,
        lambda: orbit.lambda,
        amplitude: orbit.amplitude.clone(),
        containment,
    };
    if let Err(e) = write_json(&config.out_dir, "orbit.json", &metadata) {
        return fail(EXIT_VALIDATION, &e);
    }
    let path = config.out_dir.join("orbit.csv");
    let result = fs::File::create(&path).and_then(|mut file| orbit.orbit.write_csv(&mut file, false));
    if let Err(e) = result {
        return fail(EXIT_VALIDATION, &format!("cannot write {}: {e}", path.display()));
    }
    println!(
        "orbit converged after {} periods, residual {:.3e}, amplitude {:?}",
        metadata.iterations, metadata.residual, metadata.amplitude
    );
    if !metadata.containment.all_pass {
        return fail(EXIT_RUNTIME, "converged orbit escapes the certified box");
    }
    println!("orbit contained in the certified box (slack {:.1e})", config.slack);
    EXIT_OK
}
