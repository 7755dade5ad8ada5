//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invariant or complete-positivity failure,
//! 2 unreadable or malformed input, 3 degenerate steady state.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{choi_matrix, kraus_from_choi, ChoiMatrix, QuantumChannel, COMPLETENESS_TOL};
use crate::error::EvolutionError;
use crate::evolution::{evolve, IntegratorConfig, Method, Trajectory, DEFAULT_DT};
use crate::linalg::eigenvalues;
use crate::liouville::{build_liouvillian, JumpOperator, LindbladModel, HAMILTONIAN_TOL};
use crate::matrix::{ComplexMatrix, C64};
use crate::presets::{PresetName, PresetSpec};
use crate::states::{DensityMatrix, Observable};
use crate::steady::{liouvillian_spectrum, steady_state};

/// Negative Choi eigenvalues below this fail the CP check.
pub const CP_TOL: f64 = 1e-10;

/// `dt·ρ(L̃)` above this triggers a step-size warning.
pub const STEP_WARNING: f64 = 0.1;

#[derive(Parser, Debug)]
#[command(name = "lindblad", version, about = "Lindblad master equation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a model file and report each invariant.
    Validate {
        path: PathBuf,
    },
    /// Integrate a model and write a CSV trajectory.
    Evolve(EvolveArgs),
    /// Compute the steady state.
    Steady {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every Liouvillian eigenvalue.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantum channel utilities.
    Channel {
        #[command(subcommand)]
        action: ChannelAction,
    },
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// JSON model file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub model: Option<PathBuf>,
    /// driven_tls, decaying_driven_tls or thermal_tls.
    #[arg(long)]
    pub preset: Option<String>,
    /// Preset energy E.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub energy: f64,
    /// Preset drive Ω.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub drive: f64,
    /// Preset decay rate Γ.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub rate: f64,
    /// Preset bath occupation n.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub occupation: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Cn,
    Spectral,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Cn => Method::CrankNicolson,
            MethodArg::Spectral => Method::Spectral,
        }
    }
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "rk4")]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
    #[arg(long = "t-max", default_value_t = 10.0)]
    pub t_max: f64,
    /// `p0`, `p1`, or `name=matrix.json`; repeatable.
    #[arg(long = "observable")]
    pub observables: Vec<String>,
    /// ground, excited, mixed, basis:K, or a JSON matrix file.
    #[arg(long, default_value = "excited")]
    pub initial: String,
    /// Divide by the trace after every step.
    #[arg(long)]
    pub renormalize: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ChannelAction {
    /// Completeness residual and complete-positivity verdict.
    Check {
        #[arg(long, num_args = 1.., conflicts_with = "choi", required_unless_present = "choi")]
        kraus: Vec<PathBuf>,
        #[arg(long)]
        choi: Option<PathBuf>,
    },
    /// Write the Choi matrix of a Kraus set.
    Choi {
        #[arg(long, num_args = 1.., required = true)]
        kraus: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract Kraus operators from a Choi matrix.
    FromChoi {
        #[arg(long)]
        choi: PathBuf,
        #[arg(long, default_value_t = CP_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Invariant(String),
    #[error("steady state is not unique (kernel_dimension={0})")]
    Degenerate(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invariant(_) => 1,
            Self::Input(_) => 2,
            Self::Degenerate(_) => 3,
        }
    }
}

type Entry = [f64; 2];
type MatrixJson = Vec<Vec<Entry>>;

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub hamiltonian: MatrixJson,
    #[serde(default)]
    pub jumps: Vec<JumpFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct JumpFile {
    pub rate: f64,
    pub operator: MatrixJson,
}

/// One matrix or a list of matrices.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixSet {
    One(MatrixJson),
    Many(Vec<MatrixJson>),
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, source: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::Input(format!(
            "{source}: field '{}': {} (line {}, column {})",
            e.path(),
            inner,
            inner.line(),
            inner.column()
        ))
    })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn matrix_from_json(m: &MatrixJson) -> Result<ComplexMatrix, String> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if let Some((i, r)) = m.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(format!("row {i} has {} entries, expected {cols}", r.len()));
    }
    let data = m.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    ComplexMatrix::from_vec(rows, cols, data).map_err(|e| e.to_string())
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [clean(z.re), clean(z.im)]).collect())
        .collect()
}

fn read_matrices(path: &Path) -> Result<Vec<ComplexMatrix>, CliError> {
    let source = path.display().to_string();
    let set: MatrixSet = parse_json(&read_text(path)?, &source)?;
    let raw = match set {
        MatrixSet::One(m) => vec![m],
        MatrixSet::Many(ms) => ms,
    };
    raw.iter()
        .map(|m| matrix_from_json(m).map_err(|e| CliError::Input(format!("{source}: {e}"))))
        .collect()
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let mut ms = read_matrices(path)?;
    if ms.len() != 1 {
        return Err(CliError::Input(format!("{}: expected a single matrix", path.display())));
    }
    Ok(ms.remove(0))
}

/// Checks every model invariant without stopping at the first failure.
pub struct ModelCheck {
    pub dim: usize,
    pub hermiticity_residual: Option<f64>,
    pub rates: Vec<f64>,
    pub checks: Vec<(&'static str, Result<(), String>)>,
}

impl ModelCheck {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, r)| r.is_ok())
    }
}

pub fn check_model_file(file: &ModelFile) -> (ModelCheck, Option<LindbladModel>) {
    let d = file.dim;
    let mut checks = Vec::new();
    let h = matrix_from_json(&file.hamiltonian);
    let shape = match &h {
        Ok(h) if h.rows() == d && h.cols() == d => Ok(()),
        Ok(h) => Err(format!("hamiltonian is {}x{}, dim is {d}", h.rows(), h.cols())),
        Err(e) => Err(format!("hamiltonian: {e}")),
    };
    checks.push(("hamiltonian shape", shape.clone()));
    let hermiticity_residual = h.as_ref().ok().filter(|_| shape.is_ok()).map(|h| h.hermiticity_residual());
    checks.push((
        "hamiltonian hermiticity",
        match hermiticity_residual {
            Some(r) if r <= HAMILTONIAN_TOL => Ok(()),
            Some(r) => Err(format!("residual {}", num(r))),
            None => Err("not checked".into()),
        },
    ));

    let mut jumps = Vec::new();
    let mut jump_shapes = Ok(());
    let mut rate_check = Ok(());
    for (k, j) in file.jumps.iter().enumerate() {
        if !(j.rate.is_finite() && j.rate >= 0.0) && rate_check.is_ok() {
            rate_check = Err(format!("jump {k} rate {}", num(j.rate)));
        }
        match matrix_from_json(&j.operator) {
            Ok(op) if op.rows() == d && op.cols() == d => jumps.push(JumpOperator::new(j.rate, op)),
            Ok(op) => {
                if jump_shapes.is_ok() {
                    jump_shapes = Err(format!("jump {k} is {}x{}, dim is {d}", op.rows(), op.cols()));
                }
            }
            Err(e) => {
                if jump_shapes.is_ok() {
                    jump_shapes = Err(format!("jump {k}: {e}"));
                }
            }
        }
    }
    checks.push(("jump shapes", jump_shapes));
    checks.push(("jump rates", rate_check));

    let mut model = None;
    if checks.iter().all(|(_, r)| r.is_ok()) {
        let built = h
            .map_err(|e| e.to_string())
            .and_then(|h| LindbladModel::new(h, jumps).map_err(|e| e.to_string()));
        match built {
            Ok(m) => {
                let m = match &file.label {
                    Some(label) => m.with_label(label.clone()),
                    None => m,
                };
                let residual = build_liouvillian(&m).trace_residual();
                checks.push((
                    "generator trace preservation",
                    if residual <= 1e-12 {
                        Ok(())
                    } else {
                        Err(format!("residual {}", num(residual)))
                    },
                ));
                model = Some(m);
            }
            Err(e) => checks.push(("model construction", Err(e))),
        }
    }
    let report = ModelCheck {
        dim: d,
        hermiticity_residual,
        rates: file.jumps.iter().map(|j| j.rate).collect(),
        checks,
    };
    (report, model)
}

pub fn load_model_file(path: &Path) -> Result<LindbladModel, CliError> {
    let file: ModelFile = parse_json(&read_text(path)?, &path.display().to_string())?;
    match check_model_file(&file) {
        (_, Some(m)) => Ok(m),
        (report, None) => {
            let (name, err) = report
                .checks
                .iter()
                .find_map(|(n, r)| r.as_ref().err().map(|e| (*n, e.clone())))
                .unwrap_or(("model", "invalid".into()));
            Err(CliError::Invariant(format!("{}: {name}: {err}", path.display())))
        }
    }
}

fn load_model(args: &ModelArgs) -> Result<LindbladModel, CliError> {
    match (&args.model, &args.preset) {
        (Some(path), _) => load_model_file(path),
        (None, Some(name)) => {
            let name: PresetName = name.parse().map_err(|e: crate::error::PresetError| CliError::Input(e.to_string()))?;
            PresetSpec {
                name,
                energy: args.energy,
                drive: args.drive,
                rate: args.rate,
                occupation: args.occupation,
            }
            .make()
            .map_err(|e| CliError::Input(e.to_string()))
        }
        (None, None) => Err(CliError::Input("either --model or --preset is required".into())),
    }
}

/// Turns `-0.0` into `0.0` so output does not depend on the sign of zero.
fn clean(x: f64) -> f64 {
    x + 0.0
}

/// 17 significant digits, locale-free.
pub fn num(x: f64) -> String {
    format!("{:.16e}", clean(x))
}

fn parse_initial(spec: &str, d: usize) -> Result<DensityMatrix, CliError> {
    let bad = |msg: String| CliError::Input(format!("--initial {spec}: {msg}"));
    match spec {
        "ground" => Ok(DensityMatrix::basis(d, 0)),
        "excited" => Ok(DensityMatrix::basis(d, d - 1)),
        "mixed" => Ok(DensityMatrix::maximally_mixed(d)),
        _ => {
            if let Some(k) = spec.strip_prefix("basis:") {
                let k: usize = k.parse().map_err(|_| bad("expected basis:K".into()))?;
                if k >= d {
                    return Err(bad(format!("index out of range for dimension {d}")));
                }
                return Ok(DensityMatrix::basis(d, k));
            }
            let m = read_matrix(Path::new(spec))?;
            if m.rows() != d || m.cols() != d {
                return Err(bad(format!("state is {}x{}, model dimension is {d}", m.rows(), m.cols())));
            }
            DensityMatrix::new(m).map_err(|e| CliError::Invariant(format!("initial state: {e}")))
        }
    }
}

fn parse_observable(spec: &str, d: usize) -> Result<(String, Observable), CliError> {
    let builtin = |k: usize| {
        if d != 2 {
            return Err(CliError::Input(format!(
                "builtin observable '{spec}' needs a two-level model (dimension is {d})"
            )));
        }
        Ok((spec.to_string(), Observable::population(2, k)))
    };
    match spec {
        "p0" => builtin(0),
        "p1" => builtin(1),
        _ => {
            let (name, path) = spec
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("observable '{spec}': expected p0, p1 or name=file")))?;
            let m = read_matrix(Path::new(path))?;
            if m.rows() != d || m.cols() != d {
                return Err(CliError::Input(format!(
                    "observable '{name}' is {}x{}, model dimension is {d}",
                    m.rows(),
                    m.cols()
                )));
            }
            let obs = Observable::new(m).map_err(|e| CliError::Invariant(format!("observable '{name}': {e}")))?;
            Ok((name.to_string(), obs))
        }
    }
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for (name, _) in &traj.observables {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",trace_drift,purity\n");
    for i in 0..traj.len() {
        out.push_str(&num(traj.times[i]));
        for (_, series) in &traj.observables {
            out.push(',');
            out.push_str(&num(series[i]));
        }
        let _ = writeln!(out, ",{},{}", num(traj.trace_drift[i]), num(traj.purity[i]));
    }
    out
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

fn cmd_validate(path: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file: ModelFile = parse_json(&read_text(path)?, &path.display().to_string())?;
    let (report, _) = check_model_file(&file);
    let mut text = String::new();
    let _ = writeln!(text, "model: {}", file.label.as_deref().unwrap_or(&path.display().to_string()));
    let _ = writeln!(text, "dim: {}", report.dim);
    if let Some(r) = report.hermiticity_residual {
        let _ = writeln!(text, "hamiltonian hermiticity residual: {}", num(r));
    }
    for (k, rate) in report.rates.iter().enumerate() {
        let _ = writeln!(text, "jump {k} rate: {}", num(*rate));
    }
    for (name, result) in &report.checks {
        match result {
            Ok(()) => {
                let _ = writeln!(text, "PASS {name}");
            }
            Err(e) => {
                let _ = writeln!(text, "FAIL {name}: {e}");
            }
        }
    }
    let passed = report.passed();
    let _ = writeln!(text, "{}", if passed { "valid" } else { "invalid" });
    emit(&None, &text, stdout)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Invariant("model failed validation".into()))
    }
}

fn cmd_evolve(args: &EvolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let d = model.dim();
    let rho0 = parse_initial(&args.initial, d)?;
    let observables = args
        .observables
        .iter()
        .map(|s| parse_observable(s, d))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cfg = IntegratorConfig::new(args.method.into(), args.dt, args.t_max);
    cfg.renormalize_trace = args.renormalize;
    cfg.record_states = false;
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;

    if cfg.method != Method::Spectral {
        let l = build_liouvillian(&model);
        if let Ok(ev) = eigenvalues(l.matrix()) {
            let radius = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if cfg.dt * radius >= STEP_WARNING {
                let _ = writeln!(
                    stderr,
                    "warning: dt * spectral radius = {} >= {STEP_WARNING}; consider a smaller --dt",
                    num(cfg.dt * radius)
                );
            }
        }
    }

    match evolve(&model, &rho0, &cfg, &observables) {
        Ok(traj) => {
            emit(&args.out, &trajectory_csv(&traj), stdout)?;
            let _ = writeln!(
                stderr,
                "{} rows, max trace drift {}",
                traj.len(),
                num(traj.max_trace_drift())
            );
            Ok(())
        }
        Err(EvolutionError::StepDivergence { time, partial }) => {
            let mut text = trajectory_csv(&partial);
            let _ = writeln!(text, "# DIVERGED at t={}", num(time));
            emit(&args.out, &text, stdout)?;
            Err(CliError::Invariant(format!("integration diverged at t={}", num(time))))
        }
        Err(e @ EvolutionError::InvalidConfig(_)) | Err(e @ EvolutionError::ObservableDimension { .. }) => {
            Err(CliError::Input(e.to_string()))
        }
        Err(e) => Err(CliError::Invariant(e.to_string())),
    }
}

fn cmd_steady(args: &ModelArgs, out: &Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(args)?;
    let report = steady_state(&model).map_err(|e| CliError::Invariant(e.to_string()))?;
    let mut text = String::new();
    let _ = writeln!(text, "# kernel_dimension={}", report.kernel_dimension);
    let gap = report.spectral_gap.map_or_else(|| "none".to_string(), num);
    let _ = writeln!(text, "# spectral_gap={gap}");
    let _ = writeln!(text, "# residual={}", num(report.residual));
    let _ = writeln!(
        stderr,
        "kernel_dimension={} spectral_gap={gap} residual={}",
        report.kernel_dimension,
        num(report.residual)
    );
    if !report.is_unique() {
        emit(out, &text, stdout)?;
        return Err(CliError::Degenerate(report.kernel_dimension));
    }
    let Some(state) = &report.state else {
        emit(out, &text, stdout)?;
        let reason = report
            .validation_error
            .as_ref()
            .map_or_else(|| "unknown".to_string(), ToString::to_string);
        return Err(CliError::Invariant(format!("kernel vector is not a valid state: {reason}")));
    };
    text.push_str("i,j,re,im\n");
    let m = state.matrix();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let _ = writeln!(text, "{i},{j},{},{}", num(m[(i, j)].re), num(m[(i, j)].im));
        }
    }
    emit(out, &text, stdout)?;
    if report.residual > 1e-9 * report.liouvillian_norm {
        return Err(CliError::Invariant(format!("steady-state residual {}", num(report.residual))));
    }
    if !report.is_contractive() {
        return Err(CliError::Invariant(format!(
            "eigenvalue with positive real part {}",
            num(report.max_real_part)
        )));
    }
    Ok(())
}

fn cmd_spectrum(args: &ModelArgs, out: &Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(args)?;
    let spec = liouvillian_spectrum(&model).map_err(|e| CliError::Invariant(e.to_string()))?;
    let mut text = String::new();
    let _ = writeln!(text, "# zero_eigenvalues={}", spec.zero_count);
    let gap = spec.gap.map_or_else(|| "none".to_string(), num);
    let _ = writeln!(text, "# spectral_gap={gap}");
    text.push_str("re,im\n");
    for z in spec.eigenvalues() {
        let _ = writeln!(text, "{},{}", num(z.re), num(z.im));
    }
    emit(out, &text, stdout)?;
    let _ = writeln!(
        stderr,
        "{} eigenvalues, {} zero, spectral_gap={gap}",
        spec.eigenvalues().len(),
        spec.zero_count
    );
    if spec.max_real_part() > crate::steady::CONTRACTIVITY_TOL {
        let _ = writeln!(stderr, "warning: eigenvalue with positive real part {}", num(spec.max_real_part()));
    }
    Ok(())
}

fn load_channel(paths: &[PathBuf]) -> Result<QuantumChannel, CliError> {
    let mut kraus = Vec::new();
    for p in paths {
        kraus.extend(read_matrices(p)?);
    }
    QuantumChannel::new(kraus).map_err(|e| CliError::Input(e.to_string()))
}

fn load_choi(path: &Path) -> Result<ChoiMatrix, CliError> {
    ChoiMatrix::from_matrix(read_matrix(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_channel(action: &ChannelAction, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match action {
        ChannelAction::Check { kraus, choi } => {
            let (tp_name, tp_residual, c) = match choi {
                Some(path) => {
                    let c = load_choi(path)?;
                    ("trace preservation residual", c.trace_preservation_residual(), c)
                }
                None => {
                    let ch = load_channel(kraus)?;
                    ("completeness residual", ch.completeness_residual(), choi_matrix(&ch))
                }
            };
            let min = c.min_eigenvalue().map_err(|e| CliError::Invariant(e.to_string()))?;
            let mut text = String::new();
            let _ = writeln!(text, "dim: {}", c.source_dim());
            let _ = writeln!(text, "{tp_name}: {}", num(tp_residual));
            let _ = writeln!(text, "choi min eigenvalue: {}", num(min));
            let tp = tp_residual <= COMPLETENESS_TOL;
            let cp = min >= -CP_TOL;
            let _ = writeln!(text, "{}", if tp { "trace preserving" } else { "NOT trace preserving" });
            if cp {
                text.push_str("completely positive\n");
            } else {
                let _ = writeln!(text, "NOT completely positive (eigenvalue {})", num(min));
            }
            emit(&None, &text, stdout)?;
            match (tp, cp) {
                (_, false) => Err(CliError::Invariant(format!("NOT completely positive (eigenvalue {})", num(min)))),
                (false, true) => Err(CliError::Invariant(format!("{tp_name} {}", num(tp_residual)))),
                (true, true) => Ok(()),
            }
        }
        ChannelAction::Choi { kraus, out } => {
            let ch = load_channel(kraus)?;
            let c = choi_matrix(&ch);
            let json = serde_json::to_string(&matrix_to_json(c.matrix())).expect("finite floats serialize");
            emit(out, &(json + "\n"), stdout)?;
            let _ = writeln!(stderr, "completeness residual: {}", num(ch.completeness_residual()));
            Ok(())
        }
        ChannelAction::FromChoi { choi, tol, out } => {
            let c = load_choi(choi)?;
            let ch = kraus_from_choi(&c, *tol).map_err(|e| match e {
                crate::error::ChannelError::NegativeChoi { eigenvalue } => {
                    CliError::Invariant(format!("NOT completely positive (eigenvalue {})", num(eigenvalue)))
                }
                other => CliError::Invariant(other.to_string()),
            })?;
            let set: Vec<MatrixJson> = ch.kraus().iter().map(matrix_to_json).collect();
            let json = serde_json::to_string(&set).expect("finite floats serialize");
            emit(out, &(json + "\n"), stdout)?;
            let _ = writeln!(
                stderr,
                "{} Kraus operators, completeness residual {}",
                ch.kraus().len(),
                num(ch.completeness_residual())
            );
            Ok(())
        }
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { path } => cmd_validate(path, stdout),
        Command::Evolve(args) => cmd_evolve(args, stdout, stderr),
        Command::Steady { model, out } => cmd_steady(model, out, stdout, stderr),
        Command::Spectrum { model, out } => cmd_spectrum(model, out, stdout, stderr),
        Command::Channel { action } => cmd_channel(action, stdout, stderr),
    }
}

/// Parses arguments, runs, reports errors on `stderr`, and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
