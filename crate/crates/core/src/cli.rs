//! JSON-configured runs behind the `stadium-decay` binary.
//!
//! A run is `stadium-decay <task> --config <file> [--jobs N] [--out DIR]`.
//! Every section of the config is optional and every field has a default;
//! unknown keys are rejected. The task on the command line wins over a
//! `task` key in the file, and scalar flags (`--seed`, `--h`, `--dt`,
//! `--t-final`, `--tol`) override the corresponding config values.
//!
//! Each task writes its CSV tables, an SVG plot and `summary.json`
//! (`{task, config_hash, checks, artifacts, details}`) into the output
//! directory. Exit status: 0 on success (checks may still fail; see the
//! summary), 2 for configuration errors, 3 for numerical failures.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use log::{error, info};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::damping::{build_constant_damping, build_smooth_m_damping, build_wing_damping, lemma31_constant, DampingProfile};
use crate::error::{Error, Result};
use crate::evolution::{bouncing_ball_data, decay_bound_functional, evolve_with, CauchyPair, EnergyTrace, CFL};
use crate::geometry::{build_rectangle, build_rectangle_anisotropic, build_rectangle_with_wings, build_stadium, GridMesh, Shape};
use crate::linalg::{random_field, DEFAULT_SEED, DEFAULT_TOL};
use crate::mode1d::{r0_window_sup, XLine};
use crate::output::{config_hash, ArtifactDir, Check, Plot, Series, Summary};
use crate::quasimode::{quasimode_residual_series, residual_csv, QuasimodeSpec};
use crate::resolvent2d::{generator_sweep, sweep_and_fit, SweepResult};
use crate::spectrum::{assemble_generator, compute_spectrum, SpectrumMethod, SpectrumRequest, SpectrumWindow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    MeshInfo,
    Sweep,
    Evolve,
    Spectrum,
    Quasimode,
    R0,
    Lemma31,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::MeshInfo => "mesh-info",
            Task::Sweep => "sweep",
            Task::Evolve => "evolve",
            Task::Spectrum => "spectrum",
            Task::Quasimode => "quasimode",
            Task::R0 => "r0",
            Task::Lemma31 => "lemma31",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stadium-decay", version, about = "Damped waves on partially rectangular domains")]
pub struct Args {
    pub task: Task,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory (default: `out` key of the config, else `out/<task>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Mesh spacing.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Power-iteration tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Full run configuration. Defaults: stadium with β = π/2 and h = 0.05,
/// wing damping on `[0.15, 0.85]` with floor 1, seed 0x5EED.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub domain: DomainConfig,
    pub damping: DampingConfig,
    pub sweep: SweepConfig,
    pub evolve: EvolveConfig,
    pub spectrum: SpectrumConfig,
    pub quasimode: QuasimodeConfig,
    pub r0: R0Config,
    pub lemma31: Lemma31Config,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: None,
            domain: DomainConfig::default(),
            damping: DampingConfig::default(),
            sweep: SweepConfig::default(),
            evolve: EvolveConfig::default(),
            spectrum: SpectrumConfig::default(),
            quasimode: QuasimodeConfig::default(),
            r0: R0Config::default(),
            lemma31: Lemma31Config::default(),
            seed: DEFAULT_SEED,
            out: None,
        }
    }
}

/// `ly` is ignored for the stadium (its height is `2β`); `lx` is 1 there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub shape: Shape,
    pub lx: f64,
    pub ly: f64,
    pub beta: f64,
    pub h: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { shape: Shape::Stadium, lx: 1.0, ly: PI, beta: PI / 2.0, h: 0.05 }
    }
}

impl DomainConfig {
    pub fn build(&self) -> Result<GridMesh> {
        match self.shape {
            Shape::Rectangle => build_rectangle(self.lx, self.ly, self.h),
            Shape::Stadium => build_stadium(self.beta, self.h),
            Shape::RectangleWithWings => build_rectangle_with_wings(self.lx, self.ly, self.beta, self.h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingChoice {
    Wing,
    SmoothM,
    Constant,
    None,
}

/// `amplitude` doubles as the value of constant damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DampingConfig {
    pub kind: DampingChoice,
    pub m: u32,
    pub delta: f64,
    pub amplitude: f64,
    pub strip: [f64; 2],
    pub floor: f64,
}

impl Default for DampingConfig {
    fn default() -> Self {
        Self { kind: DampingChoice::Wing, m: 4, delta: 0.1, amplitude: 1.0, strip: [0.15, 0.85], floor: 1.0 }
    }
}

impl DampingConfig {
    /// `None` for undamped runs.
    pub fn build(&self, mesh: &GridMesh) -> Result<Option<DampingProfile>> {
        Ok(match self.kind {
            DampingChoice::Wing => Some(build_wing_damping(mesh, self.strip, self.floor)?),
            DampingChoice::SmoothM => Some(build_smooth_m_damping(mesh, self.m, self.delta, self.amplitude)?),
            DampingChoice::Constant => Some(build_constant_damping(mesh, self.amplitude)?),
            DampingChoice::None => None,
        })
    }

    fn require(&self, mesh: &GridMesh) -> Result<DampingProfile> {
        self.build(mesh)?.ok_or_else(|| Error::Config("this task needs a damping profile".into()))
    }
}

/// Geometric progression `start, …, stop` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Explicit frequencies; takes precedence over `range`.
    pub lambdas: Option<Vec<f64>>,
    pub range: Option<LambdaRange>,
    pub tol: f64,
    pub fit_window: Option<[f64; 2]>,
    /// Sweep the generator resolvent on `H¹₀ × L²` instead of `R(λ)`.
    pub generator: bool,
    /// Bound on the fitted exponent; 1.3 for `R(λ)`, 2.3 for the generator.
    pub alpha_bound: Option<f64>,
    pub residual_bound: f64,
    pub identity_bound: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambdas: None,
            range: None,
            tol: DEFAULT_TOL,
            fit_window: None,
            generator: false,
            alpha_bound: None,
            residual_bound: 0.2,
            identity_bound: 1e-8,
        }
    }
}

impl SweepConfig {
    pub fn lambdas(&self) -> Result<Vec<f64>> {
        if let Some(l) = &self.lambdas {
            return Ok(l.clone());
        }
        match self.range {
            Some(r) => {
                if r.count < 2 || !(r.start > 0.0 && r.stop > r.start) {
                    return Err(Error::Config("range needs 0 < start < stop and count ≥ 2".into()));
                }
                let q = (r.stop / r.start).powf(1.0 / (r.count - 1) as f64);
                Ok((0..r.count).map(|i| r.start * q.powi(i as i32)).collect())
            }
            None => Ok(vec![5.0, 7.0, 10.0, 14.0, 20.0, 28.0]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    /// Bump in x times the lowest vertical mode, at rest.
    BouncingBall,
    /// Seeded random `(u0, u1)`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub t_final: f64,
    /// Defaults to `0.4 · min(hx, hy)`.
    pub dt: Option<f64>,
    pub data: InitialData,
    pub center: f64,
    pub width: f64,
    pub mode: usize,
    /// Orders `k` of the decay functional to report.
    pub ks: Vec<u32>,
    /// If set, the decay constants over `[2, compare_t]` are compared with
    /// those over the full run.
    pub compare_t: Option<f64>,
    pub stability_bound: f64,
    pub monotone_slack: f64,
    pub conservation_bound: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_final: 50.0,
            dt: None,
            data: InitialData::BouncingBall,
            center: 0.5,
            width: 0.2,
            mode: 1,
            ks: vec![1, 2],
            compare_t: None,
            stability_bound: 0.2,
            monotone_slack: 1e-12,
            conservation_bound: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub method: SpectrumMethod,
    pub window: Option<SpectrumWindow>,
    /// Shift-invert targets as `[re, im]`.
    pub targets: Vec<[f64; 2]>,
    pub tol: f64,
    pub max_iter: usize,
    pub band_slack: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { method: SpectrumMethod::Dense, window: None, targets: Vec::new(), tol: 1e-10, max_iter: 200, band_slack: 1e-10 }
    }
}

/// The quasimode task ignores `domain`: each `k` gets its own strip
/// `[-L, L] × [0, π]` with spacings `hx` and `π / ny`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasimodeConfig {
    pub ks: Vec<usize>,
    pub sigma: f64,
    pub hx: f64,
    pub ny: usize,
    pub t_min: f64,
    pub t_step: f64,
    pub scaled_bound: f64,
    pub ratio_time: f64,
    pub ratio_range: [f64; 2],
}

impl Default for QuasimodeConfig {
    fn default() -> Self {
        Self {
            ks: vec![8, 16, 32],
            sigma: 2.0,
            hx: 0.1,
            ny: 512,
            t_min: 0.5,
            t_step: 0.25,
            scaled_bound: 1.0,
            ratio_time: 4.0,
            ratio_range: [1.4, 2.8],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct R0Config {
    pub intervals: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub step: f64,
    pub spread_bound: f64,
}

impl Default for R0Config {
    fn default() -> Self {
        Self { intervals: 1000, tau_min: 1.0, tau_max: 200.0, step: 0.25, spread_bound: 3.0 }
    }
}

impl R0Config {
    /// Dyadic windows `[τ_min, 2τ_min], [2τ_min, 4τ_min], …`, the last one cut at `τ_max`.
    pub fn windows(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        let mut lo = self.tau_min;
        while lo < self.tau_max {
            let hi = (2.0 * lo).min(self.tau_max);
            if self.tau_max - hi < 0.5 * (hi - lo) {
                out.push([lo, self.tau_max]);
                break;
            }
            out.push([lo, hi]);
            lo = hi;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma31Config {
    pub ms: Vec<u32>,
}

impl Default for Lemma31Config {
    fn default() -> Self {
        Self { ms: vec![4, 6, 8] }
    }
}

/// Parses a config, rejecting unknown keys.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Parses the arguments, runs, logs any error, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run_args(&args) {
        Ok(summary) => {
            info!("{}: {} checks, all pass = {}", summary.task, summary.checks.len(), summary.all_pass());
            EXIT_OK
        }
        Err(e) => {
            error!("{e}");
            exit_code(&e)
        }
    }
}

/// Exit status for an error: 2 for anything the user can fix in the
/// config, 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Geometry(_) | Error::Damping(_) | Error::InvalidArgument(_) | Error::Cfl { .. } => {
            EXIT_CONFIG
        }
        _ => EXIT_NUMERIC,
    }
}

/// Reads the config, applies flag overrides and runs the task.
pub fn run_args(args: &Args) -> Result<Summary> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(t) = config.task {
        if t != args.task {
            info!("command-line task {} overrides config task {}", args.task.name(), t.name());
        }
    }
    config.task = Some(args.task);
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(h) = args.h {
        config.domain.h = h;
    }
    if let Some(dt) = args.dt {
        config.evolve.dt = Some(dt);
    }
    if let Some(t) = args.t_final {
        config.evolve.t_final = t;
    }
    if let Some(tol) = args.tol {
        config.sweep.tol = tol;
        config.spectrum.tol = tol;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| Path::new("out").join(args.task.name()));
    let hash = config_hash(text.as_bytes());
    let jobs = args.jobs;
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build a pool of {n} workers: {e}")))?;
            pool.install(|| run(&config, &out, &hash))
        }
        None => run(&config, &out, &hash),
    }
}

/// Runs `config.task` (default mesh-info), writing artifacts into `out`.
pub fn run(config: &RunConfig, out: &Path, config_hash: &str) -> Result<Summary> {
    let task = config.task.unwrap_or(Task::MeshInfo);
    let mut dir = ArtifactDir::create(out)?;
    let outcome = match task {
        Task::MeshInfo => mesh_info(config, &mut dir),
        Task::Sweep => sweep(config, &mut dir),
        Task::Evolve => evolve(config, &mut dir),
        Task::Spectrum => spectrum(config, &mut dir),
        Task::Quasimode => quasimode(config, &mut dir),
        Task::R0 => r0(config, &mut dir),
        Task::Lemma31 => lemma31(config, &mut dir),
    };
    let (checks, details, failure) = match outcome {
        Ok(TaskOutput { checks, details, failure }) => (checks, details, failure),
        Err(e) => (Vec::new(), serde_json::json!({ "error": e.to_string() }), Some(e)),
    };
    let mut artifacts = dir.artifacts().to_vec();
    artifacts.push("summary.json".into());
    let summary = Summary { task: task.name().into(), config_hash: config_hash.into(), checks, artifacts, details };
    dir.write_json("summary.json", &summary)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

struct TaskOutput {
    checks: Vec<Check>,
    details: serde_json::Value,
    /// Numerical failure discovered after partial results were written.
    failure: Option<Error>,
}

impl TaskOutput {
    fn ok(checks: Vec<Check>, details: serde_json::Value) -> Self {
        Self { checks, details, failure: None }
    }
}

fn mesh_info(config: &RunConfig, dir: &mut ArtifactDir) -> Result<TaskOutput> {
    let mesh = config.domain.build()?;
    let summary = mesh.summary();
    dir.write_json("mesh.json", &summary)?;
    if let Some(d) = config.damping.build(&mesh)? {
        dir.write("damping.csv", &d.to_csv(&mesh))?;
    }
    let checks = vec![
        Check::at_least("n_interior", summary.n_interior as f64, 1.0),
        Check::at_least("area_estimate", summary.area_estimate, 0.0),
    ];
    Ok(TaskOutput::ok(checks, serde_json::to_value(summary)?))
}

fn sweep(config: &RunConfig, dir: &mut ArtifactDir) -> Result<TaskOutput> {
    let mesh = config.domain.build()?;
    let damping = config.damping.require(&mesh)?;
    let sc = &config.sweep;
    let lambdas = sc.lambdas()?;
    let result = if sc.generator {
        generator_sweep(&mesh, &damping, &lambdas, sc.tol, sc.fit_window)?
    } else {
        sweep_and_fit(&mesh, &damping, &lambdas, sc.tol, sc.fit_window)?
    };
    dir.write("sweep.csv", &result.to_csv())?;
    dir.write_json("fit.json", &result.fit_json())?;
    dir.write("sweep.svg", &sweep_plot(&result, sc.generator).to_svg())?;

    let bound = sc.alpha_bound.unwrap_or(if sc.generator { 2.3 } else { 1.3 });
    let mut checks = vec![
        Check::at_most("alpha", result.fitted_exponent().unwrap_or(f64::NAN), bound),
        Check::at_most("fit_residual", result.fit_residual().unwrap_or(f64::NAN), sc.residual_bound),
    ];
    if !sc.generator {
        checks.push(Check::at_most("imaginary_identity_defect", result.max_identity_defect(), sc.identity_bound));
    }
    let failed: Vec<&crate::resolvent2d::SweepEntry> = result.entries.iter().filter(|e| e.failed).collect();
    let details = serde_json::json!({ "fit": result.fit_json(), "entries": result.entries });
    let failure = (!failed.is_empty()).then(|| {
        let list: Vec<String> = failed.iter().map(|e| format!("λ = {}: {}", e.lambda, e.error.as_deref().unwrap_or("?"))).collect();
        Error::SweepEntries { failed: failed.len(), total: result.entries.len(), detail: list.join("; ") }
    });
    Ok(TaskOutput { checks, details, failure })
}

fn sweep_plot(result: &SweepResult, generator: bool) -> Plot {
    let pts: Vec<(f64, f64)> = result.entries.iter().filter(|e| !e.failed).map(|e| (e.lambda, e.norm)).collect();
    let mut plot = Plot::new(if generator { "generator resolvent norm" } else { "resolvent norm" }, "lambda", "norm")
        .log_log()
        .with(Series::scatter("measured", pts));
    if let Some(f) = result.fit {
        let line: Vec<(f64, f64)> = result
            .entries
            .iter()
            .filter(|e| e.lambda >= f.window[0] && e.lambda <= f.window[1])
            .map(|e| (e.lambda, (f.intercept + f.exponent * e.lambda.ln()).exp()))
            .collect();
        plot = plot.with(Series::line(&format!("fit alpha = {:.3}", f.exponent), line));
    }
    plot
}

fn initial_data(config: &RunConfig, mesh: &GridMesh) -> Result<CauchyPair> {
    let ec = &config.evolve;
    match ec.data {
        InitialData::BouncingBall => bouncing_ball_data(mesh, ec.center, ec.width, ec.mode),
        InitialData::Random => {
            let n = mesh.n_interior();
            CauchyPair::new(mesh, random_field(n, config.seed), random_field(n, config.seed.wrapping_add(1)))
        }
    }
}

fn evolve(config: &RunConfig, dir: &mut ArtifactDir) -> Result<TaskOutput> {
    let mesh = config.domain.build()?;
    let damping = config.damping.build(&mesh)?;
    let ec = &config.evolve;
    let dt = ec.dt.unwrap_or(CFL * mesh.hx().min(mesh.hy()));
    let data = initial_data(config, &mesh)?;
    let trace = evolve_with(&mesh, damping.as_ref(), &data, ec.t_final, dt)?;
    dir.write("trace.csv", &trace.to_csv())?;
    dir.write("trace.svg", &trace_plot(&trace).to_svg())?;

    let mut checks = Vec::new();
    let mut constants = serde_json::Map::new();
    if damping.is_some() {
        checks.push(Check::at_most("energy_monotone", trace.max_relative_increase(), ec.monotone_slack));
        if trace.final_time() >= 2.0 {
            for &k in &ec.ks {
                let c = decay_bound_functional(&trace, k)?;
                checks.push(Check::at_most(&format!("decay_constant_k{k}_finite"), c, f64::MAX));
                constants.insert(format!("k{k}"), c.into());
                if let Some(tc) = ec.compare_t {
                    let early = decay_bound_functional(&trace.truncated(tc), k)?;
                    let change = (c - early).abs() / early;
                    checks.push(Check::at_most(&format!("decay_constant_k{k}_change"), change, ec.stability_bound));
                    constants.insert(format!("k{k}_until_{tc}"), early.into());
                }
            }
        }
    } else {
        checks.push(Check::at_most("energy_conservation", trace.state_energy_drift(), ec.conservation_bound));
    }
    let details = serde_json::json!({
        "dt": dt,
        "method": trace.method,
        "samples": trace.times.len(),
        "data_norms": trace.data_norms,
        "decay_constants": constants,
    });
    Ok(TaskOutput::ok(checks, details))
}

fn trace_plot(trace: &EnergyTrace) -> Plot {
    let pts: Vec<(f64, f64)> = trace.times.iter().copied().zip(trace.energies.iter().copied()).collect();
    Plot::new("energy", "t", "E").log_y().with(Series::line("E(t)", pts))
}

fn spectrum(config: &RunConfig, dir: &mut ArtifactDir) -> Result<TaskOutput> {
    let mesh = config.domain.build()?;
    let damping = config.damping.require(&mesh)?;
    let gen = assemble_generator(&mesh, &damping)?;
    let sc = &config.spectrum;
    let window = sc.window.unwrap_or_else(SpectrumWindow::everything);
    let request = match sc.method {
        SpectrumMethod::Dense => SpectrumRequest::Dense(window),
        SpectrumMethod::ShiftInvert => SpectrumRequest::ShiftInvert {
            window,
            targets: sc.targets.iter().map(|t| Complex64::new(t[0], t[1])).collect(),
            tol: sc.tol,
            max_iter: sc.max_iter,
        },
    };
    let result = compute_spectrum(&gen, &request)?;
    dir.write("spectrum.csv", &result.to_csv())?;
    let pts: Vec<(f64, f64)> = result.eigenvalues.iter().map(|e| (e.lambda.re, e.lambda.im)).collect();
    dir.write("spectrum.svg", &Plot::new("generator spectrum", "Re lambda", "Im lambda").with(Series::scatter("eigenvalues", pts)).to_svg())?;
    let (lo, hi) = result.imag_range();
    let checks = vec![
        Check::at_least("min_imag", lo, -sc.band_slack),
        Check::at_most("max_imag", hi, 2.0 * gen.a_max() + sc.band_slack),
        Check::at_most("max_residual", result.max_residual(), 1e-6),
    ];
    let details = serde_json::json!({
        "count": result.eigenvalues.len(),
        "a_max": gen.a_max(),
        "failed_targets": result.failed_targets,
    });
    Ok(TaskOutput::ok(checks, details))
}

/// Residual series for one `k` on its own strip.
pub fn quasimode_series(qc: &QuasimodeConfig, k: usize) -> Result<Vec<(f64, f64)>> {
    let horizon = k as f64 / 4.0;
    let spec = QuasimodeSpec::gaussian(k, qc.sigma, horizon);
    let l = spec.strip_half_length;
    let mesh = build_rectangle_anisotropic(-l, 2.0 * l, PI, qc.hx, PI / qc.ny as f64)?;
    let dt = CFL * mesh.hx().min(mesh.hy());
    let mut times = Vec::new();
    let mut t = qc.t_min;
    while t <= horizon + 1e-9 {
        times.push(t);
        t += qc.t_step;
    }
    quasimode_residual_series(&mesh, &spec, &times, dt)
}

fn quasimode(config: &RunConfig, dir: &mut ArtifactDir) -> Result<TaskOutput> {
    let qc = &config.quasimode;
    let mut rows = Vec::new();
    let mut plot = Plot::new("quasimode residual", "t", "residual / (t/k)");
    let mut checks = Vec::new();
    let mut at_ratio_time = Vec::new();
    for &k in &qc.ks {
        let series = quasimode_series(qc, k)?;
        let scaled: Vec<(f64, f64)> = series.iter().map(|&(t, r)| (t, r / (t / k as f64))).collect();
        let worst = scaled.iter().map(|p| p.1).fold(0.0, f64::max);
        checks.push(Check::at_most(&format!("scaled_residual_k{k}"), worst, qc.scaled_bound));
        if let Some(&(_, r)) = series.iter().find(|p| (p.0 - qc.ratio_time).abs() < 1e-9) {
            at_ratio_time.push((k, r));
        }
        plot = plot.with(Series::line(&format!("k = {k}"), scaled));
        rows.extend(series.into_iter().map(|(t, r)| (k, t, r)));
    }
    dir.write("quasimode.csv", &residual_csv(&rows))?;
    dir.write("quasimode.svg", &plot.to_svg())?;
    let find = |k| at_ratio_time.iter().find(|p| p.0 == k).map(|p| p.1);
    if let (Some(a), Some(b)) = (find(16), find(32)) {
        let ratio = a / b;
        checks.push(Check::at_least("ratio_k16_k32_low", ratio, qc.ratio_range[0]));
        checks.push(Check::at_most("ratio_k16_k32_high", ratio, qc.ratio_range[1]));
    }
    Ok(TaskOutput::ok(checks, serde_json::json!({ "sigma": qc.sigma, "hx": qc.hx, "ny": qc.ny })))
}

fn r0(config: &RunConfig, dir: &mut ArtifactDir) -> Result<TaskOutput> {
    let mesh = config.domain.build()?;
    let damping = config.damping.require(&mesh)?;
    let rc = config.r0;
    let line = XLine::from_profile(&damping, rc.intervals)?;
    let mut csv = String::from("window_lo,window_hi,tau,sup_weighted_norm\n");
    let mut pts = Vec::new();
    for [lo, hi] in rc.windows() {
        let (tau, v) = r0_window_sup(&line, lo, hi, rc.step)?;
        csv.push_str(&format!("{lo:.11e},{hi:.11e},{tau:.11e},{v:.11e}\n"));
        pts.push((tau, v));
    }
    dir.write("r0.csv", &csv)?;
    dir.write("r0.svg", &Plot::new("weighted 1D resolvent", "tau", "(1+tau) norm").log_log().with(Series::scatter("window sup", pts.clone())).to_svg())?;
    let max = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    let min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let checks = vec![Check::at_most("window_spread", max / min, rc.spread_bound)];
    Ok(TaskOutput::ok(checks, serde_json::json!({ "max": max, "min": min })))
}

fn lemma31(config: &RunConfig, dir: &mut ArtifactDir) -> Result<TaskOutput> {
    let mesh = config.domain.build()?;
    let dc = config.damping;
    let mut csv = String::from("m,n,constant\n");
    let mut checks = Vec::new();
    for &m in &config.lemma31.ms {
        let profile = build_smooth_m_damping(&mesh, m, dc.delta, dc.amplitude)?;
        for n in 1..m {
            let c = lemma31_constant(&profile, &mesh, n)?;
            csv.push_str(&format!("{m},{n},{c:.11e}\n"));
            checks.push(Check::at_most(&format!("constant_m{m}_n{n}_finite"), c, f64::MAX));
        }
        // amplitude δ^m makes the layer an exact monomial, where n = 1 gives m
        let monomial = build_smooth_m_damping(&mesh, m, dc.delta, dc.delta.powi(m as i32))?;
        let c1 = lemma31_constant(&monomial, &mesh, 1)?;
        checks.push(Check::at_most(&format!("monomial_m{m}_n1_defect"), (c1 - m as f64).abs(), 1e-10));
    }
    dir.write("lemma31.csv", &csv)?;
    Ok(TaskOutput::ok(checks, serde_json::Value::Null))
}
