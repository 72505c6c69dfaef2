//! Command-line surface: sweeps, SQL crossings, figure data, sensitivity
//! curves and oracle runs. Output is a pure function of the configuration.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analytic::{
    compute_g, compute_g_with, min_sensitivity, mz_min, penalty_factor, phase_sensitivity_sq_at,
    sql_crossing, AnalyticError, Method,
};
use crate::model::{derive_dimensionless, DimensionlessParams, ModelError, PhysicalSetup, SeedSpec};
use crate::oracle::{run_oracle, GridSpec, OracleConfig, OracleError, OracleReport};
use crate::special::SpecialError;

pub const CSV_HEADER: &str = "xi,nu,mu,g0_per_photon,g1_per_photon,rho,dphi_min_times_sqrt_ns,method";
pub const CURVE_HEADER: &str = "phi0,dphi0_sq";

/// Default figure families and squeezing grid.
pub const FIGURE_VALUES: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];
pub const FIGURE_XI: (f64, f64, usize) = (0.01, 2.0, 200);
pub const SQL_THRESHOLD_METHOD: &str = "sql-threshold";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    #[error("oracle tolerances not met")]
    OracleFailure(Box<OracleReport>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidConfig(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::OracleFailure(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::InvalidConfig(e.to_string())
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::Special(SpecialError::NonConvergence { .. }) | AnalyticError::NoCrossing { .. } => {
                CliError::NonConvergence(e.to_string())
            }
            other => CliError::InvalidConfig(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Analytic(a) => a.into(),
            OracleError::IllConditioned { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::InvalidConfig(other.to_string()),
        }
    }
}

/// Shortest round-trip representation of the value rounded to 12
/// significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format_number(x)))
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub params: Option<DimensionlessParams>,
    pub physical: Option<PhysicalConfig>,
    pub sweep: Option<SweepSection>,
    pub oracle: Option<OracleSection>,
    pub curve: Option<CurveSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConfig {
    pub setup: PhysicalSetup,
    pub seed: SeedSpec,
    #[serde(default = "default_pump_phases")]
    pub pump_phases: (f64, f64),
    #[serde(default)]
    pub phi0: f64,
    #[serde(default)]
    pub phi_delta: f64,
}

fn default_pump_phases() -> (f64, f64) {
    (0.0, PI / 2.0)
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub xi_steps: Option<usize>,
    pub nu: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub n_seed: Option<f64>,
    pub method: Option<Method>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub n_points: Option<usize>,
    pub extent: Option<f64>,
    pub n_max: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub phi0_steps: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::InvalidConfig(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_steps: usize,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub n_seed: f64,
    /// Forces one evaluation branch at every point.
    pub method: Option<Method>,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            xi_min: 0.0,
            xi_max: 2.0,
            xi_steps: 200,
            nu: vec![0.0],
            mu: vec![0.0],
            n_seed: 1.0,
            method: None,
            out: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::InvalidConfig(m));
        if !(self.xi_min.is_finite() && self.xi_min >= 0.0) {
            return bad(format!("xi_min must be >= 0, got {}", self.xi_min));
        }
        if !(self.xi_max.is_finite() && self.xi_max > self.xi_min) {
            return bad(format!("xi_max must exceed xi_min, got {}", self.xi_max));
        }
        if self.xi_steps < 2 {
            return bad(format!("xi_steps must be >= 2, got {}", self.xi_steps));
        }
        for (name, list) in [("nu", &self.nu), ("mu", &self.mu)] {
            if list.is_empty() {
                return bad(format!("{name} list is empty"));
            }
            if let Some(v) = list.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return bad(format!("{name} values must be finite and >= 0, got {v}"));
            }
        }
        if !(self.n_seed.is_finite() && self.n_seed > 0.0) {
            return bad(format!("n_seed must be > 0, got {}", self.n_seed));
        }
        if let Some(m) = self.method {
            for &nu in &self.nu {
                for &mu in &self.mu {
                    if !m.applies(nu, mu) {
                        return bad(format!("method {m} does not apply at nu = {nu}, mu = {mu}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn xi_values(&self) -> Vec<f64> {
        let n = self.xi_steps;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.xi_max
                } else {
                    self.xi_min + (self.xi_max - self.xi_min) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Commands

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRow {
    pub xi: f64,
    pub nu: f64,
    pub mu: f64,
    pub g0_per_photon: f64,
    pub g1_per_photon: f64,
    pub rho: f64,
    pub dphi_min_times_sqrt_ns: f64,
    pub method: String,
}

impl OutputRow {
    pub fn to_csv(&self) -> String {
        let nums = [
            self.xi,
            self.nu,
            self.mu,
            self.g0_per_photon,
            self.g1_per_photon,
            self.rho,
            self.dphi_min_times_sqrt_ns,
        ];
        let mut line: Vec<String> = nums.iter().map(|&x| format_number(x)).collect();
        line.push(self.method.clone());
        line.join(",")
    }

    fn to_json(&self) -> Value {
        serde_json::json!({
            "xi": json_number(self.xi),
            "nu": json_number(self.nu),
            "mu": json_number(self.mu),
            "g0_per_photon": json_number(self.g0_per_photon),
            "g1_per_photon": json_number(self.g1_per_photon),
            "rho": json_number(self.rho),
            "dphi_min_times_sqrt_ns": json_number(self.dphi_min_times_sqrt_ns),
            "method": self.method,
        })
    }
}

pub fn rows_to_csv(rows: &[OutputRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

pub fn rows_to_json(rows: &[OutputRow]) -> String {
    let v: Vec<Value> = rows.iter().map(OutputRow::to_json).collect();
    serde_json::to_string_pretty(&v).expect("rows serialize") + "\n"
}

fn evaluate_row(xi: f64, nu: f64, mu: f64, n_seed: f64, method: Option<Method>) -> Result<OutputRow, AnalyticError> {
    let p = DimensionlessParams::new(xi, nu, mu, n_seed)?;
    let g = match method {
        Some(m) => compute_g_with(&p, m)?,
        None => compute_g(&p)?,
    };
    let (dphi, rho) = match min_sensitivity(&p, &g) {
        Ok(d) => (d * n_seed.sqrt(), d / mz_min(n_seed)?),
        Err(AnalyticError::ZeroSignal) => (f64::INFINITY, f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(OutputRow {
        xi,
        nu,
        mu,
        g0_per_photon: g.g0_per_photon(),
        g1_per_photon: g.g1_per_photon(),
        rho,
        dphi_min_times_sqrt_ns: dphi,
        method: g.method.as_str().to_string(),
    })
}

/// One row per (xi, nu, mu): nu outer, mu middle, xi inner.
pub fn cmd_sweep(cfg: &SweepConfig) -> Result<Vec<OutputRow>, CliError> {
    cfg.validate()?;
    let xis = cfg.xi_values();
    let mut points = Vec::with_capacity(cfg.nu.len() * cfg.mu.len() * xis.len());
    for &nu in &cfg.nu {
        for &mu in &cfg.mu {
            points.extend(xis.iter().map(|&xi| (xi, nu, mu)));
        }
    }
    let results: Vec<_> = points
        .par_iter()
        .map(|&(xi, nu, mu)| evaluate_row(xi, nu, mu, cfg.n_seed, cfg.method))
        .collect();
    results
        .into_iter()
        .zip(&points)
        .map(|(r, &(xi, nu, mu))| {
            r.map_err(|e| {
                let at = format!("at xi = {xi}, nu = {nu}, mu = {mu}: {e}");
                match CliError::from(e) {
                    CliError::NonConvergence(_) => CliError::NonConvergence(at),
                    _ => CliError::InvalidConfig(at),
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub nu: f64,
    pub mu: f64,
    pub xi_star: f64,
    pub penalty: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub residual: f64,
}

impl CrossingReport {
    pub fn to_text(&self) -> String {
        format!(
            "nu = {}\nmu = {}\nxi_star = {}\npenalty = {}\niterations = {}\nresidual = {:e}\n",
            format_number(self.nu),
            format_number(self.mu),
            format_number(self.xi_star),
            format_number(self.penalty),
            self.iterations,
            self.residual
        )
    }
}

pub fn cmd_crossing(nu: f64, mu: f64) -> Result<CrossingReport, CliError> {
    for (name, v) in [("nu", nu), ("mu", mu)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let c = sql_crossing(nu, mu)?;
    Ok(CrossingReport {
        nu,
        mu,
        xi_star: c.xi_star,
        penalty: penalty_factor(nu, mu)?,
        iterations: c.iterations,
        bracket: c.bracket,
        residual: c.residual,
    })
}

/// Curve families for the `nu` (mu = 0) or `mu` (nu = 0) figure, followed by
/// the two end points of the rho = 1 threshold line.
pub fn cmd_figure(id: &str) -> Result<Vec<OutputRow>, CliError> {
    let (nu, mu) = match id {
        "nu" => (FIGURE_VALUES.to_vec(), vec![0.0]),
        "mu" => (vec![0.0], FIGURE_VALUES.to_vec()),
        other => return Err(CliError::InvalidConfig(format!("unknown figure `{other}` (use nu or mu)"))),
    };
    let cfg = SweepConfig {
        xi_min: FIGURE_XI.0,
        xi_max: FIGURE_XI.1,
        xi_steps: FIGURE_XI.2,
        nu,
        mu,
        ..SweepConfig::default()
    };
    let mut rows = cmd_sweep(&cfg)?;
    for xi in [FIGURE_XI.0, FIGURE_XI.1] {
        rows.push(OutputRow {
            xi,
            nu: 0.0,
            mu: 0.0,
            g0_per_photon: f64::NAN,
            g1_per_photon: f64::NAN,
            rho: 1.0,
            dphi_min_times_sqrt_ns: 1.0,
            method: SQL_THRESHOLD_METHOD.into(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub phi0: f64,
    pub dphi0_sq: f64,
}

/// `dphi0^2` on `phi0 = -pi + k 2 pi / steps`, `k = 1..=steps`; singular points are `inf`.
pub fn cmd_curve(params: &DimensionlessParams, steps: usize) -> Result<Vec<CurvePoint>, CliError> {
    let p = params.validate()?;
    if p.xi <= 0.0 {
        return Err(CliError::InvalidConfig("curve needs xi > 0".into()));
    }
    if steps < 2 {
        return Err(CliError::InvalidConfig(format!("phi0 steps must be >= 2, got {steps}")));
    }
    let g = compute_g(&p)?;
    (1..=steps)
        .map(|k| {
            let phi0 = if k == steps { PI } else { -PI + 2.0 * PI * k as f64 / steps as f64 };
            let dphi0_sq = match phase_sensitivity_sq_at(&p, &g, phi0) {
                Ok(v) => v,
                Err(AnalyticError::SingularPhase { .. }) => f64::INFINITY,
                Err(e) => return Err(e.into()),
            };
            Ok(CurvePoint { phi0, dphi0_sq })
        })
        .collect()
}

pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!("{},{}\n", format_number(p.phi0), format_number(p.dphi0_sq)));
    }
    out
}

fn curve_to_json(points: &[CurvePoint]) -> String {
    let v: Vec<Value> = points
        .iter()
        .map(|p| serde_json::json!({"phi0": json_number(p.phi0), "dphi0_sq": json_number(p.dphi0_sq)}))
        .collect();
    serde_json::to_string_pretty(&v).expect("curve serializes") + "\n"
}

/// Runs the kernel oracle. A report that misses a tolerance is returned
/// inside [`CliError::OracleFailure`].
pub fn cmd_oracle(params: &DimensionlessParams, cfg: &OracleConfig) -> Result<OracleReport, CliError> {
    let report = run_oracle(params, cfg)?;
    if report.pass {
        Ok(report)
    } else {
        Err(CliError::OracleFailure(Box::new(report)))
    }
}

pub fn report_to_json(report: &OracleReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

// ---------------------------------------------------------------------------
// Argument parsing

#[derive(Debug, Parser)]
#[command(name = "su11", version, about = "Phase sensitivity of the seeded SU(1,1) interferometer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid sweep over xi, nu, mu to CSV.
    Sweep(SweepArgs),
    /// Squeezing parameter where rho crosses 1, and the penalty factor.
    Crossing(CrossingArgs),
    /// Figure data: curve families in nu (mu = 0) or mu (nu = 0).
    Figure(FigureArgs),
    /// Common-phase sensitivity over phi0.
    Curve(CurveArgs),
    /// Kernel oracle comparison report.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON configuration file; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Emit JSON instead of CSV or text.
    #[arg(long)]
    pub json: bool,
    /// Output path (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub xi_min: Option<f64>,
    #[arg(long)]
    pub xi_max: Option<f64>,
    #[arg(long)]
    pub xi_steps: Option<usize>,
    /// Comma-separated nu values.
    #[arg(long, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    /// Comma-separated mu values.
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,
    #[arg(long)]
    pub n_seed: Option<f64>,
    /// closed-form, hypergeometric, quadrature or raw-series.
    #[arg(long)]
    pub method: Option<Method>,
}

#[derive(Debug, Clone, Args)]
pub struct CrossingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `nu` or `mu`.
    pub id: String,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub n_seed: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi_delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub pump_phase_1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub pump_phase_2: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub phi0_steps: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
}

fn read_config(common: &CommonArgs) -> Result<ConfigFile, CliError> {
    match &common.config {
        Some(path) => load_config(path),
        None => Ok(ConfigFile::default()),
    }
}

/// Physical setup first (reduced), then dimensionless params, then flags.
pub fn resolve_params(config: &ConfigFile, args: &ParamArgs) -> Result<DimensionlessParams, CliError> {
    let base = match (&config.physical, &config.params) {
        (Some(ph), _) => Some(
            derive_dimensionless(&ph.setup, ph.pump_phases, &ph.seed)?
                .params
                .with_phases(ph.phi0, ph.phi_delta),
        ),
        (None, Some(p)) => Some(*p),
        (None, None) => None,
    };
    let xi = args
        .xi
        .or(base.map(|b| b.xi))
        .ok_or_else(|| CliError::InvalidConfig("xi is required (flag or config)".into()))?;
    let mut p = base.unwrap_or(DimensionlessParams::new(0.0, 0.0, 0.0, 1.0)?).with_xi(xi);
    if let Some(v) = args.nu {
        p.nu = v;
    }
    if let Some(v) = args.mu {
        p.mu = v;
    }
    if let Some(v) = args.n_seed {
        p.n_seed = v;
    }
    let p = p.with_phases(args.phi0.unwrap_or(p.phi0), args.phi_delta.unwrap_or(p.phi_delta));
    let p = p.with_pump_phases(
        args.pump_phase_1.unwrap_or(p.pump_phase_1),
        args.pump_phase_2.unwrap_or(p.pump_phase_2),
    );
    Ok(p.validate()?)
}

pub fn resolve_sweep(config: &ConfigFile, args: &SweepArgs) -> SweepConfig {
    let s = config.sweep.clone().unwrap_or_default();
    let d = SweepConfig::default();
    SweepConfig {
        xi_min: args.xi_min.or(s.xi_min).unwrap_or(d.xi_min),
        xi_max: args.xi_max.or(s.xi_max).unwrap_or(d.xi_max),
        xi_steps: args.xi_steps.or(s.xi_steps).unwrap_or(d.xi_steps),
        nu: args.nu.clone().or(s.nu).unwrap_or(d.nu),
        mu: args.mu.clone().or(s.mu).unwrap_or(d.mu),
        n_seed: args.n_seed.or(s.n_seed).unwrap_or(d.n_seed),
        method: args.method.or(s.method),
        out: args.common.out.clone().or(s.out),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Executes one parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep(args) => {
            let config = read_config(&args.common)?;
            let cfg = resolve_sweep(&config, &args);
            let rows = cmd_sweep(&cfg)?;
            let text = if args.common.json { rows_to_json(&rows) } else { rows_to_csv(&rows) };
            emit(cfg.out.as_deref(), &text)
        }
        Command::Crossing(args) => {
            read_config(&args.common)?;
            let report = cmd_crossing(args.nu, args.mu)?;
            let text = if args.common.json {
                serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
            } else {
                report.to_text()
            };
            emit(args.common.out.as_deref(), &text)
        }
        Command::Figure(args) => {
            read_config(&args.common)?;
            let rows = cmd_figure(&args.id)?;
            let text = if args.common.json { rows_to_json(&rows) } else { rows_to_csv(&rows) };
            emit(args.common.out.as_deref(), &text)
        }
        Command::Curve(args) => {
            let config = read_config(&args.common)?;
            let p = resolve_params(&config, &args.params)?;
            let c = config.curve.clone().unwrap_or_default();
            let steps = args.phi0_steps.or(c.phi0_steps).unwrap_or(360);
            let points = cmd_curve(&p, steps)?;
            let text = if args.common.json { curve_to_json(&points) } else { curve_to_csv(&points) };
            emit(args.common.out.clone().or(c.out).as_deref(), &text)
        }
        Command::Oracle(args) => {
            let config = read_config(&args.common)?;
            let p = resolve_params(&config, &args.params)?;
            let o = config.oracle.clone().unwrap_or_default();
            let d = OracleConfig::default();
            let cfg = OracleConfig {
                grid: GridSpec {
                    n_points: args.n_points.or(o.n_points).unwrap_or(d.grid.n_points),
                    extent: args.extent.or(o.extent).unwrap_or(d.grid.extent),
                },
                n_max: args.n_max.or(o.n_max).unwrap_or(d.n_max),
                tolerances: d.tolerances,
            };
            let out = args.common.out.clone().or(o.out);
            match cmd_oracle(&p, &cfg) {
                Ok(report) => emit(out.as_deref(), &report_to_json(&report)),
                Err(CliError::OracleFailure(report)) => {
                    // The report is written before signalling the failure.
                    emit(out.as_deref(), &report_to_json(&report))?;
                    Err(CliError::OracleFailure(report))
                }
                Err(e) => Err(e),
            }
        }
    }
}
