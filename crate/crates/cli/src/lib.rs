//! Command-line front end: configuration merging, subcommand dispatch and
//! CSV/JSON rendering. Every command returns its full output as a string so
//! that runs are reproducible and testable without a process boundary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use tpgabor_core::diagnose::{diagnose, reduce_problem, DiagnoseConfig, Reduced};
use tpgabor_core::lattice::{choose_m, default_eps, parse_rational, select_perturbation, PerturbationSeq};
use tpgabor_core::pregramian::{frame_bounds, BoundsConfig, Evidence, Verdict};
use tpgabor_core::tp_matrix::{alternating_witness, build_g, tp_minor_audit};
use tpgabor_core::window::{SpecKind, WindowSpec};
use tpgabor_core::zak::{locate_zero, zak};
use tpgabor_core::zibulski::{xi_grid, zz_matrix};
use tpgabor_core::TpWindow;

/// Exit code for invalid configuration.
pub const EXIT_CONFIG: i32 = 64;
/// Exit code for numerical failures that prevent any verdict.
pub const EXIT_RUNTIME: i32 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] tpgabor_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(tpgabor_core::Error::Parse(_)) => EXIT_CONFIG,
            CliError::Numeric(tpgabor_core::Error::InvalidWindow(_)) => EXIT_CONFIG,
            CliError::Numeric(tpgabor_core::Error::InvalidArgument(_)) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tpgabor", version, about = "Gabor frame diagnostics for totally positive windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full frame diagnosis of one lattice; exit 0 Frame, 1 NotFrame, 2 Inconclusive
    Diagnose(Settings),
    /// Diagnose every alpha of a rational grid at fixed beta (CSV)
    Scan(Settings),
    /// Zak transform on a grid over [0,1)^2 (CSV)
    Zak(Settings),
    /// |det A(xi)| and sigma_min(A(xi)) over [0, 1/p] (CSV)
    Zzdet(Settings),
    /// Alternating witness vector of the perturbed section (CSV)
    Witness(Settings),
    /// Randomized minor audit of the perturbed section (JSON)
    Audit(Settings),
    /// Pre-Gramian frame bound estimates (JSON)
    Bounds(Settings),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A window given by name (`gaussian`, `one_sided_exp`, `sech`,
/// `two_sided_exp`) or as a JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowArg {
    Spec(WindowSpec),
    Name(String),
}

impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.trim_start().starts_with('{') {
            serde_json::from_str(s).map(WindowArg::Spec).map_err(|e| e.to_string())
        } else {
            Ok(WindowArg::Name(s.trim().to_string()))
        }
    }
}

fn named_window(name: &str, param: Option<f64>) -> Result<WindowSpec> {
    let kind = match name {
        "gaussian" => SpecKind::Gaussian { gamma: param.unwrap_or(std::f64::consts::PI) },
        "one_sided_exp" => SpecKind::OneSidedExp { gamma: param.unwrap_or(1.0) },
        "two_sided_exp" => SpecKind::TwoSidedExp { lambda: param.unwrap_or(1.0) },
        "sech" | "hyperbolic_secant" => SpecKind::HyperbolicSecant { a: param.unwrap_or(1.0) },
        other => return Err(CliError::Config(format!("unknown window `{other}`"))),
    };
    Ok(WindowSpec { kind, scale: None })
}

/// Options shared by all subcommands. Each may also be given in the JSON
/// file passed with `--config`; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// JSON configuration file
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// worker threads (falls back to TPGABOR_JOBS)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// write output here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// window name or JSON spec
    #[arg(long)]
    pub window: Option<WindowArg>,
    /// parameter of a named window (gamma, a or lambda)
    #[arg(long)]
    pub param: Option<f64>,
    /// time step, "P/Q" or decimal
    #[arg(long)]
    pub alpha: Option<String>,
    /// frequency step, "P/Q" or decimal
    #[arg(long)]
    pub beta: Option<String>,
    /// scan grid: "start:stop:step" or a comma list; empty for no points
    #[arg(long)]
    pub alphas: Option<String>,
    /// base point x of the perturbation
    #[arg(long)]
    pub x: Option<f64>,
    /// section half-width for witness and audit
    #[arg(long)]
    pub k: Option<usize>,
    /// largest minor order for audit
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// grid size per axis for zak, or xi intervals for zzdet
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// period of the Zak transform for zak
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
    #[arg(long)]
    pub zero_tol: Option<f64>,
    #[arg(long)]
    pub sigma_tol: Option<f64>,
    #[arg(long)]
    pub x_grid_n: Option<usize>,
    #[arg(long)]
    pub xi_grid_n: Option<usize>,
    #[arg(long)]
    pub zero_grid_n: Option<usize>,
    /// interior half-widths of the truncation ladder, comma separated
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<usize>>,
    #[arg(long)]
    pub eps: Option<f64>,
}

macro_rules! merge {
    ($cli:expr, $file:expr; $($f:ident),*) => {
        Settings { config: None, $($f: $cli.$f.or($file.$f),)* }
    };
}

impl Settings {
    /// Overlay the flags on the config file, if any.
    pub fn merged(self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => Settings::default(),
        };
        Ok(merge!(self, file; jobs, output, format, window, param, alpha, beta, alphas, x, k, n_max,
            trials, seed, grid_n, period, tail_tol, zero_tol, sigma_tol, x_grid_n, xi_grid_n,
            zero_grid_n, ladder, eps))
    }
}

fn read_config(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn jobs_from_env() -> Result<Option<usize>> {
    match std::env::var("TPGABOR_JOBS") {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map(Some).map_err(|_| CliError::Config(format!("TPGABOR_JOBS = `{v}` is not a thread count")))
        }
        _ => Ok(None),
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub window: WindowSpec,
    pub alpha: Ratio<i64>,
    pub beta: Ratio<i64>,
    pub alphas: Vec<Ratio<i64>>,
    pub x: f64,
    pub k: usize,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub grid_n: usize,
    pub period: f64,
    pub diag: DiagnoseConfig,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// notes about rationalized decimal inputs
    pub warnings: Vec<String>,
}

fn rational(label: &str, s: &str, warnings: &mut Vec<String>) -> Result<Ratio<i64>> {
    let (r, warned) = parse_rational(s)?;
    if warned {
        warnings.push(format!("warning: {label} = {s} rationalized to {r}"));
    }
    if r <= Ratio::from_integer(0) {
        return Err(CliError::Config(format!("{label} = {s} must be positive")));
    }
    Ok(r)
}

fn parse_alphas(spec: &str, warnings: &mut Vec<String>) -> Result<Vec<Ratio<i64>>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!("alphas range `{spec}` must be start:stop:step")));
        }
        let start = rational("alpha start", parts[0], warnings)?;
        let stop = rational("alpha stop", parts[1], warnings)?;
        let step = rational("alpha step", parts[2], warnings)?;
        let mut out = Vec::new();
        let mut a = start;
        while a <= stop {
            out.push(a);
            a += step;
        }
        Ok(out)
    } else {
        spec.split(',').map(|s| rational("alpha", s, warnings)).collect()
    }
}

impl RunConfig {
    pub fn resolve(settings: Settings) -> Result<RunConfig> {
        let s = settings.merged()?;
        let mut warnings = Vec::new();
        let window = match s.window.unwrap_or(WindowArg::Name("gaussian".into())) {
            WindowArg::Spec(spec) => spec,
            WindowArg::Name(name) => named_window(&name, s.param)?,
        };
        window.build()?;
        let alpha = rational("alpha", s.alpha.as_deref().unwrap_or("1/2"), &mut warnings)?;
        let beta = rational("beta", s.beta.as_deref().unwrap_or("1"), &mut warnings)?;
        let alphas = parse_alphas(s.alphas.as_deref().unwrap_or(""), &mut warnings)?;
        let two = Ratio::from_integer(2);
        for a in alphas.iter().chain(std::iter::once(&alpha)) {
            if a * beta > two {
                return Err(CliError::Config(format!("alpha*beta = {} outside (0, 2]", a * beta)));
            }
        }

        let defaults = DiagnoseConfig::default();
        let bounds = BoundsConfig {
            x_grid_n: s.x_grid_n.unwrap_or(defaults.bounds.x_grid_n),
            ladder: s.ladder.unwrap_or(defaults.bounds.ladder.clone()),
            tail_tol: s.tail_tol.unwrap_or(defaults.bounds.tail_tol),
            sigma_tol: s.sigma_tol.unwrap_or(defaults.bounds.sigma_tol),
        };
        let diag = DiagnoseConfig {
            bounds,
            zero_grid_n: s.zero_grid_n.unwrap_or(defaults.zero_grid_n),
            zero_tol: s.zero_tol.unwrap_or(defaults.zero_tol),
            xi_grid_n: s.xi_grid_n.unwrap_or(defaults.xi_grid_n),
            witness_k: s.k.unwrap_or(defaults.witness_k),
            eps: s.eps,
        };
        diag.validate()?;

        let cfg = RunConfig {
            window,
            alpha,
            beta,
            alphas,
            x: s.x.unwrap_or(0.0),
            k: s.k.unwrap_or(16),
            n_max: s.n_max.unwrap_or(6),
            trials: s.trials.unwrap_or(10_000),
            seed: s.seed.unwrap_or(0),
            grid_n: s.grid_n.unwrap_or(128),
            period: s.period.unwrap_or(1.0),
            diag,
            format: s.format,
            output: s.output,
            jobs: match s.jobs {
                Some(j) => Some(j),
                None => jobs_from_env()?,
            },
            warnings,
        };
        if cfg.grid_n == 0 || cfg.k == 0 || cfg.trials == 0 || cfg.jobs == Some(0) {
            return Err(CliError::Config("grid_n, k, trials and jobs must be positive".into()));
        }
        if !(1..=8).contains(&cfg.n_max) {
            return Err(CliError::Config(format!("n_max = {} must be in 1..=8", cfg.n_max)));
        }
        if !cfg.x.is_finite() {
            return Err(CliError::Config("x must be finite".into()));
        }
        Ok(cfg)
    }

    fn build_window(&self) -> Result<TpWindow> {
        Ok(self.window.build()?)
    }
}

/// Text written to the output, and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub exit_code: i32,
}

fn fmt(v: f64) -> String {
    format!("{v:.6e}")
}

fn csv_header(cmd: &str, columns: &str) -> String {
    format!("# tpgabor-{cmd} v1\n{columns}\n")
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Window, lattice and perturbation at `cfg.x` on the reduced lattice.
fn perturbed(cfg: &RunConfig) -> Result<(Reduced, PerturbationSeq)> {
    let red = reduce_problem(&cfg.build_window()?, cfg.alpha, cfg.beta)?;
    red.lattice.require_subcritical()?;
    let zero = locate_zero(&red.window, cfg.diag.zero_grid_n, cfg.diag.zero_tol)?;
    let eps = cfg.diag.eps.unwrap_or_else(|| default_eps(&red.lattice));
    let pert = select_perturbation(&red.lattice, cfg.x, zero.x0, eps, choose_m(zero.x0))?;
    Ok((red, pert))
}

pub fn cmd_diagnose(cfg: &RunConfig) -> Result<Outcome> {
    let d = diagnose(&cfg.build_window()?, cfg.alpha, cfg.beta, &cfg.diag)?;
    Ok(Outcome { output: json(&d), exit_code: d.verdict.exit_code() })
}

#[derive(Serialize)]
struct BoundsReport {
    verdict: Verdict,
    #[serde(rename = "A_est")]
    a_est: f64,
    #[serde(rename = "B_est")]
    b_est: f64,
    worst_x: f64,
    ladder: Vec<usize>,
    ladder_trace: Vec<f64>,
}

pub fn cmd_bounds(cfg: &RunConfig) -> Result<Outcome> {
    let red = reduce_problem(&cfg.build_window()?, cfg.alpha, cfg.beta)?;
    let d = frame_bounds(&red.window, &red.lattice, &cfg.diag.bounds)?;
    let report = BoundsReport {
        verdict: d.verdict,
        a_est: d.lower_bound_est,
        b_est: d.upper_bound_est,
        worst_x: d.worst_x,
        ladder: d.ladder,
        ladder_trace: d.ladder_trace,
    };
    Ok(Outcome { output: json(&report), exit_code: report.verdict.exit_code() })
}

/// One row of the phase diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub alpha: String,
    pub beta: String,
    pub alphabeta: f64,
    /// verdict, or `Error` when the point could not be diagnosed
    pub verdict: String,
    pub a_est: f64,
    pub min_sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn scan_rows(cfg: &RunConfig) -> Result<Vec<ScanRow>> {
    let w = cfg.build_window()?;
    let rows = cfg
        .alphas
        .par_iter()
        .map(|&alpha| {
            let ab = alpha * cfg.beta;
            let alphabeta = *ab.numer() as f64 / *ab.denom() as f64;
            let mut row = ScanRow {
                alpha: alpha.to_string(),
                beta: cfg.beta.to_string(),
                alphabeta,
                verdict: "Error".into(),
                a_est: f64::NAN,
                min_sigma: f64::NAN,
                error: None,
            };
            match diagnose(&w, alpha, cfg.beta, &cfg.diag) {
                Ok(d) => {
                    row.verdict = d.verdict.to_string();
                    row.a_est = d.lower_bound_est;
                    row.min_sigma = d
                        .evidence
                        .iter()
                        .find_map(|e| match e {
                            Evidence::Injectivity { min_sigma, .. } => Some(*min_sigma),
                            _ => None,
                        })
                        .unwrap_or(f64::NAN);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    Ok(rows)
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<(Outcome, Vec<String>)> {
    let rows = scan_rows(cfg)?;
    let errors: Vec<String> = rows.iter().filter_map(|r| r.error.as_ref().map(|e| format!("alpha = {}: {e}", r.alpha))).collect();
    let output = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out = csv_header("scan", "alpha,beta,alphabeta,verdict,A_est,min_sigma");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{},{},{}", r.alpha, r.beta, fmt(r.alphabeta), r.verdict, fmt(r.a_est), fmt(r.min_sigma));
            }
            out
        }
    };
    Ok((Outcome { output, exit_code: 0 }, errors))
}

pub fn cmd_zak(cfg: &RunConfig) -> Result<Outcome> {
    let w = cfg.build_window()?;
    let n = cfg.grid_n;
    let tol = cfg.diag.bounds.tail_tol;
    let rows: Vec<String> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (x, xi) = ((idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64);
            let z = zak(&w, cfg.period, x, xi, tol)?;
            Ok(format!("{},{},{},{},{}", fmt(x), fmt(xi), fmt(z.re), fmt(z.im), fmt(z.abs())))
        })
        .collect::<std::result::Result<_, tpgabor_core::Error>>()?;
    let mut out = csv_header("zak", "x,xi,re,im,abs");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(Outcome { output: out, exit_code: 0 })
}

pub fn cmd_zzdet(cfg: &RunConfig) -> Result<Outcome> {
    let (red, pert) = perturbed(cfg)?;
    let tol = cfg.diag.bounds.tail_tol;
    let rows: Vec<String> = xi_grid(&red.lattice, cfg.grid_n)
        .par_iter()
        .map(|&xi| {
            let a = zz_matrix(&red.window, &red.lattice, &pert, xi, tol)?;
            Ok(format!("{},{},{}", fmt(xi), fmt(a.det().norm()), fmt(a.sigma_min())))
        })
        .collect::<std::result::Result<_, tpgabor_core::Error>>()?;
    let mut out = csv_header("zzdet", "xi,abs_det,sigma_min");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(Outcome { output: out, exit_code: 0 })
}

pub fn cmd_witness(cfg: &RunConfig) -> Result<Outcome> {
    let (red, pert) = perturbed(cfg)?;
    let wit = alternating_witness(&red.window, &pert, cfg.k, cfg.diag.bounds.tail_tol)?;
    let output = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => json(&wit),
        Format::Csv => {
            let mut out = csv_header("witness", "k,delta,u,zak_half");
            let _ = writeln!(
                out,
                "# nu={} sign_pattern_ok={} max_identity_deviation={}",
                fmt(wit.nu),
                wit.sign_pattern_ok,
                fmt(wit.max_identity_deviation)
            );
            for (i, k) in wit.ks.iter().enumerate() {
                let _ = writeln!(out, "{k},{},{},{}", fmt(pert.delta(*k)), fmt(wit.u[i]), fmt(wit.zak_half[i]));
            }
            out
        }
    };
    Ok(Outcome { output, exit_code: 0 })
}

pub fn cmd_audit(cfg: &RunConfig) -> Result<Outcome> {
    let (red, pert) = perturbed(cfg)?;
    let section = build_g(&red.window, &pert, cfg.k);
    let report = tp_minor_audit(&section, cfg.n_max, cfg.trials, cfg.seed)?;
    let exit_code = if report.pass { 0 } else { 1 };
    Ok(Outcome { output: json(&report), exit_code })
}

/// Result of a full invocation: output text, messages for stderr, exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

fn settings(cmd: &Command) -> &Settings {
    match cmd {
        Command::Diagnose(s)
        | Command::Scan(s)
        | Command::Zak(s)
        | Command::Zzdet(s)
        | Command::Witness(s)
        | Command::Audit(s)
        | Command::Bounds(s) => s,
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<(Outcome, Vec<String>)> {
    let plain = |o: Result<Outcome>| o.map(|o| (o, Vec::new()));
    match cmd {
        Command::Diagnose(_) => plain(cmd_diagnose(cfg)),
        Command::Scan(_) => cmd_scan(cfg),
        Command::Zak(_) => plain(cmd_zak(cfg)),
        Command::Zzdet(_) => plain(cmd_zzdet(cfg)),
        Command::Witness(_) => plain(cmd_witness(cfg)),
        Command::Audit(_) => plain(cmd_audit(cfg)),
        Command::Bounds(_) => plain(cmd_bounds(cfg)),
    }
}

/// Resolve the configuration, run the command in a pool of `--jobs`
/// workers and write the output file if one was requested.
pub fn run(cli: Cli) -> Run {
    let mut stderr = String::new();
    let cfg = match RunConfig::resolve(settings(&cli.command).clone()) {
        Ok(cfg) => cfg,
        Err(e) => {
            return Run { stdout: String::new(), stderr: format!("error: {e}\n"), exit_code: e.exit_code() };
        }
    };
    for w in &cfg.warnings {
        let _ = writeln!(stderr, "{w}");
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        builder = builder.num_threads(jobs);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            return Run { stdout: String::new(), stderr: format!("error: {e}\n"), exit_code: EXIT_CONFIG };
        }
    };
    let result = pool.install(|| dispatch(&cli.command, &cfg)).and_then(|(outcome, notes)| {
        for n in notes {
            let _ = writeln!(stderr, "error: {n}");
        }
        match &cfg.output {
            Some(path) => {
                std::fs::write(path, &outcome.output)?;
                Ok(Outcome { output: String::new(), exit_code: outcome.exit_code })
            }
            None => Ok(outcome),
        }
    });
    match result {
        Ok(o) => Run { stdout: o.output, stderr, exit_code: o.exit_code },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            Run { stdout: String::new(), stderr, exit_code: e.exit_code() }
        }
    }
}

/// Convenience for tests: run from an argument list.
pub fn run_args<I, T>(args: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => Run { stdout: String::new(), stderr: e.to_string(), exit_code: EXIT_CONFIG },
    }
}
