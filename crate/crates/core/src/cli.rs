//! The `ctlasso` command-line front end.
//!
//! Subcommands: `fit`, `path`, `cv`, `simulate`, `diagnose`. Numeric CSV
//! output uses 17 significant digits; JSON output carries a
//! `schema_version` field. Failures print one JSON line on stderr and exit
//! with 2 (bad input) or 3 (numerical failure).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::covariance::{apply_threshold, sample_covariance, standardize, CovMatrix, StandardizedDesign, ThresholdRule};
use crate::diagnostics::{diagnose, lemma1_certificate, DiagnosticsReport};
use crate::error::Error;
use crate::estimators::{EstimatorSpec, Method, TuningGrids};
use crate::model_selection::{grid_search_cv, CvOptions, CvSelection, CvVariant};
use crate::path::{PathOptions, SolutionPath};
use crate::simulation::{make_sigma, run_experiment, ExperimentConfig, ExperimentResult, SigmaSpec, SimulationDesign, Tuning};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "CT_LASSO_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed arguments, files or configurations.
    Input,
    /// The numerical routines failed on valid input.
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Input,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => 2,
            ErrorKind::Numerical => 3,
        }
    }

    /// The single-line JSON record printed on stderr.
    pub fn to_line(&self) -> String {
        let kind = match self.kind {
            ErrorKind::Input => "input",
            ErrorKind::Numerical => "numerical",
        };
        json!({"error": {"kind": kind, "code": self.exit_code(), "message": self.message}}).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::ConstantColumn(_)
            | Error::DimensionMismatch { .. }
            | Error::TooFewSamples { .. }
            | Error::EmptySubset
            | Error::IndexOutOfRange { .. }
            | Error::InvalidParameter(_)
            | Error::DegenerateTruth { .. }
            | Error::InvalidRho(_)
            | Error::NotPsd(_) => ErrorKind::Input,
            Error::LambdaBelowPath { .. }
            | Error::SingularActiveSubmatrix { .. }
            | Error::NotConverged { .. }
            | Error::IndefiniteMatrix(_)
            | Error::ZeroInitialEstimate(_)
            | Error::CholeskyFailure(_)
            | Error::SingularSS => ErrorKind::Numerical,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "ctlasso", version, about = "Covariance-thresholded lasso paths, tuning and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit at a given λ, or tune by cross-validation when --lambda is absent.
    Fit(FitArgs),
    /// Export the full solution path.
    Path(PathArgs),
    /// Cross-validate over the λ grid and the method's parameter grids.
    Cv(CvArgs),
    /// Run a replicated simulation experiment.
    Simulate(SimulateArgs),
    /// Irrepresentable indices, sparsity degrees and the sign-recovery certificate.
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// CSV file with a header row; every column must be numeric.
    #[arg(long, short)]
    input: PathBuf,
    /// Response column, by header name or 0-based position.
    #[arg(long, short)]
    response: String,
}

#[derive(Args, Debug, Clone)]
struct MethodArgs {
    /// lasso, ust, adaptive-lasso, elastic-net, ct-hard, ct-soft, ct-adapt.
    #[arg(long, short, default_value = "ct-soft")]
    method: String,
    /// Threshold ν for the ct-* methods.
    #[arg(long)]
    nu: Option<f64>,
    /// Exponent γ for ct-adapt and the adaptive lasso.
    #[arg(long)]
    gamma: Option<f64>,
    /// λ2 for the elastic net.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Cap on path steps (default 8·min(n, p) + p).
    #[arg(long)]
    max_steps: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Comma-separated ν grid.
    #[arg(long, value_delimiter = ',')]
    nu_grid: Option<Vec<f64>>,
    /// Comma-separated γ grid.
    #[arg(long, value_delimiter = ',')]
    gamma_grid: Option<Vec<f64>>,
    /// Comma-separated λ2 grid.
    #[arg(long, value_delimiter = ',')]
    lambda2_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    cv_folds: usize,
    /// minus, zero, plus or auto.
    #[arg(long, default_value = "auto")]
    cv_variant: String,
    /// Number of λ grid points.
    #[arg(long, default_value_t = 100)]
    n_lambda: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Penalty level on the standardized scale.
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// intro, example1, example2 or example3 (ex1..ex3 also accepted).
    #[arg(long)]
    preset: Option<String>,
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample sizes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// best or cv.
    #[arg(long)]
    tuning: Option<String>,
    #[arg(long, value_delimiter = ',')]
    nu_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gamma_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda2_grid: Option<Vec<f64>>,
    #[arg(long)]
    cv_folds: Option<usize>,
    #[arg(long)]
    cv_variant: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Generate the grouped design by its latent-factor recipe.
    #[arg(long)]
    latent: bool,
    /// Also write per-replication results as JSON to this file.
    #[arg(long)]
    replications_out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Use a preset's covariance and coefficients.
    #[arg(long)]
    preset: Option<String>,
    /// Population covariance: identity, ar:RHO, constant:RHO or grouped.
    #[arg(long)]
    sigma: Option<String>,
    /// Dimension for --sigma.
    #[arg(long)]
    p: Option<usize>,
    /// CSV data instead of a population covariance.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, short)]
    response: Option<String>,
    /// True support as 0-based indices and ranges, e.g. `0-9,14`.
    #[arg(long)]
    support: Option<String>,
    /// Coefficients on the support (signs feed the irrepresentable index).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    /// Sample size for the recommended threshold (defaults to the data's n, else 100).
    #[arg(long)]
    n: Option<usize>,
    /// Threshold applied to the sample covariance when diagnosing data.
    #[command(flatten)]
    method: MethodArgs,
    /// Also evaluate the certificate at this λ (data mode, with the
    /// residual of the least-squares fit on the support as noise).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

/// Entry point for the binary: runs, prints errors, returns the exit code.
pub fn main() -> i32 {
    let args: Vec<OsString> = std::env::args_os().collect();
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match configure_threads().and_then(|_| run(args, &mut lock)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("{}", e.to_line());
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a second initialization (e.g. in tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one invocation. Results go to `--out` or to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                write!(stdout, "{}", e.render())?;
                return Ok(());
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::input(first.trim_start_matches("error: ").to_string()));
        }
    };
    match cli.command {
        Command::Fit(a) => cmd_fit(a, stdout),
        Command::Path(a) => cmd_path(a, stdout),
        Command::Cv(a) => cmd_cv(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Diagnose(a) => cmd_diagnose(a, stdout),
    }
}

/// Predictor matrix, response and predictor names from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
}

pub fn read_csv(path: &Path, response: &str) -> CliResult<CsvData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let resp = headers
        .iter()
        .position(|h| h == response)
        .or_else(|| response.parse::<usize>().ok().filter(|&i| i < headers.len()))
        .ok_or_else(|| CliError::input(format!("response column '{response}' not found in {}", path.display())))?;
    let mut rows: Vec<f64> = Vec::new();
    let mut y = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        // header is line 1
        let line = r + 2;
        let rec = rec.map_err(|e| CliError::input(format!("{}: line {line}: {e}", path.display())))?;
        if rec.len() != headers.len() {
            return Err(CliError::input(format!(
                "{}: line {line}: expected {} fields, found {}",
                path.display(),
                headers.len(),
                rec.len()
            )));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                CliError::input(format!(
                    "{}: line {line}, column '{}': '{field}' is not a finite number",
                    path.display(),
                    headers[c]
                ))
            })?;
            if c == resp {
                y.push(v);
            } else {
                rows.push(v);
            }
        }
    }
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(c, _)| *c != resp)
        .map(|(_, h)| h.clone())
        .collect();
    if names.is_empty() {
        return Err(CliError::input("no predictor columns"));
    }
    let n = y.len();
    Ok(CsvData {
        x: DMatrix::from_row_slice(n, names.len(), &rows),
        names,
        y,
    })
}

fn load(data: &DataArgs) -> CliResult<(CsvData, StandardizedDesign)> {
    let csv = read_csv(&data.input, &data.response)?;
    let design = standardize(&csv.x, &csv.y).map_err(|e| match e {
        Error::ConstantColumn(j) => CliError::input(format!("predictor column '{}' is constant", csv.names[j])),
        other => other.into(),
    })?;
    Ok((csv, design))
}

fn parse_method(m: &MethodArgs) -> CliResult<EstimatorSpec> {
    let base: EstimatorSpec = m.method.parse()?;
    let nu = m.nu.unwrap_or(0.0);
    let spec = match base.method {
        Method::Lasso | Method::Ust => base,
        Method::AdaptiveLasso => EstimatorSpec::adaptive_lasso(m.gamma.unwrap_or(1.0)),
        Method::ElasticNet => EstimatorSpec::elastic_net(m.lambda2.unwrap_or(0.0)),
        Method::CtLasso => {
            let mut rule = base.rule;
            rule.nu = nu;
            if m.gamma.is_some() {
                rule.gamma = m.gamma.unwrap_or(0.0);
            } else if rule.kind == crate::covariance::ThresholdKind::Adaptive {
                rule.gamma = 1.0;
            }
            rule.validate()?;
            EstimatorSpec::ct_lasso(rule)
        }
    };
    Ok(spec)
}

fn path_options(m: &MethodArgs) -> PathOptions {
    PathOptions {
        max_steps: m.max_steps,
        ..PathOptions::default()
    }
}

fn grids_for(m: &MethodArgs, g: &GridArgs) -> TuningGrids {
    let d = TuningGrids::default();
    TuningGrids {
        nu: g.nu_grid.clone().or(m.nu.map(|v| vec![v])).unwrap_or(d.nu),
        gamma: g.gamma_grid.clone().or(m.gamma.map(|v| vec![v])).unwrap_or(d.gamma),
        lambda2: g.lambda2_grid.clone().or(m.lambda2.map(|v| vec![v])).unwrap_or(d.lambda2),
    }
}

fn cv_options(m: &MethodArgs, g: &GridArgs) -> CliResult<CvOptions> {
    if g.n_lambda == 0 {
        return Err(CliError::input("--n-lambda must be positive"));
    }
    Ok(CvOptions {
        k: g.cv_folds,
        variant: g.cv_variant.parse()?,
        seed: g.seed,
        n_lambda: g.n_lambda,
        path: path_options(m),
        ..CvOptions::default()
    })
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, body: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, body).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => Ok(stdout.write_all(body.as_bytes())?),
    }
}

fn to_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Full round-trip precision.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn cmd_fit(a: FitArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (csv, design) = load(&a.data)?;
    let (spec, lambda, path, tuning) = match a.lambda {
        Some(lam) => {
            if !(lam >= 0.0 && lam.is_finite()) {
                return Err(CliError::input(format!("--lambda must be a non-negative number, got {lam}")));
            }
            let spec = parse_method(&a.method)?;
            let path = spec.fit_path(&design, &path_options(&a.method))?;
            (spec, lam, path, json!({"source": "user"}))
        }
        None => {
            let base = parse_method(&a.method)?;
            let sel = grid_search_cv(&design, &base, &grids_for(&a.method, &a.grid), &cv_options(&a.method, &a.grid)?)?;
            let path = sel.spec_hat.fit_path(&design, &path_options(&a.method))?;
            let meta = json!({
                "source": "cross_validation",
                "variant": sel.variant_used.to_string(),
                "folds": sel.curve.folds,
                "seed": a.grid.seed,
                "min_error": sel.diagnostics.min_error,
                "selected_error": sel.diagnostics.selected_error,
            });
            (sel.spec_hat, sel.lambda_hat, path, meta)
        }
    };
    let clamped = lambda < path.lambda_end();
    let beta = path.coefficients_at(lambda, true)?;
    let (intercept, slopes) = design.to_original_scale(&beta);
    let body = match a.output.format {
        Format::Csv => {
            let mut s = csv_line(&["term".into(), "standardized".into(), "original".into()]);
            s += &csv_line(&["(intercept)".into(), num(0.0), num(intercept)]);
            for (j, name) in csv.names.iter().enumerate() {
                s += &csv_line(&[name.clone(), num(beta[j]), num(slopes[j])]);
            }
            s
        }
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "fit",
            "method": spec.name(),
            "parameters": spec.describe(),
            "spec": spec,
            "lambda": lambda,
            "lambda_max": path.lambda_max(),
            "clamped_to_path_end": clamped,
            "termination": path.termination,
            "tuning": tuning,
            "intercept": intercept,
            "coefficients": csv.names.iter().enumerate().map(|(j, name)| json!({
                "name": name,
                "standardized": beta[j],
                "original": slopes[j],
            })).collect::<Vec<_>>(),
        })),
    };
    emit(&a.output.out, stdout, &body)
}

/// JSON envelope for an exported path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathDocument {
    pub schema_version: u32,
    pub method: String,
    pub names: Vec<String>,
    pub path: SolutionPath,
}

fn cmd_path(a: PathArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (csv, design) = load(&a.data)?;
    let spec = parse_method(&a.method)?;
    let path = match spec.fit_path(&design, &path_options(&a.method)) {
        Ok(p) => p,
        // export what was computed, then report the failure
        Err(Error::SingularActiveSubmatrix { path }) => {
            let partial = path_body(&csv, &spec, &path, a.output.format);
            emit(&a.output.out, stdout, &partial)?;
            return Err(Error::SingularActiveSubmatrix { path }.into());
        }
        Err(e) => return Err(e.into()),
    };
    emit(&a.output.out, stdout, &path_body(&csv, &spec, &path, a.output.format))
}

fn path_body(csv: &CsvData, spec: &EstimatorSpec, path: &SolutionPath, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut header = vec!["lambda".to_string()];
            header.extend(csv.names.iter().cloned());
            let mut s = csv_line(&header);
            for bp in &path.breakpoints {
                let mut row = vec![num(bp.lambda)];
                row.extend(bp.beta.iter().map(|b| num(*b)));
                s += &csv_line(&row);
            }
            s
        }
        Format::Json => {
            let doc = PathDocument {
                schema_version: SCHEMA_VERSION,
                method: spec.name().to_string(),
                names: csv.names.clone(),
                path: path.clone(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
            s.push('\n');
            s
        }
    }
}

fn cmd_cv(a: CvArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (_, design) = load(&a.data)?;
    let base = parse_method(&a.method)?;
    let sel: CvSelection = grid_search_cv(&design, &base, &grids_for(&a.method, &a.grid), &cv_options(&a.method, &a.grid)?)?;
    let body = match a.output.format {
        Format::Csv => {
            let mut s = csv_line(&["lambda".into(), "mean_error".into(), "sd_error".into(), "selected".into()]);
            for (i, lam) in sel.curve.lambdas.iter().enumerate() {
                s += &csv_line(&[
                    num(*lam),
                    num(sel.curve.mean_error[i]),
                    num(sel.curve.sd_error[i]),
                    u8::from(i == sel.diagnostics.index).to_string(),
                ]);
            }
            s
        }
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "cv",
            "method": sel.spec_hat.name(),
            "parameters": sel.spec_hat.describe(),
            "seed": a.grid.seed,
            "selection": sel,
        })),
    };
    emit(&a.output.out, stdout, &body)
}

/// Experiment settings read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub preset: Option<String>,
    pub n: Option<Vec<usize>>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<String>>,
    pub tuning: Option<String>,
    pub nu_grid: Option<Vec<f64>>,
    pub gamma_grid: Option<Vec<f64>>,
    pub lambda2_grid: Option<Vec<f64>>,
    pub cv_folds: Option<usize>,
    pub cv_variant: Option<String>,
    pub latent_grouped: Option<bool>,
    pub design: Option<CustomDesign>,
}

/// A design that is not one of the presets.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomDesign {
    pub beta: Vec<f64>,
    pub sigma: SigmaSpec,
    pub noise: f64,
    #[serde(default = "custom_name")]
    pub name: String,
}

fn custom_name() -> String {
    "custom".to_string()
}

fn parse_tuning(s: &str) -> CliResult<Tuning> {
    match s.to_ascii_lowercase().as_str() {
        "best" | "best-possible" | "best_possible" => Ok(Tuning::BestPossible),
        "cv" | "cross-validation" | "cross_validation" => Ok(Tuning::CrossValidation),
        other => Err(CliError::input(format!("unknown tuning '{other}' (expected best or cv)"))),
    }
}

/// Builds the experiment list for `simulate` from flags and config.
fn simulate_plan(a: &SimulateArgs) -> CliResult<Vec<ExperimentConfig>> {
    let cfg: SimulateConfig = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::input(format!("{}: {}", p.display(), e.to_string().replace('\n', " "))))?
        }
        None => SimulateConfig::default(),
    };
    let preset = a.preset.clone().or(cfg.preset.clone());
    let ns = a.n_grid.clone().or(cfg.n.clone()).unwrap_or_else(|| vec![20]);
    if ns.is_empty() {
        return Err(CliError::input("empty sample-size grid"));
    }
    let base_design = |n: usize| -> CliResult<SimulationDesign> {
        match (&preset, &cfg.design) {
            (Some(name), _) => Ok(SimulationDesign::preset(name, n)?),
            (None, Some(c)) => Ok(SimulationDesign {
                name: c.name.clone(),
                p: c.beta.len(),
                n,
                beta_star: c.beta.clone(),
                sigma_spec: c.sigma,
                sigma_noise: c.noise,
                replications: 200,
                seed: 0,
                latent_grouped: false,
            }),
            (None, None) => Err(CliError::input("simulate needs --preset or a config with a preset or [design] table")),
        }
    };
    let methods: Vec<EstimatorSpec> = a
        .methods
        .clone()
        .or(cfg.methods.clone())
        .unwrap_or_else(|| vec!["lasso".into(), "ct-soft".into()])
        .iter()
        .map(|m| m.parse::<EstimatorSpec>().map_err(CliError::from))
        .collect::<CliResult<_>>()?;
    if methods.is_empty() {
        return Err(CliError::input("no methods given"));
    }
    let tuning = parse_tuning(a.tuning.as_deref().or(cfg.tuning.as_deref()).unwrap_or("best"))?;
    let d = TuningGrids::default();
    let grids = TuningGrids {
        nu: a.nu_grid.clone().or(cfg.nu_grid.clone()).unwrap_or(d.nu),
        gamma: a.gamma_grid.clone().or(cfg.gamma_grid.clone()).unwrap_or(d.gamma),
        lambda2: a.lambda2_grid.clone().or(cfg.lambda2_grid.clone()).unwrap_or(d.lambda2),
    };
    let cv = CvOptions {
        k: a.cv_folds.or(cfg.cv_folds).unwrap_or(5),
        variant: a.cv_variant.as_deref().or(cfg.cv_variant.as_deref()).unwrap_or("auto").parse::<CvVariant>()?,
        ..CvOptions::default()
    };
    ns.iter()
        .map(|&n| {
            let mut design = base_design(n)?;
            design.replications = a.reps.or(cfg.replications).unwrap_or(design.replications);
            design.seed = a.seed.or(cfg.seed).unwrap_or(0);
            design.latent_grouped = a.latent || cfg.latent_grouped.unwrap_or(false);
            design.validate()?;
            let mut exp = ExperimentConfig::new(design, methods.clone(), tuning);
            exp.grids = grids.clone();
            exp.cv = cv.clone();
            Ok(exp)
        })
        .collect()
}

fn cmd_simulate(a: SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let plan = simulate_plan(&a)?;
    let results: Vec<ExperimentResult> = plan.iter().map(run_experiment).collect::<Result<_, _>>()?;
    let tuning_name = |t: Tuning| match t {
        Tuning::BestPossible => "best",
        Tuning::CrossValidation => "cv",
    };
    let body = match a.output.format {
        Format::Csv => {
            let mut s = csv_line(
                &[
                    "design", "n", "tuning", "method", "replications", "median_g", "se_median_g", "median_rpe",
                    "se_median_rpe", "median_tp", "median_fp", "median_sensitivity", "median_specificity",
                    "median_selected",
                ]
                .map(String::from),
            );
            for r in &results {
                for m in &r.summaries {
                    s += &csv_line(&[
                        r.design.name.clone(),
                        r.design.n.to_string(),
                        tuning_name(r.tuning).to_string(),
                        m.method.clone(),
                        m.replications.to_string(),
                        num(m.median_g),
                        num(m.se_median_g),
                        num(m.median_rpe),
                        num(m.se_median_rpe),
                        num(m.median_tp),
                        num(m.median_fp),
                        num(m.median_sensitivity),
                        num(m.median_specificity),
                        num(m.median_selected),
                    ]);
                }
            }
            s
        }
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "simulate",
            "experiments": results.iter().map(|r| json!({
                "design": r.design,
                "tuning": r.tuning,
                "summaries": r.summaries,
            })).collect::<Vec<_>>(),
        })),
    };
    if let Some(p) = &a.replications_out {
        let detail = to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "simulate",
            "experiments": results,
        }));
        fs::write(p, detail).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
    }
    emit(&a.output.out, stdout, &body)
}

/// Parses `0-9,14` into sorted unique indices.
pub fn parse_index_set(s: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let bad = || CliError::input(format!("invalid index or range '{part}' in support"));
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                if hi < lo {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(CliError::input("support is empty"));
    }
    Ok(out)
}

fn parse_sigma(s: &str) -> CliResult<SigmaSpec> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, v)) => (k, Some(v)),
        None => (s, None),
    };
    let rho = || -> CliResult<f64> {
        arg.and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| CliError::input(format!("covariance '{s}' needs a numeric correlation, e.g. ar:0.5")))
    };
    match kind.to_ascii_lowercase().as_str() {
        "identity" | "i" => Ok(SigmaSpec::Identity),
        "ar" => Ok(SigmaSpec::Ar { rho: rho()? }),
        "constant" => Ok(SigmaSpec::Constant { rho: rho()? }),
        "grouped" => Ok(SigmaSpec::Grouped),
        other => Err(CliError::input(format!("unknown covariance '{other}'"))),
    }
}

/// True coefficients from `--support` and `--beta` (all ones by default).
fn declared_beta(a: &DiagnoseArgs, p: usize) -> CliResult<Vec<f64>> {
    let support = parse_index_set(a.support.as_deref().ok_or_else(|| CliError::input("--support is required"))?)?;
    if let Some(&bad) = support.iter().find(|&&j| j >= p) {
        return Err(CliError::input(format!("support index {bad} is out of range for p={p}")));
    }
    if support.len() == p {
        return Err(CliError::input("support must leave at least one irrelevant variable"));
    }
    let values = match &a.beta {
        Some(b) if b.len() == support.len() => b.clone(),
        Some(b) => {
            return Err(CliError::input(format!(
                "--beta has {} values but the support has {}",
                b.len(),
                support.len()
            )))
        }
        None => vec![1.0; support.len()],
    };
    if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(CliError::input("--beta values on the support must be finite and nonzero"));
    }
    let mut beta = vec![0.0; p];
    for (j, v) in support.iter().zip(values) {
        beta[*j] = v;
    }
    Ok(beta)
}

fn cmd_diagnose(a: DiagnoseArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut lemma1 = None;
    let report: DiagnosticsReport = match (&a.preset, &a.sigma, &a.input) {
        (Some(name), None, None) => {
            let d = SimulationDesign::preset(name, a.n.unwrap_or(100))?;
            let beta = if a.support.is_some() { declared_beta(&a, d.p)? } else { d.beta_star.clone() };
            diagnose(&make_sigma(d.sigma_spec, d.p)?, &beta, d.n)?
        }
        (None, Some(sig), None) => {
            let p = a.p.ok_or_else(|| CliError::input("--sigma needs --p"))?;
            let cov: CovMatrix = make_sigma(parse_sigma(sig)?, p)?;
            diagnose(&cov, &declared_beta(&a, p)?, a.n.unwrap_or(100))?
        }
        (None, None, Some(input)) => {
            let response = a.response.as_deref().ok_or_else(|| CliError::input("--input needs --response"))?;
            let (csv, design) = load(&DataArgs {
                input: input.clone(),
                response: response.to_string(),
            })?;
            let spec = parse_method(&a.method)?;
            let rule: ThresholdRule = spec.effective_rule();
            let cov = apply_threshold(&sample_covariance(&design), &rule);
            let beta = declared_beta(&a, csv.names.len())?;
            if let Some(lam) = a.lambda {
                let (beta_std, noise) = support_refit(&design, &beta)?;
                lemma1 = Some(lemma1_certificate(&design, &noise, &beta_std, &rule, lam)?);
            }
            diagnose(&cov, &beta, a.n.unwrap_or(design.n()))?
        }
        _ => return Err(CliError::input("diagnose needs exactly one of --preset, --sigma or --input")),
    };
    let report = DiagnosticsReport { lemma1, ..report };
    let body = to_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": "diagnose",
        "report": report,
    }));
    emit(&a.out, stdout, &body)
}

/// Least-squares coefficients on the declared support (standardized scale)
/// and the residual.
fn support_refit(design: &StandardizedDesign, beta: &[f64]) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let s: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    let xs = design.x.select_columns(&s);
    let sol = (xs.transpose() * &xs)
        .cholesky()
        .map(|c| c.solve(&(xs.transpose() * &design.y)))
        .ok_or_else(|| CliError::from(Error::SingularSS))?;
    let mut b = vec![0.0; beta.len()];
    for (k, &j) in s.iter().enumerate() {
        b[j] = sol[k];
    }
    let fitted = &xs * &sol;
    let noise: Vec<f64> = design.y.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();
    Ok((b, noise))
}

/// Reads a path document written by `ctlasso path --format json`.
pub fn read_path_document(text: &str) -> CliResult<PathDocument> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("invalid path document: {e}")))
}

