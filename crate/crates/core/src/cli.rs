//! The `coorbital` command-line front end. [`parse`] validates arguments into a
//! [`Command`], [`execute`] runs it and renders JSON or CSV.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{certify_square_case, SquareCertificate};
use crate::error::{AlgebraError, ModelError, SolverError, StackingError};
use crate::kernel::{eval_f, eval_f_derivative, property_report, PropertyCheck};
use crate::masses::mass_null_space_with;
use crate::model::{residual, ConfigRecord, Configuration, MassVector};
use crate::solver::{default_grid, enumerate_equal_mass, CentralSolution, CENTRAL_TOLERANCE, MAX_ENUMERATION_SIZE, MIN_ENUMERATION_SIZE};
use crate::stacking::{search_stacked_with, MassMode, Scenario, SearchOptions, StackedPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub action: Action,
    pub format: Format,
    /// Angles are read and written in degrees.
    pub degrees: bool,
    pub seed: u64,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    FEval(FEval),
    Residual { theta: Vec<f64>, mu: Option<Vec<f64>> },
    Enumerate { n: usize, grid: usize },
    InverseMasses { theta: Vec<f64>, samples: usize },
    StackedSearch { n: usize, scenario: Scenario, mode: MassMode, fraction_steps: Option<usize> },
    CertifySquare,
    LemmaCheck { samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FEval {
    Point(f64),
    Sweep { from: f64, to: f64, points: usize },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown command {0:?}")]
    UnknownCommand(String),
    #[error("invalid --{name}: {reason}")]
    BadFlag { name: &'static str, reason: String },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failure(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) | CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

fn bad(name: &'static str, reason: impl Into<String>) -> CliError {
    CliError::BadFlag { name, reason: reason.into() }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NoConvergence { .. } | SolverError::DomainEscape { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<StackingError> for CliError {
    fn from(e: StackingError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Failure(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "coorbital", version, about = "Central configurations of the 1+n coorbital satellites problem")]
struct Args {
    #[command(subcommand)]
    command: Sub,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Read and write angles in degrees.
    #[arg(long, global = true)]
    degrees: bool,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the searches.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Evaluate f and its derivatives at a point, or sweep f over an interval.
    FEval {
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long)]
        sweep: bool,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Residual of a configuration for given masses (equal by default).
    Residual {
        #[command(flatten)]
        input: ConfigInput,
        /// Comma-separated masses.
        #[arg(long, value_delimiter = ',')]
        mu: Option<Vec<f64>>,
    },
    /// All equal-mass central configuration classes for n satellites.
    Enumerate {
        #[arg(long)]
        n: i64,
        /// Starting grid points per free angle.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Masses for which a configuration is central.
    InverseMasses {
        #[command(flatten)]
        input: ConfigInput,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Search for stacked central configurations.
    StackedSearch {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        n: i64,
        /// equal or solved.
        #[arg(long, default_value = "equal")]
        mode: String,
        #[arg(long)]
        fraction_steps: Option<usize>,
    },
    /// Exact certificate for the square insertion case.
    CertifySquare,
    /// Sampled shape properties of the kernel.
    LemmaCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Debug, clap::Args)]
struct ConfigInput {
    /// Comma-separated gap angles.
    #[arg(long, value_delimiter = ',', conflicts_with = "config")]
    theta: Option<Vec<f64>>,
    /// JSON file with fields n, theta and optional mu.
    #[arg(long)]
    config: Option<PathBuf>,
}

const SUBCOMMANDS: [&str; 7] = [
    "f-eval",
    "residual",
    "enumerate",
    "inverse-masses",
    "stacked-search",
    "certify-square",
    "lemma-check",
];

fn to_radians(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_radians()
    } else {
        v
    }
}

fn from_radians(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_degrees()
    } else {
        v
    }
}

fn finite(name: &'static str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(name, "must be finite"))
    }
}

fn read_config(input: ConfigInput, degrees: bool) -> Result<(Vec<f64>, Option<Vec<f64>>), CliError> {
    let (theta, mu) = match (input.theta, input.config) {
        (Some(theta), None) => (theta, None),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| bad("config", format!("cannot read {}: {e}", path.display())))?;
            let record: ConfigRecord =
                serde_json::from_str(&text).map_err(|e| bad("config", format!("invalid JSON: {e}")))?;
            if record.theta.len() != record.n {
                return Err(bad("config", format!("n = {} but {} angles", record.n, record.theta.len())));
            }
            (record.theta, record.mu)
        }
        _ => return Err(bad("theta", "give either --theta or --config")),
    };
    for &t in &theta {
        finite("theta", t)?;
    }
    let theta = theta.into_iter().map(|t| to_radians(t, degrees)).collect();
    Ok((theta, mu))
}

fn size(name: &'static str, n: i64) -> Result<usize, CliError> {
    if n < MIN_ENUMERATION_SIZE as i64 {
        return Err(bad(name, format!("n must be ≥ {MIN_ENUMERATION_SIZE}")));
    }
    if n > MAX_ENUMERATION_SIZE as i64 {
        return Err(bad(name, format!("n must be ≤ {MAX_ENUMERATION_SIZE}")));
    }
    Ok(n as usize)
}

fn positive(name: &'static str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        Err(bad(name, "must be positive"))
    } else {
        Ok(v)
    }
}

/// Parses and validates command-line arguments (the first item is the program name).
pub fn parse<I, T>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match Args::try_parse_from(&argv) {
        Ok(a) => a,
        Err(e) => {
            if e.kind() == clap::error::ErrorKind::InvalidSubcommand {
                let name = argv
                    .iter()
                    .skip(1)
                    .map(|a| a.to_string_lossy().into_owned())
                    .find(|a| !a.starts_with('-') && !SUBCOMMANDS.contains(&a.as_str()))
                    .unwrap_or_default();
                return Err(CliError::UnknownCommand(name));
            }
            return Err(CliError::Usage(e.render().to_string()));
        }
    };
    let degrees = args.degrees;
    if args.jobs == Some(0) {
        return Err(bad("jobs", "must be positive"));
    }
    let action = match args.command {
        Sub::FEval { x, sweep, from, to, points } => {
            if sweep {
                if x.is_some() {
                    return Err(bad("x", "not allowed with --sweep"));
                }
                let (lo, hi) = if degrees { (1e-3, 360.0 - 1e-3) } else { (1e-3, std::f64::consts::TAU - 1e-3) };
                let from = to_radians(finite("from", from.unwrap_or(lo))?, degrees);
                let to = to_radians(finite("to", to.unwrap_or(hi))?, degrees);
                if from >= to {
                    return Err(bad("to", "must exceed --from"));
                }
                if points < 2 {
                    return Err(bad("points", "need at least 2"));
                }
                Action::FEval(FEval::Sweep { from, to, points })
            } else {
                let x = x.ok_or_else(|| bad("x", "required unless --sweep is given"))?;
                Action::FEval(FEval::Point(to_radians(finite("x", x)?, degrees)))
            }
        }
        Sub::Residual { input, mu } => {
            let (theta, from_file) = read_config(input, degrees)?;
            let mu = mu.or(from_file);
            if let Some(m) = &mu {
                if m.len() != theta.len() {
                    return Err(bad("mu", format!("expected {} masses, got {}", theta.len(), m.len())));
                }
                if m.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(bad("mu", "masses must be positive"));
                }
            }
            Action::Residual { theta, mu }
        }
        Sub::Enumerate { n, grid } => {
            let n = size("n", n)?;
            let grid = positive("grid", grid.unwrap_or_else(|| default_grid(n)))?;
            Action::Enumerate { n, grid }
        }
        Sub::InverseMasses { input, samples } => {
            let (theta, _) = read_config(input, degrees)?;
            Action::InverseMasses { theta, samples: positive("samples", samples)? }
        }
        Sub::StackedSearch { scenario, n, mode, fraction_steps } => {
            let scenario: Scenario = scenario.parse().map_err(|e: StackingError| bad("scenario", e.to_string()))?;
            let mode: MassMode = mode.parse().map_err(|e: StackingError| bad("mode", e.to_string()))?;
            let fraction_steps = fraction_steps.map(|s| positive("fraction-steps", s)).transpose()?;
            Action::StackedSearch { n: size("n", n)?, scenario, mode, fraction_steps }
        }
        Sub::CertifySquare => Action::CertifySquare,
        Sub::LemmaCheck { samples } => Action::LemmaCheck { samples: positive("samples", samples)? },
    };
    Ok(Command { action, format: args.format, degrees, seed: args.seed, jobs: args.jobs })
}

#[derive(Debug, Serialize)]
struct PointValues {
    x: f64,
    f: f64,
    df: f64,
    d2f: f64,
    d3f: f64,
}

#[derive(Debug, Serialize)]
struct SolutionRecord {
    class_id: String,
    n: usize,
    theta: Vec<f64>,
    mu: Vec<f64>,
    residual_inf: f64,
}

impl SolutionRecord {
    fn new(s: &CentralSolution, degrees: bool) -> Self {
        Self {
            class_id: s.class_id.clone(),
            n: s.config.len(),
            theta: s.config.angles().iter().map(|&t| from_radians(t, degrees)).collect(),
            mu: s.masses.as_slice().to_vec(),
            residual_inf: s.residual_inf,
        }
    }
}

#[derive(Debug, Serialize)]
struct ResidualReport {
    n: usize,
    theta: Vec<f64>,
    mu: Vec<f64>,
    rows: Vec<f64>,
    residual_inf: f64,
    central: bool,
}

#[derive(Debug, Serialize)]
struct InverseReport {
    n: usize,
    theta: Vec<f64>,
    null_dim: usize,
    basis: Vec<Vec<f64>>,
    mu: Option<Vec<f64>>,
    absence_certified: bool,
}

#[derive(Debug, Serialize)]
struct PairRecord {
    scenario: Scenario,
    gaps: Vec<usize>,
    fractions: Vec<f64>,
    added_masses: Vec<f64>,
    base: SolutionRecord,
    extended: SolutionRecord,
}

#[derive(Debug, Serialize)]
struct SearchSummary {
    n: usize,
    scenario: Scenario,
    mode: String,
    grid_points: usize,
    candidates: usize,
    converged: usize,
    rejected_masses: usize,
    near_misses: usize,
    pairs: Vec<PairRecord>,
}

fn json(value: &impl Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_row(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let line: Vec<String> = fields.into_iter().collect();
    let _ = writeln!(out, "{}", line.join(","));
}

fn joined(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn enumerate_csv(records: &[SolutionRecord], n: usize) -> String {
    let mut out = String::new();
    let header = ["class_id".to_string(), "n".to_string()]
        .into_iter()
        .chain((1..=n).map(|i| format!("theta_{i}")))
        .chain((1..=n).map(|i| format!("mu_{i}")))
        .chain(["residual_inf".to_string()]);
    csv_row(&mut out, header);
    for r in records {
        let row = [r.class_id.clone(), r.n.to_string()]
            .into_iter()
            .chain(r.theta.iter().map(f64::to_string))
            .chain(r.mu.iter().map(f64::to_string))
            .chain([r.residual_inf.to_string()]);
        csv_row(&mut out, row);
    }
    out
}

fn certificate_csv(c: &SquareCertificate) -> String {
    let mut out = String::new();
    csv_row(&mut out, ["polynomial", "degree", "sign"].map(String::from));
    for (name, signs) in [("r1_numerator", &c.r1_numerator.signs), ("r2_numerator", &c.r2_numerator.signs)] {
        for (k, s) in signs.iter().enumerate() {
            csv_row(&mut out, [name.to_string(), k.to_string(), s.to_string()]);
        }
    }
    out
}

fn lemma_csv(checks: &[PropertyCheck]) -> String {
    let mut out = String::new();
    csv_row(&mut out, ["name", "samples", "worst_margin", "passed"].map(String::from));
    for c in checks {
        csv_row(
            &mut out,
            [c.name.to_string(), c.samples.to_string(), c.worst_margin.to_string(), c.passed.to_string()],
        );
    }
    out
}

fn configure_threads(jobs: Option<usize>) {
    if let Some(j) = jobs {
        // A pool that already exists keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
}

/// Runs a command and returns its rendered output.
pub fn execute(cmd: &Command) -> Result<String, CliError> {
    configure_threads(cmd.jobs);
    let deg = cmd.degrees;
    let csv = cmd.format == Format::Csv;
    match &cmd.action {
        Action::FEval(FEval::Point(x)) => {
            let v = PointValues {
                x: from_radians(*x, deg),
                f: eval_f(*x).map_err(|e| CliError::Input(e.to_string()))?,
                df: eval_f_derivative(*x, 1).map_err(|e| CliError::Input(e.to_string()))?,
                d2f: eval_f_derivative(*x, 2).map_err(|e| CliError::Input(e.to_string()))?,
                d3f: eval_f_derivative(*x, 3).map_err(|e| CliError::Input(e.to_string()))?,
            };
            if csv {
                let mut out = String::new();
                csv_row(&mut out, ["x", "f", "df", "d2f", "d3f"].map(String::from));
                csv_row(&mut out, [v.x, v.f, v.df, v.d2f, v.d3f].map(|y| y.to_string()));
                Ok(out)
            } else {
                json(&v)
            }
        }
        Action::FEval(FEval::Sweep { from, to, points }) => {
            let mut samples = Vec::with_capacity(*points);
            for k in 0..*points {
                let x = from + (to - from) * k as f64 / (*points - 1) as f64;
                let f = eval_f(x).map_err(|e| CliError::Input(e.to_string()))?;
                samples.push((from_radians(x, deg), f));
            }
            if csv {
                let mut out = String::from("x,f\n");
                for (x, f) in samples {
                    let _ = writeln!(out, "{x},{f}");
                }
                Ok(out)
            } else {
                let rows: Vec<_> = samples.into_iter().map(|(x, f)| serde_json::json!({"x": x, "f": f})).collect();
                json(&rows)
            }
        }
        Action::Residual { theta, mu } => {
            let config = Configuration::new(theta.clone())?;
            let masses = match mu {
                Some(m) => MassVector::new(m.clone())?,
                None => MassVector::equal(config.len()),
            };
            let r = residual(&config, masses.as_slice())?;
            let report = ResidualReport {
                n: config.len(),
                theta: theta.iter().map(|&t| from_radians(t, deg)).collect(),
                mu: masses.as_slice().to_vec(),
                central: r.inf_norm < CENTRAL_TOLERANCE,
                residual_inf: r.inf_norm,
                rows: r.rows,
            };
            if csv {
                let mut out = String::from("row,value\n");
                for (i, v) in report.rows.iter().enumerate() {
                    let _ = writeln!(out, "{},{v}", i + 1);
                }
                Ok(out)
            } else {
                json(&report)
            }
        }
        Action::Enumerate { n, grid } => {
            let records: Vec<SolutionRecord> = enumerate_equal_mass(*n, *grid)?
                .iter()
                .map(|s| SolutionRecord::new(s, deg))
                .collect();
            if csv {
                Ok(enumerate_csv(&records, *n))
            } else {
                json(&records)
            }
        }
        Action::InverseMasses { theta, samples } => {
            let config = Configuration::new(theta.clone())?;
            let space = mass_null_space_with(&config, cmd.seed, *samples)?;
            let report = InverseReport {
                n: config.len(),
                theta: theta.iter().map(|&t| from_radians(t, deg)).collect(),
                null_dim: space.null_dim,
                basis: space.basis,
                mu: space.positive_representative.map(|m| m.as_slice().to_vec()),
                absence_certified: space.absence_certified,
            };
            if csv {
                let mut out = String::new();
                let n = report.n;
                csv_row(
                    &mut out,
                    ["null_dim".to_string(), "absence_certified".to_string()]
                        .into_iter()
                        .chain((1..=n).map(|i| format!("mu_{i}"))),
                );
                let mu: Vec<String> = match &report.mu {
                    Some(m) => m.iter().map(f64::to_string).collect(),
                    None => vec![String::new(); n],
                };
                csv_row(
                    &mut out,
                    [report.null_dim.to_string(), report.absence_certified.to_string()]
                        .into_iter()
                        .chain(mu),
                );
                Ok(out)
            } else {
                json(&report)
            }
        }
        Action::StackedSearch { n, scenario, mode, fraction_steps } => {
            let mut options = SearchOptions { seed: cmd.seed, ..SearchOptions::default() };
            if let Some(s) = fraction_steps {
                options.fraction_steps = *s;
            }
            let report = search_stacked_with(*n, *scenario, *mode, &options)?;
            let pair = |p: &StackedPair| PairRecord {
                scenario: p.scenario,
                gaps: p.spec.gaps().to_vec(),
                fractions: p.spec.fractions().to_vec(),
                added_masses: p.added_masses.clone(),
                base: SolutionRecord::new(&p.base, deg),
                extended: SolutionRecord::new(&p.extended, deg),
            };
            let summary = SearchSummary {
                n: *n,
                scenario: *scenario,
                mode: mode.to_string(),
                grid_points: report.grid_points,
                candidates: report.candidates,
                converged: report.converged,
                rejected_masses: report.rejected_masses,
                near_misses: report.near_misses,
                pairs: report.pairs.iter().map(pair).collect(),
            };
            if csv {
                let mut out = String::new();
                csv_row(
                    &mut out,
                    ["scenario", "n", "base_class", "base_theta", "extended_class", "extended_theta", "gaps", "fractions", "added_masses"]
                        .map(String::from),
                );
                for p in &summary.pairs {
                    csv_row(
                        &mut out,
                        [
                            p.scenario.to_string(),
                            summary.n.to_string(),
                            p.base.class_id.clone(),
                            joined(&p.base.theta),
                            p.extended.class_id.clone(),
                            joined(&p.extended.theta),
                            p.gaps.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                            joined(&p.fractions),
                            joined(&p.added_masses),
                        ],
                    );
                }
                Ok(out)
            } else {
                json(&summary)
            }
        }
        Action::CertifySquare => {
            let c = certify_square_case()?;
            if csv {
                Ok(certificate_csv(&c))
            } else {
                json(&c)
            }
        }
        Action::LemmaCheck { samples } => {
            let checks = property_report(*samples, cmd.seed);
            let out = if csv { lemma_csv(&checks) } else { json(&checks)? };
            if let Some(failed) = checks.iter().find(|c| !c.passed) {
                return Err(CliError::Failure(format!("{out}property {} failed", failed.name)));
            }
            Ok(out)
        }
    }
}

/// Full entry point: parse, execute, print; returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cmd = match parse(argv.clone()) {
        Ok(c) => c,
        Err(CliError::Usage(text)) => {
            // Help and version requests are successful usage output.
            return match Args::try_parse_from(&argv) {
                Err(e) if !e.use_stderr() => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    2
                }
            };
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    match execute(&cmd) {
        Ok(out) => match stdout.write_all(out.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
