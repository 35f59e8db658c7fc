//! Batch front end: a JSON run configuration plus flag overrides, one
//! subcommand per task.
//!
//! Exit codes are 0 on success, 2 for configuration errors, 3 for solver
//! failures and 4 when `validate` finds a failing check. Errors are reported on
//! stderr as a single JSON object.

mod validate;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    self, log_space, optimal_phase_cloud, scaling_with_n, sweep_bath_ratio, sweep_drive_ratio,
    DriveRegimes, ScalingSpec, SweepAxis, SweepSpec,
};
use crate::liouvillian::build_liouvillian;
use crate::model::{regime_classify, DensityMatrix, Regime, SystemParams};
use crate::steady_state::{self, solve_analytic, solve_numeric};
use crate::sync::{
    closed_form_smax_n2, closed_form_smax_refrigerator, maximize_sync, phase_distribution_grid,
    Branch, PhaseAxis, PhaseVector, SyncOptions, SyncResult,
};

pub use validate::{run_validation, CheckOutcome};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SteadyState,
    Sync,
    PhaseGrid,
    SweepBath,
    SweepDrive,
    Scaling,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Numeric,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub seed: u64,
    pub starts: usize,
    pub tol: f64,
    pub resolution: usize,
    pub quad_points: usize,
    /// Inclusive `N` range of the power-law fit.
    pub fit_window: Option<(usize, usize)>,
    /// Output file, or output directory for sweeps and scaling.
    pub out: Option<PathBuf>,
    /// Sweep values; each sweep has its own default grid.
    pub values: Option<Vec<f64>>,
    pub method: Method,
    pub n_min: usize,
    pub n_max: usize,
    pub realizations: usize,
    pub homogeneous: bool,
    /// `N` whose optimal phases are exported by `scaling`; defaults to `n_max`.
    pub phase_n: Option<usize>,
    pub engine_bath_ratio: f64,
    pub refrigerator_bath_ratio: f64,
    /// Random states per check in `validate`.
    pub validate_samples: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 64,
            tol: 1e-5,
            resolution: 64,
            quad_points: 64,
            fit_window: None,
            out: None,
            values: None,
            method: Method::Numeric,
            n_min: 2,
            n_max: 20,
            realizations: 100,
            homogeneous: false,
            phase_n: None,
            engine_bath_ratio: 10.0,
            refrigerator_bath_ratio: 0.4,
            validate_samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    pub params: SystemParams,
    #[serde(default)]
    pub options: RunOptions,
}

impl RunConfig {
    pub fn new(command: Command, params: SystemParams) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            params,
            options: RunOptions::default(),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Domain(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        self.params.validate()?;
        let o = &self.options;
        if o.starts == 0 {
            return Err(Error::Domain("starts must be at least 1".into()));
        }
        if !(o.tol > 0.0) {
            return Err(Error::Domain(format!("tol must be positive, got {}", o.tol)));
        }
        if o.resolution < 8 {
            return Err(Error::Domain(format!("resolution must be >= 8, got {}", o.resolution)));
        }
        if o.quad_points == 0 {
            return Err(Error::Domain("quad_points must be positive".into()));
        }
        Ok(())
    }

    fn sync_options(&self) -> SyncOptions {
        SyncOptions {
            starts: self.options.starts,
            tol: self.options.tol,
            seed: self.options.seed,
            ..SyncOptions::default()
        }
    }
}

/// Header echoed into every output: the full configuration plus the artifact version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
}

impl Provenance {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.options.seed,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("provenance serializes")
    }

    /// Parses the text after `# params: ` on a CSV header line.
    pub fn from_header_line(line: &str) -> Result<Self> {
        let json = line.strip_prefix("# params: ").unwrap_or(line);
        Ok(serde_json::from_str(json)?)
    }
}

#[derive(Debug, Parser)]
#[command(name = "maser-sync", version, about = "Steady states and synchronization of a degenerate thermal maser")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Steady-state density matrix as CSV.
    SteadyState(CommonArgs),
    /// Synchronization maximum as JSON.
    Sync(CommonArgs),
    /// Phase distribution over (phi_21, phi_31) as a CSV grid.
    PhaseGrid(CommonArgs),
    /// Sweep of n_h / n_c, written to fig2c.csv.
    SweepBath(CommonArgs),
    /// Sweep of lambda_2 / lambda_3, written to fig2d.csv.
    SweepDrive(CommonArgs),
    /// Random-drive ensembles versus N, written to fig3_scaling.csv and fig3_phases.csv.
    Scaling(CommonArgs),
    /// Runs the analytic and numeric cross-checks.
    Validate(CommonArgs),
}

impl Sub {
    fn split(self) -> (Command, CommonArgs) {
        match self {
            Sub::SteadyState(a) => (Command::SteadyState, a),
            Sub::Sync(a) => (Command::Sync, a),
            Sub::PhaseGrid(a) => (Command::PhaseGrid, a),
            Sub::SweepBath(a) => (Command::SweepBath, a),
            Sub::SweepDrive(a) => (Command::SweepDrive, a),
            Sub::Scaling(a) => (Command::Scaling, a),
            Sub::Validate(a) => (Command::Validate, a),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub quad_points: Option<usize>,
    /// Inclusive N range of the power-law fit, as `LO:HI`.
    #[arg(long, value_parser = parse_window)]
    pub fit_window: Option<(usize, usize)>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Number of degenerate levels (resets the drive to homogeneous).
    #[arg(long)]
    pub n_deg: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub n_h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub n_c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_c: Option<f64>,
    /// Sets n_h = ratio * n_c.
    #[arg(long, allow_hyphen_values = true)]
    pub bath_ratio: Option<f64>,
    /// Homogeneous drive amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub drive: Option<f64>,
    /// Homogeneous drive chosen so that gamma_h (1 + n_h) / lambda equals this value.
    #[arg(long, allow_hyphen_values = true)]
    pub dissipation_ratio: Option<f64>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Option<Vec<f64>>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub phase_n: Option<usize>,
    /// Equal drive on every level in `scaling`.
    #[arg(long)]
    pub homogeneous: bool,
    #[arg(long)]
    pub validate_samples: Option<usize>,
}

fn parse_window(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s}"))?;
    let lo = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

/// Merges the optional config file with flag overrides.
pub fn resolve_config(command: Command, args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str::<RunConfig>(&fs::read_to_string(path)?)?,
        None => RunConfig::new(command, SystemParams::reference(2)),
    };
    cfg.command = command;
    let p = &mut cfg.params;
    if let Some(n) = args.n_deg {
        let amp = p.drive_amps.first().copied().unwrap_or(0.1);
        p.n_deg = n;
        p.drive_amps = vec![amp; n];
    }
    if let Some(v) = args.n_c {
        p.n_c = v;
    }
    if let Some(v) = args.n_h {
        p.n_h = v;
    }
    if let Some(v) = args.gamma_h {
        p.gamma_h = v;
    }
    if let Some(v) = args.gamma_c {
        p.gamma_c = v;
    }
    if let Some(r) = args.bath_ratio {
        *p = p.clone().with_bath_ratio(r);
    }
    if let Some(a) = args.drive {
        *p = p.clone().with_homogeneous_drive(a);
    }
    if let Some(k) = args.dissipation_ratio {
        *p = p.clone().with_dissipation_ratio(k);
    }

    let o = &mut cfg.options;
    macro_rules! take {
        ($($field:ident),*) => {$(
            if let Some(v) = args.$field.clone() {
                o.$field = v;
            }
        )*};
    }
    take!(seed, resolution, starts, quad_points, method, n_min, n_max, realizations, validate_samples);
    if args.out.is_some() {
        o.out = args.out.clone();
    }
    if args.fit_window.is_some() {
        o.fit_window = args.fit_window;
    }
    if args.values.is_some() {
        o.values = args.values.clone();
    }
    if args.phase_n.is_some() {
        o.phase_n = args.phase_n;
    }
    if args.homogeneous {
        o.homogeneous = true;
    }
    cfg.check()?;
    Ok(cfg)
}

/// Machine-readable failure report.
#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonUniqueSteadyState(_)
        | Error::Numeric(_)
        | Error::NotConverged { .. }
        | Error::Fit(_)
        | Error::TooLarge { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParams(_) => "invalid_params",
        Error::Domain(_) => "domain",
        Error::NotApplicable(_) => "not_applicable",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::TooLarge { .. } => "too_large",
        Error::NonUniqueSteadyState(_) => "non_unique_steady_state",
        Error::Numeric(_) => "numeric",
        Error::NotConverged { .. } => "not_converged",
        Error::InvalidIndex(_) => "invalid_index",
        Error::Fit(_) => "fit",
        Error::Io(_) => "io",
        Error::Json(_) => "config_json",
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let report = ErrorReport {
                error: "usage",
                message: e.render().to_string().trim().to_string(),
                exit_code: EXIT_CONFIG,
            };
            eprintln!("{}", serde_json::to_string(&report).expect("report serializes"));
            return EXIT_CONFIG;
        }
    };
    let (command, args) = cli.command.split();
    let outcome = resolve_config(command, &args).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            let report = ErrorReport {
                error: error_kind(&e),
                message: e.to_string(),
                exit_code: code,
            };
            eprintln!("{}", serde_json::to_string(&report).expect("report serializes"));
            code
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn output_file(cfg: &RunConfig, name: &str) -> Result<Option<PathBuf>> {
    match &cfg.options.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.join(name)))
        }
        None => Ok(None),
    }
}

fn steady_state_of(cfg: &RunConfig) -> Result<DensityMatrix> {
    match cfg.options.method {
        Method::Numeric => solve_numeric(&build_liouvillian(&cfg.params)?),
        Method::Analytic => solve_analytic(&cfg.params),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SyncReport {
    pub provenance: Provenance,
    pub regime: Regime,
    pub result: SyncResult,
    /// Closed-form maximum when one applies to these parameters.
    pub closed_form_s_max: Option<f64>,
}

/// Numeric maximum, labelled with the closed-form branch where one applies.
pub fn sync_report(cfg: &RunConfig) -> Result<SyncReport> {
    let p = &cfg.params;
    let rho = steady_state_of(cfg)?;
    let mut result = maximize_sync(&rho, &cfg.sync_options())?;
    let regime = regime_classify(p);
    let closed_ok = p.is_resonant() && p.homogeneous_drive().is_some();
    let mut closed = None;
    if closed_ok && result.branch != Branch::Diagonal {
        if p.n_deg == 2 {
            let c = closed_form_smax_n2(p)?;
            result.branch = c.branch;
            closed = Some(c.s_max);
        } else if regime == Regime::Refrigerator {
            result.branch = Branch::RefrigeratorCooperative;
            closed = Some(closed_form_smax_refrigerator(p)?);
        }
    }
    Ok(SyncReport {
        provenance: Provenance::new(cfg),
        regime,
        result,
        closed_form_s_max: closed,
    })
}

/// Executes a resolved configuration. Returns the exit code on success.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    cfg.check()?;
    let prov = Provenance::new(cfg).to_json();
    let o = &cfg.options;
    match cfg.command {
        Command::SteadyState => {
            let rho = steady_state_of(cfg)?;
            let mut w = open_output(o.out.as_deref())?;
            steady_state::write_csv(&rho, &prov, &mut w)?;
            w.flush()?;
        }
        Command::Sync => {
            let report = sync_report(cfg)?;
            let mut w = open_output(o.out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::PhaseGrid => {
            let rho = steady_state_of(cfg)?;
            if rho.dim() < 4 {
                return Err(Error::InvalidIndex(
                    "phase-grid needs at least two degenerate levels".into(),
                ));
            }
            let grid = phase_distribution_grid(
                &rho,
                PhaseAxis::new(2, 1),
                PhaseAxis::new(3, 1),
                &PhaseVector::zeros(rho.dim() - 1),
                o.resolution,
            )?;
            let mut w = open_output(o.out.as_deref())?;
            grid.write_csv(&prov, &mut w)?;
            w.flush()?;
        }
        Command::SweepBath => {
            let spec = SweepSpec {
                base_params: cfg.params.clone(),
                axis: SweepAxis::BathRatio,
                values: o.values.clone().unwrap_or_else(|| log_space(0.1, 100.0, 31)),
                seed: o.seed,
            };
            let rows = sweep_bath_ratio(&spec, &cfg.sync_options())?;
            let mut w = open_output(output_file(cfg, "fig2c.csv")?.as_deref())?;
            experiments::write_bath_csv(&rows, &prov, &mut w)?;
            w.flush()?;
        }
        Command::SweepDrive => {
            let spec = SweepSpec {
                base_params: cfg.params.clone(),
                axis: SweepAxis::DriveRatio,
                values: o
                    .values
                    .clone()
                    .unwrap_or_else(|| (1..=20).map(|i| i as f64 / 20.0).collect()),
                seed: o.seed,
            };
            let regimes = DriveRegimes {
                engine_bath_ratio: o.engine_bath_ratio,
                refrigerator_bath_ratio: o.refrigerator_bath_ratio,
            };
            let rows = sweep_drive_ratio(&spec, regimes, &cfg.sync_options())?;
            let mut w = open_output(output_file(cfg, "fig2d.csv")?.as_deref())?;
            experiments::write_drive_csv(&rows, &prov, &mut w)?;
            w.flush()?;
        }
        Command::Scaling => {
            let spec = ScalingSpec {
                base_params: cfg.params.clone(),
                n_min: o.n_min,
                n_max: o.n_max,
                realizations: o.realizations,
                seed: o.seed,
                homogeneous: o.homogeneous,
                fit_window: o.fit_window,
                options: cfg.sync_options(),
            };
            let result = scaling_with_n(&spec)?;
            let cloud = optimal_phase_cloud(&result, o.phase_n.unwrap_or(o.n_max))?;
            {
                let mut w = open_output(output_file(cfg, "fig3_scaling.csv")?.as_deref())?;
                experiments::write_scaling_csv(&result, &prov, &mut w)?;
                w.flush()?;
            }
            if o.out.is_some() {
                let mut w = open_output(output_file(cfg, "fig3_phases.csv")?.as_deref())?;
                experiments::write_phases_csv(&cloud, &prov, &mut w)?;
                w.flush()?;
            }
        }
        Command::Validate => {
            let outcomes = run_validation(o.seed, o.validate_samples, o.quad_points);
            let mut w = open_output(o.out.as_deref())?;
            for c in &outcomes {
                writeln!(
                    w,
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )?;
            }
            w.flush()?;
            if outcomes.iter().any(|c| !c.passed) {
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(EXIT_OK)
}
