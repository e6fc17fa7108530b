//! `wpa`: runs density traces, exponent fits, dwell times, the reference
//! slope curves and the w-function identity checks, and writes CSV or JSON.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use wpa_core::complexfn::identity_residuals;
use wpa_core::dwell::{dwell_report, SpatialInterval};
use wpa_core::{
    evolve, fit_exponent, DensityTrace, Error, QuadratureConfig, Route, StateSpec, TimeGrid, UnitSystem, WavePacket,
};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wpa", version, about = "Free wave-packet decay and dwell-time experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Density,
    Exponent,
    Dwell,
    Figure1,
    Wtest,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// |psi(x, t)|^2 on a log-spaced time grid.
    Density(RunArgs),
    /// Local slope d ln rho / d ln t and the fitted tail exponent.
    Exponent(RunArgs),
    /// Dwell time in [a, b] by the time, momentum and classical routes.
    Dwell(RunArgs),
    /// Slope curves of the truncated and plain Gaussians at x = 0.
    Figure1(RunArgs),
    /// Residuals of the w-function identities at random points.
    Wtest(RunArgs),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Density(_) => CommandKind::Density,
            Command::Exponent(_) => CommandKind::Exponent,
            Command::Dwell(_) => CommandKind::Dwell,
            Command::Figure1(_) => CommandKind::Figure1,
            Command::Wtest(_) => CommandKind::Wtest,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Density(a) | Command::Exponent(a) | Command::Dwell(a) | Command::Figure1(a) | Command::Wtest(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RouteChoice {
    ClosedForm,
    Quadrature,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// truncated_gaussian, gaussian, lorentzian_squared, linear_gaussian or taylor_stub
    #[arg(long, default_value = "truncated_gaussian")]
    pub state: String,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Taylor-stub coefficients and cutoff.
    #[arg(long, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
    /// Dwell interval [a, b].
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,

    #[arg(long, default_value_t = 0.1)]
    pub tmin: f64,
    #[arg(long, default_value_t = 1e6)]
    pub tmax: f64,
    #[arg(long = "per-decade", default_value_t = 16)]
    pub per_decade: usize,
    /// Decades at the end of the trace used for the exponent fit.
    #[arg(long, default_value_t = 1.5)]
    pub window: f64,

    /// Defaults to the closed form where one exists, quadrature otherwise.
    #[arg(long, value_enum)]
    pub route: Option<RouteChoice>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,

    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,

    /// wtest: number of random points, their radius and the RNG seed.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[arg(long, default_value_t = 5.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure of a run, with the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(e) if e.is_input_error() => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Config(m) => ("config", m.clone()),
            CliError::Numerical(e) => (e.kind(), e.to_string()),
        };
        json!({ "error": kind, "message": message, "exit_code": self.exit_code() })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}

type Outcome<T> = std::result::Result<T, CliError>;

/// Everything that determines a run, echoed into every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub state: StateSpec,
    /// The state with every parameter filled in.
    pub resolved_state: WavePacket,
    pub x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    pub grid: (f64, f64, usize),
    pub window: f64,
    pub route: RouteChoice,
    pub hbar: f64,
    pub mass: f64,
    pub rel_tol: f64,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Quadrature tolerances, with `WPA_TOL` overriding the relative tolerance.
pub fn quadrature_config(env_tol: Option<&str>) -> Outcome<QuadratureConfig> {
    let cfg = QuadratureConfig::default();
    match env_tol {
        None => Ok(cfg),
        Some(text) => {
            let tol: f64 = text
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("WPA_TOL: `{text}` is not a number")))?;
            cfg.with_rel_tol(tol).map_err(|e| CliError::Config(format!("WPA_TOL: {e}")))
        }
    }
}

fn state_spec(args: &RunArgs) -> Outcome<StateSpec> {
    let mut spec = StateSpec::named(&args.state);
    for (key, v) in [
        ("alpha", args.alpha),
        ("delta", args.delta),
        ("p0", args.p0),
        ("x0", args.x0),
        ("beta", args.beta),
        ("c1", args.c1),
        ("c2", args.c2),
        ("cutoff", args.cutoff),
    ] {
        if let Some(v) = v {
            spec.set(key, v).map_err(|e| CliError::Config(e.to_string()))?;
        }
    }
    Ok(spec)
}

fn has_closed_form(state: &WavePacket) -> bool {
    !matches!(state, WavePacket::LorentzianSquared { .. } | WavePacket::TaylorStub { .. })
}

fn config_error(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn check_output(out: &Option<PathBuf>) -> Outcome<()> {
    if let Some(path) = out {
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(CliError::Config(format!("--out: directory {} does not exist", parent.display())));
        }
        if path.is_dir() {
            return Err(CliError::Config(format!("--out: {} is a directory", path.display())));
        }
    }
    Ok(())
}

/// Files produced by a run, keyed by path (`None` is stdout).
pub type Artifacts = Vec<(Option<PathBuf>, String)>;

/// Validates the arguments and performs the run, returning the artifacts
/// without writing them.
pub fn execute(command: &Command, env_tol: Option<&str>) -> Outcome<Artifacts> {
    let args = command.args();
    let kind = command.kind();
    let units = UnitSystem::new(args.hbar, args.mass).map_err(config_error)?;
    let cfg = quadrature_config(env_tol)?;
    check_output(&args.out)?;
    let spec = state_spec(args)?;
    let state = spec.build(&units).map_err(config_error)?;
    let route = args
        .route
        .unwrap_or(if has_closed_form(&state) || kind == CommandKind::Figure1 {
            RouteChoice::ClosedForm
        } else {
            RouteChoice::Quadrature
        });
    if !args.x.is_finite() {
        return Err(CliError::Config("--x must be finite".into()));
    }
    let interval = match (kind, args.a, args.b) {
        (CommandKind::Dwell, Some(a), Some(b)) => Some((a, b)),
        (CommandKind::Dwell, _, _) => return Err(CliError::Config("dwell needs both --a and --b".into())),
        _ => None,
    };
    let config = RunConfig {
        command: kind,
        state: spec,
        resolved_state: state,
        x: args.x,
        interval,
        grid: (args.tmin, args.tmax, args.per_decade),
        window: args.window,
        route,
        hbar: args.hbar,
        mass: args.mass,
        rel_tol: cfg.rel_tol,
        format: args.format,
        out: args.out.clone(),
    };
    match kind {
        CommandKind::Density => density(&config, &state, &units, &cfg),
        CommandKind::Exponent => exponent(&config, &state, &units, &cfg),
        CommandKind::Dwell => dwell(&config, &state, &units, &cfg),
        CommandKind::Figure1 => figure1(&config, &units, &cfg),
        CommandKind::Wtest => wtest(&config, args.points, args.radius, args.seed),
    }
}

/// Runs a parsed command line and writes its artifacts; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let env_tol = std::env::var("WPA_TOL").ok();
    match execute(&cli.command, env_tol.as_deref()).and_then(write_artifacts) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

pub fn write_artifacts(artifacts: Artifacts) -> Outcome<()> {
    for (path, text) in artifacts {
        match path {
            Some(p) => std::fs::write(&p, text)?,
            None => print!("{text}"),
        }
    }
    Ok(())
}

fn grid(config: &RunConfig) -> Outcome<TimeGrid> {
    let (t_min, t_max, ppd) = config.grid;
    TimeGrid::new(t_min, t_max, ppd).map_err(config_error)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A numeric table plus extra summary fields for the header.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    summary: serde_json::Map<String, Value>,
}

impl Table {
    fn render(&self, config: &RunConfig) -> String {
        let mut header = serde_json::Map::new();
        header.insert("config".into(), serde_json::to_value(config).expect("serialisable config"));
        header.extend(self.summary.clone());
        match config.format {
            Format::Csv => {
                let mut s = String::new();
                writeln!(s, "# {}", Value::Object(header)).unwrap();
                writeln!(s, "{}", self.columns.join(",")).unwrap();
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
                    writeln!(s, "{}", cells.join(",")).unwrap();
                }
                s
            }
            Format::Json => {
                header.insert("columns".into(), json!(self.columns));
                header.insert("rows".into(), json!(self.rows));
                let mut s = serde_json::to_string_pretty(&Value::Object(header)).unwrap();
                s.push('\n');
                s
            }
        }
    }
}

fn routes(choice: RouteChoice) -> Vec<Route> {
    match choice {
        RouteChoice::ClosedForm => vec![Route::ClosedForm],
        RouteChoice::Quadrature => vec![Route::Quadrature],
        RouteChoice::Both => vec![Route::ClosedForm, Route::Quadrature],
    }
}

/// Amplitudes on the grid for each requested route.
fn amplitudes(
    config: &RunConfig,
    state: &WavePacket,
    times: &[f64],
    units: &UnitSystem,
    cfg: &QuadratureConfig,
) -> Outcome<Vec<Vec<Complex64>>> {
    use rayon::prelude::*;
    routes(config.route)
        .into_iter()
        .map(|route| {
            times
                .par_iter()
                .map(|&t| evolve(state, config.x, t, units, route, cfg))
                .collect::<wpa_core::Result<Vec<_>>>()
                .map_err(CliError::from)
        })
        .collect()
}

fn relative_deviation(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(1e-12)
}

fn density(config: &RunConfig, state: &WavePacket, units: &UnitSystem, cfg: &QuadratureConfig) -> Outcome<Artifacts> {
    let grid = grid(config)?;
    let times = grid.values();
    let psi = amplitudes(config, state, times, units, cfg)?;
    let mut summary = serde_json::Map::new();
    let table = if psi.len() == 2 {
        let mut max_dev: f64 = 0.0;
        let rows = times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let dev = relative_deviation(psi[0][i], psi[1][i]);
                max_dev = max_dev.max(dev);
                vec![t, psi[0][i].norm_sqr(), psi[1][i].norm_sqr(), dev]
            })
            .collect();
        summary.insert("max_deviation".into(), json!(max_dev));
        Table {
            columns: vec!["t", "density_closed_form", "density_quadrature", "deviation"],
            rows,
            summary,
        }
    } else {
        Table {
            columns: vec!["t", "density"],
            rows: times.iter().zip(&psi[0]).map(|(&t, v)| vec![t, v.norm_sqr()]).collect(),
            summary,
        }
    };
    Ok(vec![(config.out.clone(), table.render(config))])
}

fn exponent(config: &RunConfig, state: &WavePacket, units: &UnitSystem, cfg: &QuadratureConfig) -> Outcome<Artifacts> {
    let grid = grid(config)?;
    let psi = amplitudes(config, state, grid.values(), units, cfg)?;
    let density: Vec<f64> = psi[0].iter().map(|v| v.norm_sqr()).collect();
    let route = routes(config.route)[0];
    let trace = DensityTrace::from_values(config.x, grid.clone(), density, route)?;
    let est = fit_exponent(&trace, config.window)?;
    let mut summary = serde_json::Map::new();
    summary.insert("asymptotic_exponent".into(), json!(est.asymptotic_exponent));
    summary.insert("log_amplitude".into(), json!(est.log_amplitude));
    summary.insert("fit_window".into(), json!(est.fit_window));
    summary.insert("residual".into(), json!(est.residual));
    if psi.len() == 2 {
        let max_dev = psi[0]
            .iter()
            .zip(&psi[1])
            .map(|(a, b)| relative_deviation(*a, *b))
            .fold(0.0, f64::max);
        summary.insert("max_deviation".into(), json!(max_dev));
    }
    let table = Table {
        columns: vec!["ln_t", "dlnrho_dlnt"],
        rows: est.slope_curve.iter().map(|(l, s)| vec![*l, *s]).collect(),
        summary: summary.clone(),
    };
    let mut artifacts = vec![(config.out.clone(), table.render(config))];
    if let Some(out) = &config.out {
        let mut doc = serde_json::Map::new();
        doc.insert("config".into(), serde_json::to_value(config).unwrap());
        doc.extend(summary);
        let mut path = out.clone().into_os_string();
        path.push(".json");
        artifacts.push((Some(path.into()), serde_json::to_string_pretty(&Value::Object(doc)).unwrap() + "\n"));
    }
    Ok(artifacts)
}

fn dwell(config: &RunConfig, state: &WavePacket, units: &UnitSystem, cfg: &QuadratureConfig) -> Outcome<Artifacts> {
    let (a, b) = config.interval.expect("checked in execute");
    let interval = SpatialInterval::new(a, b).map_err(config_error)?;
    let report = dwell_report(state, &interval, units, cfg)?;
    let report_json = serde_json::to_value(&report).unwrap();
    let text = match config.format {
        Format::Json => {
            let doc = json!({ "config": config, "report": report_json });
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        Format::Csv => {
            let mut s = String::new();
            writeln!(s, "# {}", json!({ "config": config })).unwrap();
            writeln!(s, "quantity,value").unwrap();
            let cell = |v: Option<wpa_core::DwellValue>| match v {
                Some(wpa_core::DwellValue::Finite(x)) => num(x),
                Some(wpa_core::DwellValue::Divergent) => "divergent".to_string(),
                None => "not_applicable".to_string(),
            };
            writeln!(s, "time_route,{}", cell(Some(report.time_route))).unwrap();
            writeln!(s, "momentum_route,{}", cell(Some(report.momentum_route))).unwrap();
            writeln!(s, "classical,{}", cell(report.classical_value)).unwrap();
            writeln!(s, "tail_exponent,{}", num(report.tail_exponent_used)).unwrap();
            let disc = report.relative_discrepancy.map(num).unwrap_or_else(|| "not_applicable".into());
            writeln!(s, "relative_discrepancy,{disc}").unwrap();
            s
        }
    };
    Ok(vec![(config.out.clone(), text)])
}

fn figure1(config: &RunConfig, units: &UnitSystem, cfg: &QuadratureConfig) -> Outcome<Artifacts> {
    let grid = grid(config)?;
    let route = match config.route {
        RouteChoice::Quadrature => Route::Quadrature,
        _ => Route::ClosedForm,
    };
    let states = [WavePacket::figure1_truncated(units)?, WavePacket::figure1_gaussian(units)?];
    let mut curves = Vec::new();
    let mut summary = serde_json::Map::new();
    for state in &states {
        let trace = DensityTrace::compute(state, 0.0, &grid, units, route, cfg)?;
        let est = fit_exponent(&trace, config.window)?;
        summary.insert(format!("{}_exponent", state.name()), json!(est.asymptotic_exponent));
        curves.push(est.slope_curve);
    }
    let rows = (0..grid.len())
        .map(|i| vec![curves[0][i].0, curves[0][i].1, curves[1][i].1])
        .collect();
    let table = Table {
        columns: vec!["ln_t", "truncated_gaussian", "gaussian"],
        rows,
        summary,
    };
    Ok(vec![(config.out.clone(), table.render(config))])
}

fn wtest(config: &RunConfig, points: usize, radius: f64, seed: u64) -> Outcome<Artifacts> {
    if points == 0 || !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::Config("wtest needs --points >= 1 and a positive --radius".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(points);
    let mut worst = [0.0f64; 4];
    for _ in 0..points {
        let r = radius * rng.gen::<f64>().sqrt();
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let z = Complex64::from_polar(r, theta);
        let res = identity_residuals(z)?;
        let vals = [res.reflection, res.conjugation, res.derivative, res.series];
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
        rows.push(vec![z.re, z.im, vals[0], vals[1], vals[2], vals[3]]);
    }
    let mut summary = serde_json::Map::new();
    summary.insert(
        "max_residual".into(),
        json!({ "reflection": worst[0], "conjugation": worst[1], "derivative": worst[2], "series": worst[3] }),
    );
    let table = Table {
        columns: vec!["re_z", "im_z", "reflection", "conjugation", "derivative", "series"],
        rows,
        summary,
    };
    Ok(vec![(config.out.clone(), table.render(config))])
}
