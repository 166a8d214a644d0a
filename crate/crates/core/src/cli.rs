//! Command-line front end: argument definitions, dispatch and output
//! formatting. `main` only parses and maps errors to exit codes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::canard::Route;
use crate::model::{builtin, load_model, Builtin, ModelError, Params, SystemModel};
use crate::oracle::exit::{bisect_canard, ExitGeometry, OracleError, OracleResult};
use crate::oracle::integrator::IntegratorSettings;
use crate::oracle::sweep::{
    auto_bracket, orbit_sample, sweep_epsilon, write_gnuplot, SweepCase, SweepReport,
    SweepSettings,
};
use crate::pipeline::{analyze, exit_code, Analysis, AnalysisReport, AnalysisSettings, PipelineError, Timing};

#[derive(Debug, Parser)]
#[command(
    name = "canard",
    version,
    about = "Predict and observe canard explosions at singular Hopf points"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Built-in model (`vdp` or `fhn`)
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// JSON model config
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// JSON exit geometry for the oracle
    #[arg(long, global = true, value_name = "PATH")]
    pub geometry: Option<PathBuf>,
    /// Time-scale ratio ε
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Parameter override
    #[arg(long = "set", global = true, value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Bifurcation-parameter bracket: Hopf search for `analyze`, bisection
    /// for `oracle` and `sweep`
    #[arg(
        long,
        global = true,
        num_args = 2,
        value_names = ["LO", "HI"],
        allow_negative_numbers = true
    )]
    pub bracket: Option<Vec<f64>>,
    /// Bisection width at which the oracle stops
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub lambda_tol: f64,
    /// Integrator relative tolerance
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub rel_tol: f64,
    /// Integrator absolute tolerance
    #[arg(long, global = true, default_value_t = 1e-14)]
    pub abs_tol: f64,
    /// Machine-readable output
    #[arg(long, global = true, conflicts_with = "table")]
    pub json: bool,
    /// Human-readable output, 6 significant digits
    #[arg(long, global = true)]
    pub table: bool,
    /// Omit timing from reports
    #[arg(long, global = true)]
    pub no_timing: bool,
    /// Write the primary output here instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hopf point, Lyapunov coefficients and canard predictions
    Analyze(AnalyzeArgs),
    /// Observed explosion parameter by exit-side bisection
    Oracle,
    /// Prediction against observation over a list of ε values
    Sweep(SweepArgs),
    /// List the built-in models
    Models,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Also run the oracle, on a bracket derived from the prediction
    #[arg(long)]
    pub with_oracle: bool,
    /// Also run the oracle on this bracket
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub oracle_bracket: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated ε values
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub eps_list: Vec<f64>,
    /// Hopf search bracket for every row
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub hopf_bracket: Option<Vec<f64>>,
    /// Convention whose K is compared
    #[arg(long, default_value = "mc")]
    pub route: Route,
    /// Gnuplot data file of orbits on both sides of each observed flip
    #[arg(long, value_name = "PATH")]
    pub orbits: Option<PathBuf>,
    /// Sampling interval of the orbit file
    #[arg(long, default_value_t = 0.5)]
    pub orbit_dt: f64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Output(#[from] io::Error),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Pipeline(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(_) | CliError::Io { .. } => exit_code::CONFIG,
            CliError::Pipeline(e) => e.exit_code(),
            _ => exit_code::FAILURE,
        }
    }
}

/// `%g`-style rendering with 6 significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let e = rounded.abs().log10().floor() as i32;
    if (-5..6).contains(&e) {
        let decimals = (5 - e).max(0) as usize;
        trim(format!("{rounded:.decimals$}"))
    } else {
        let s = format!("{rounded:.5e}");
        let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

struct Setup {
    model: SystemModel,
    params: Params,
    geometry: Option<ExitGeometry>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn pair(v: &Option<Vec<f64>>, flag: &str) -> Result<Option<(f64, f64)>, CliError> {
    match v.as_deref() {
        None => Ok(None),
        Some([lo, hi]) if lo < hi && lo.is_finite() && hi.is_finite() => Ok(Some((*lo, *hi))),
        Some(v) => Err(CliError::Config(format!(
            "--{flag} needs LO < HI, got {v:?}"
        ))),
    }
}

fn setup(g: &GlobalArgs) -> Result<Setup, CliError> {
    let model = match (&g.model, &g.config) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("give either --model or --config, not both".into()))
        }
        (Some(name), None) => builtin(name)
            .ok_or_else(|| CliError::Config(format!("unknown model `{name}` (try `models`)")))?,
        (None, Some(path)) => load_model(&read(path)?)?,
        (None, None) => return Err(CliError::Config("no model: use --model or --config".into())),
    };
    let mut params = model.default_params();
    for assignment in &g.set {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects NAME=VALUE, got `{assignment}`")))?;
        let index = model
            .param_index(name.trim())
            .ok_or_else(|| CliError::Config(format!("unknown parameter `{}`", name.trim())))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("`{value}` is not a number")))?;
        params = params.with(index, value);
    }
    if let Some(eps) = g.eps {
        if !(eps > 0.0) {
            return Err(CliError::Config(format!("--eps must be positive, got {eps}")));
        }
        params = params.with(model.epsilon_index(), eps);
    }
    let geometry = match &g.geometry {
        Some(path) => {
            let geo: ExitGeometry = serde_json::from_str(&read(path)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Some(geo)
        }
        None => None,
    };
    Ok(Setup {
        model,
        params,
        geometry,
    })
}

fn integrator_settings(g: &GlobalArgs) -> Result<IntegratorSettings, CliError> {
    let s = IntegratorSettings {
        rtol: g.rel_tol,
        atol: g.abs_tol,
        ..Default::default()
    };
    s.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if !(g.lambda_tol > 0.0) {
        return Err(CliError::Config("--lambda-tol must be positive".into()));
    }
    Ok(s)
}

/// Hopf search bracket of a built-in.
pub fn default_hopf_bracket(model: &SystemModel) -> Option<(f64, f64)> {
    match model.builtin_kind()? {
        Builtin::VanDerPol => Some((-0.2, 0.2)),
        Builtin::FitzHughNagumo => Some((0.04, 0.08)),
    }
}

fn hopf_bracket(model: &SystemModel, given: Option<(f64, f64)>) -> Result<(f64, f64), CliError> {
    given.or_else(|| default_hopf_bracket(model)).ok_or_else(|| {
        CliError::Config(format!("--bracket is required for model `{}`", model.name()))
    })
}

fn geometry_for(s: &Setup, params: &Params) -> Result<ExitGeometry, CliError> {
    match &s.geometry {
        Some(g) => Ok(g.clone()),
        None => ExitGeometry::for_model(&s.model, params).ok_or_else(|| {
            CliError::Config(format!(
                "model `{}` has no default exit geometry; pass --geometry",
                s.model.name()
            ))
        }),
    }
}

fn run_analysis(s: &Setup, bracket: (f64, f64)) -> Result<Analysis, CliError> {
    let guess = vec![0.0; s.model.dim()];
    Ok(analyze(
        &s.model,
        &s.params,
        bracket,
        &guess,
        &AnalysisSettings::default(),
    )?)
}

fn run_oracle(
    s: &Setup,
    g: &GlobalArgs,
    bracket: (f64, f64),
) -> Result<OracleResult, CliError> {
    let settings = integrator_settings(g)?;
    let geometry = geometry_for(s, &s.params)?;
    Ok(bisect_canard(
        &s.model,
        &s.params,
        bracket,
        g.lambda_tol,
        &settings,
        &geometry,
    )?)
}

/// Oracle bracket from the mc prediction.
fn predicted_bracket(a: &Analysis) -> (f64, f64) {
    let pred = a
        .prediction(Route::Mc)
        .expect("mc prediction is always present");
    auto_bracket(a.hopf.lambda_h, pred.lambda_c)
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn emit(g: &GlobalArgs, out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match &g.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

/// Runs one command, writing its output to `out` (or `--out`) and notes to
/// `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Models => emit(g, out, &models_text(g.json)?),
        Command::Analyze(args) => {
            let start = Instant::now();
            let s = setup(g)?;
            let bracket = hopf_bracket(&s.model, pair(&g.bracket, "bracket")?)?;
            let oracle_bracket = pair(&args.oracle_bracket, "oracle-bracket")?;
            let a = run_analysis(&s, bracket)?;
            let (hopf_s, lyapunov_s) = (a.hopf_seconds, a.lyapunov_seconds);
            let (oracle, oracle_s) = if args.with_oracle || oracle_bracket.is_some() {
                let t = Instant::now();
                let b = oracle_bracket.unwrap_or_else(|| predicted_bracket(&a));
                (Some(run_oracle(&s, g, b)?), Some(t.elapsed().as_secs_f64()))
            } else {
                (None, None)
            };
            let mut report = AnalysisReport::new(&s.model, a, oracle);
            if !g.no_timing {
                report.timing = Some(Timing {
                    hopf_s,
                    lyapunov_s,
                    oracle_s,
                    total_s: start.elapsed().as_secs_f64(),
                });
            }
            let text = if g.table {
                analysis_table(&report)
            } else {
                json(&report)?
            };
            emit(g, out, &text)
        }
        Command::Oracle => {
            let s = setup(g)?;
            let bracket = match pair(&g.bracket, "bracket")? {
                Some(b) => b,
                None => predicted_bracket(&run_analysis(&s, hopf_bracket(&s.model, None)?)?),
            };
            let r = run_oracle(&s, g, bracket)?;
            let text = if g.table { oracle_table(&r) } else { json(&r)? };
            emit(g, out, &text)
        }
        Command::Sweep(args) => {
            let s = setup(g)?;
            let integrator = integrator_settings(g)?;
            let hopf = hopf_bracket(&s.model, pair(&args.hopf_bracket, "hopf-bracket")?)?;
            let oracle_bracket = pair(&g.bracket, "bracket")?;
            let eps_list = if !args.eps_list.is_empty() {
                args.eps_list.clone()
            } else if let Some(e) = g.eps {
                vec![e]
            } else {
                default_eps_list(&s.model).ok_or_else(|| {
                    CliError::Config("--eps-list is required for this model".into())
                })?
            };
            if let Some(bad) = eps_list.iter().find(|e| !(**e > 0.0)) {
                return Err(CliError::Config(format!("ε must be positive, got {bad}")));
            }
            let cases: Vec<SweepCase> = eps_list
                .iter()
                .map(|&epsilon| SweepCase {
                    epsilon,
                    hopf_bracket: hopf,
                    oracle_bracket,
                })
                .collect();
            let settings = SweepSettings {
                route: args.route,
                integrator,
                lambda_tol: g.lambda_tol,
                ..Default::default()
            };
            let report = sweep_epsilon(&s.model, &s.params, &cases, &settings, s.geometry.as_ref());
            if g.table {
                emit(g, out, &sweep_table(&report))?;
            } else {
                if g.json {
                    emit(g, out, &json(&report)?)?;
                } else {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    emit(g, out, &String::from_utf8_lossy(&buf))?;
                }
                writeln!(err, "{}", slope_line(&report))?;
            }
            if let Some(path) = &args.orbits {
                write_orbits(&s, &report, &integrator, args.orbit_dt, path)?;
            }
            Ok(())
        }
    }
}

/// Default ε lists of the built-ins.
pub fn default_eps_list(model: &SystemModel) -> Option<Vec<f64>> {
    match model.builtin_kind()? {
        Builtin::VanDerPol => Some(vec![0.05, 0.02, 0.01]),
        Builtin::FitzHughNagumo => Some(vec![1e-2, 5e-3, 1e-3, 5e-4]),
    }
}

fn write_orbits(
    s: &Setup,
    report: &SweepReport,
    settings: &IntegratorSettings,
    dt: f64,
    path: &Path,
) -> Result<(), CliError> {
    if !(dt > 0.0) {
        return Err(CliError::Config("--orbit-dt must be positive".into()));
    }
    let mut samples = Vec::new();
    for entry in &report.entries {
        let Some(oracle) = &entry.oracle else { continue };
        let params = s.params.with(s.model.epsilon_index(), entry.row.epsilon);
        let geometry = geometry_for(s, &params)?;
        for lambda in oracle.bracket {
            let p = params.with(s.model.bifurcation_index(), lambda);
            samples.push(orbit_sample(&s.model, &p, &geometry, settings, dt)?);
        }
    }
    let mut buf = Vec::new();
    write_gnuplot(&mut buf, s.model.state_names(), &samples)?;
    fs::write(path, buf).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn slope_line(report: &SweepReport) -> String {
    match report.slope {
        Some(s) => format!("log-log error slope: {}", sig6(s)),
        None => "log-log error slope: n/a (fewer than two rows)".into(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_else(|| "-".into())
}

fn analysis_table(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<20}{v}\n"));
    line("model", r.model.clone());
    line("epsilon", sig6(r.epsilon));
    line("lambda_H", sig6(r.lambda_h));
    line("omega0", sig6(r.omega0));
    line("transversality", sig6(r.transversality));
    for (name, v) in r.lyapunov.values() {
        line(&format!("l1_{name}"), sig6(v));
    }
    if let Some(v) = r.lyapunov.l1_clw_as_printed {
        line("l1_clw_as_printed", sig6(v));
    }
    line("criticality", r.lyapunov.criticality.label().into());
    if let Some(o) = &r.oracle {
        line("lambda_c observed", sig6(o.lambda_c));
    }
    s.push_str(&format!("\n{:<22}{:<14}{}\n", "route", "K", "lambda_c"));
    for p in &r.predictions {
        s.push_str(&format!(
            "{:<22}{:<14}{}\n",
            p.route.name(),
            sig6(p.k),
            sig6(p.lambda_c)
        ));
    }
    if let Some(t) = &r.timing {
        s.push_str(&format!("\ntotal time {} s\n", sig6(t.total_s)));
    }
    s
}

fn oracle_table(r: &OracleResult) -> String {
    let side = |s| match s {
        crate::oracle::exit::ExitSide::Left => "left",
        crate::oracle::exit::ExitSide::Right => "right",
    };
    format!(
        "{:<20}{}\n{:<20}{}\n{:<20}[{}, {}]\n{:<20}{} below, {} above\n{:<20}{}\n{:<20}{} accepted, {} rejected\n",
        "epsilon",
        sig6(r.epsilon),
        "lambda_c observed",
        sig6(r.lambda_c),
        "bracket",
        sig6(r.bracket[0]),
        sig6(r.bracket[1]),
        "exit",
        side(r.below),
        side(r.above),
        "classifications",
        r.trace.len(),
        "steps",
        r.stats.accepted,
        r.stats.rejected
    )
}

fn sweep_table(r: &SweepReport) -> String {
    let mut s = format!(
        "{:<12}{:<12}{:<12}{:<12}{:<12}{:<14}{:<14}{:<12}\n",
        "epsilon", "lambda_H", "omega0", "l1_mc", "K", "lambda_c_pred", "lambda_c_obs", "abs_err"
    );
    for row in r.rows() {
        s.push_str(&format!(
            "{:<12}{:<12}{:<12}{:<12}{:<12}{:<14}{:<14}{:<12}",
            sig6(row.epsilon),
            opt(row.lambda_h),
            opt(row.omega0),
            opt(row.l1_mc),
            opt(row.k_route),
            opt(row.lambda_c_pred),
            opt(row.lambda_c_obs),
            opt(row.abs_err)
        ));
        if let Some(e) = &row.error {
            s.push_str(&format!("error: {e}"));
        }
        s.push('\n');
    }
    s.push_str(&format!("route {}, {}\n", r.route, slope_line(r)));
    s
}

#[derive(Serialize)]
struct ModelListing {
    name: String,
    states: Vec<String>,
    params: serde_json::Map<String, serde_json::Value>,
    epsilon_param: String,
    bifurcation_param: String,
    equations: Vec<String>,
}

fn models_text(as_json: bool) -> Result<String, CliError> {
    let listings: Vec<ModelListing> = ["vdp", "fhn"]
        .iter()
        .filter_map(|n| builtin(n))
        .map(|m| {
            let params = m
                .param_names()
                .iter()
                .zip(m.default_params().values())
                .map(|(n, v)| (n.clone(), serde_json::json!(v)))
                .collect();
            ModelListing {
                name: m.name().to_string(),
                states: m.state_names().to_vec(),
                params,
                epsilon_param: m.param_names()[m.epsilon_index()].clone(),
                bifurcation_param: m.param_names()[m.bifurcation_index()].clone(),
                equations: m.equations().to_vec(),
            }
        })
        .collect();
    if as_json {
        return json(&listings);
    }
    let mut s = String::new();
    for m in &listings {
        s.push_str(&format!("{}\n", m.name));
        for (state, eq) in m.states.iter().zip(&m.equations) {
            s.push_str(&format!("  {state}' = {eq}\n"));
        }
        let defaults: Vec<String> = m
            .params
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        s.push_str(&format!("  parameters: {}\n", defaults.join(", ")));
        s.push_str(&format!(
            "  epsilon: {}, bifurcation parameter: {}\n\n",
            m.epsilon_param, m.bifurcation_param
        ));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<(), CliError>, String, String) {
        let cli = Cli::try_parse_from(std::iter::once("canard").chain(args.iter().copied()))
            .expect("arguments parse");
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let r = run(&cli, &mut out, &mut err);
        (
            r,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig6(0.2236067977), "0.223607");
        assert_eq!(sig6(-0.00595238095), "-0.00595238");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(123456789.0), "1.23457e8");
        assert_eq!(sig6(9.9999996), "10");
        assert_eq!(sig6(1.5e-12), "1.5e-12");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn models_listing() {
        let (r, out, _) = run_args(&["models"]);
        r.unwrap();
        assert!(out.contains("x^2 + x^3/3 - y"));
        assert!(out.contains("s = 1.37"));
        let (r, out, _) = run_args(&["models", "--json"]);
        r.unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[1]["params"]["s"], 1.37);
    }

    #[test]
    fn analyze_table_and_json() {
        let (r, out, _) = run_args(&["analyze", "--model", "vdp", "--eps", "0.05", "--bracket", "-0.2", "0.2", "--table"]);
        r.unwrap();
        assert!(out.contains("omega0              0.223607"), "{out}");
        assert!(out.contains("l1_mc               0.47619"), "{out}");
        let (r, out, _) = run_args(&["analyze", "--model", "vdp", "--no-timing"]);
        r.unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v.get("timing").is_none());
        assert_eq!(v["model"], "vdp");
    }

    #[test]
    fn config_errors() {
        let (r, _, _) = run_args(&["analyze"]);
        assert_eq!(r.unwrap_err().exit_code(), exit_code::CONFIG);
        let (r, _, _) = run_args(&["analyze", "--model", "nope"]);
        assert_eq!(r.unwrap_err().exit_code(), exit_code::CONFIG);
        let (r, _, _) = run_args(&["analyze", "--model", "vdp", "--set", "zeta=1"]);
        assert_eq!(r.unwrap_err().exit_code(), exit_code::CONFIG);
        let (r, _, _) = run_args(&["analyze", "--model", "vdp", "--bracket", "0.2", "-0.2"]);
        assert_eq!(r.unwrap_err().exit_code(), exit_code::CONFIG);
        let (r, _, _) = run_args(&["oracle", "--model", "vdp", "--rel-tol", "1e-17"]);
        assert_eq!(r.unwrap_err().exit_code(), exit_code::CONFIG);
    }

    #[test]
    fn no_hopf_names_bracket() {
        let (r, _, _) = run_args(&["analyze", "--model", "vdp", "--bracket", "0.05", "0.2"]);
        let e = r.unwrap_err();
        assert_eq!(e.exit_code(), exit_code::NO_HOPF);
        assert!(e.to_string().contains("[0.05, 0.2]"));
    }

    #[test]
    fn single_row_sweep_has_no_slope() {
        let (r, out, err) = run_args(&["sweep", "--model", "vdp", "--eps-list", "0.05", "--lambda-tol", "1e-7"]);
        r.unwrap();
        assert_eq!(out.lines().count(), 2);
        assert!(err.contains("n/a"));
    }
}
