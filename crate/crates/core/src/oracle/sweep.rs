//! Prediction against observation over a list of ε values, with the fitted
//! convergence order, plus orbit samples for plotting.

use std::io::{self, Write};

use serde::Serialize;

use crate::canard::Route;
use crate::model::{Params, SystemModel};
use crate::oracle::exit::{
    bisect_canard, project_seed, ExitGeometry, ExitSide, OracleError, OracleResult,
};
use crate::oracle::integrator::{integrate, IntegratorSettings, Recording, Reversed};
use crate::pipeline::{analyze, AnalysisSettings, PipelineError};

/// One ε with its Hopf bracket and, optionally, its oracle bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCase {
    pub epsilon: f64,
    pub hopf_bracket: (f64, f64),
    pub oracle_bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub route: Route,
    pub analysis: AnalysisSettings,
    pub integrator: IntegratorSettings,
    pub lambda_tol: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            route: Route::Mc,
            analysis: AnalysisSettings::default(),
            integrator: IntegratorSettings::default(),
            lambda_tol: 1e-9,
        }
    }
}

/// One CSV row; fields after a failure are empty and `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    #[serde(rename = "lambda_H")]
    pub lambda_h: Option<f64>,
    pub omega0: Option<f64>,
    pub l1_mc: Option<f64>,
    #[serde(rename = "K_route")]
    pub k_route: Option<f64>,
    pub lambda_c_pred: Option<f64>,
    pub lambda_c_obs: Option<f64>,
    pub abs_err: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    #[serde(flatten)]
    pub row: SweepRow,
    pub oracle: Option<OracleResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub model: String,
    pub route: Route,
    pub entries: Vec<SweepEntry>,
    /// Least-squares slope of `log |error|` against `log ε`.
    pub slope: Option<f64>,
}

impl SweepReport {
    pub fn rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.entries.iter().map(|e| &e.row)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Oracle bracket from the prediction alone: with `d = λ_c − λ_H`, the span
/// from `λ_H + 0.15d` to `λ_H + 3d`.
pub fn auto_bracket(lambda_h: f64, lambda_c_pred: f64) -> (f64, f64) {
    let d = lambda_c_pred - lambda_h;
    let (a, b) = (lambda_h + 0.15 * d, lambda_h + 3.0 * d);
    (a.min(b), a.max(b))
}

/// Least-squares slope of `ln y` on `ln x`; `None` below two points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn run_case(
    model: &SystemModel,
    base: &Params,
    case: &SweepCase,
    settings: &SweepSettings,
    geometry: Option<&ExitGeometry>,
    row: &mut SweepRow,
) -> Result<OracleResult, PipelineError> {
    let params = base.with(model.epsilon_index(), case.epsilon);
    let guess = vec![0.0; model.dim()];
    let a = analyze(model, &params, case.hopf_bracket, &guess, &settings.analysis)?;
    row.lambda_h = Some(a.hopf.lambda_h);
    row.omega0 = Some(a.hopf.omega0);
    row.l1_mc = Some(a.lyapunov.l1_mc);
    let pred = a.prediction(settings.route).ok_or_else(|| {
        OracleError::Geometry(format!(
            "route `{}` is not available for {}",
            settings.route,
            model.name()
        ))
    })?;
    row.k_route = Some(pred.k);
    row.lambda_c_pred = Some(pred.lambda_c);
    let geometry = match geometry {
        Some(g) => g.clone(),
        None => ExitGeometry::for_model(model, &params).ok_or_else(|| {
            OracleError::Geometry(format!("no default exit geometry for {}", model.name()))
        })?,
    };
    let bracket = case
        .oracle_bracket
        .unwrap_or_else(|| auto_bracket(a.hopf.lambda_h, pred.lambda_c));
    let result = bisect_canard(
        model,
        &params,
        bracket,
        settings.lambda_tol,
        &settings.integrator,
        &geometry,
    )?;
    row.lambda_c_obs = Some(result.lambda_c);
    row.abs_err = Some((pred.lambda_c - result.lambda_c).abs());
    Ok(result)
}

/// Runs the full pipeline per ε, rows in parallel. Row failures are recorded
/// and do not stop the sweep.
pub fn sweep_epsilon(
    model: &SystemModel,
    base: &Params,
    cases: &[SweepCase],
    settings: &SweepSettings,
    geometry: Option<&ExitGeometry>,
) -> SweepReport {
    let entries: Vec<SweepEntry> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .iter()
            .map(|case| {
                scope.spawn(move || {
                    let mut row = SweepRow {
                        epsilon: case.epsilon,
                        lambda_h: None,
                        omega0: None,
                        l1_mc: None,
                        k_route: None,
                        lambda_c_pred: None,
                        lambda_c_obs: None,
                        abs_err: None,
                        error: None,
                    };
                    let oracle = match run_case(model, base, case, settings, geometry, &mut row) {
                        Ok(r) => Some(r),
                        Err(e) => {
                            row.error = Some(e.to_string());
                            None
                        }
                    };
                    SweepEntry { row, oracle }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep row panicked"))
            .collect()
    });
    let points: Vec<(f64, f64)> = entries
        .iter()
        .filter_map(|e| Some((e.row.epsilon, e.row.abs_err?)))
        .collect();
    SweepReport {
        model: model.name().to_string(),
        route: settings.route,
        slope: loglog_slope(&points),
        entries,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSample {
    pub epsilon: f64,
    pub lambda: f64,
    pub side: Option<ExitSide>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Uniformly sampled trajectory from the relaxed seed to its exit.
pub fn orbit_sample(
    model: &SystemModel,
    params: &Params,
    geometry: &ExitGeometry,
    settings: &IntegratorSettings,
    dt: f64,
) -> Result<OrbitSample, OracleError> {
    geometry.validate(model.dim())?;
    let seed = project_seed(model, params, geometry)?;
    let bound = model.bind(params);
    let reversed = Reversed(&bound);
    let field: &dyn crate::model::VectorField = if geometry.reverse_time {
        &reversed
    } else {
        &bound
    };
    let mut s = *settings;
    s.recording = Recording::Uniform(dt);
    let sections = geometry.sections();
    let settle = integrate(field, &seed, 0.0, geometry.settle_time, &s, &[])?;
    let run = integrate(
        field,
        &settle.y_final,
        geometry.settle_time,
        geometry.max_time,
        &s,
        &sections,
    )?;
    let mut times = settle.times;
    let mut states = settle.states;
    times.extend(run.times);
    states.extend(run.states);
    Ok(OrbitSample {
        epsilon: params.get(model.epsilon_index()),
        lambda: params.get(model.bifurcation_index()),
        side: run.event.map(|e| {
            if e.section == 0 {
                ExitSide::Left
            } else {
                ExitSide::Right
            }
        }),
        times,
        states,
    })
}

/// Gnuplot data: one index block per orbit, separated by two blank lines.
pub fn write_gnuplot<W: Write>(
    mut out: W,
    state_names: &[String],
    samples: &[OrbitSample],
) -> io::Result<()> {
    for (k, s) in samples.iter().enumerate() {
        if k > 0 {
            writeln!(out, "\n")?;
        }
        let side = match s.side {
            Some(ExitSide::Left) => "left",
            Some(ExitSide::Right) => "right",
            None => "none",
        };
        writeln!(out, "# eps = {} lambda = {} exit = {}", s.epsilon, s.lambda, side)?;
        writeln!(out, "# t {}", state_names.join(" "))?;
        for (t, z) in s.times.iter().zip(&s.states) {
            write!(out, "{t}")?;
            for v in z {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}
