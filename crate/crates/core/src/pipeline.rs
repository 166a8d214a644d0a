//! Hopf point, Lyapunov coefficients and canard predictions in one pass, and
//! the report the command line emits.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::canard::{k_from_l1, predict_lambda_c, vdp_normal_form, CanardError, CanardPrediction, Route};
use crate::hopf::{locate_hopf, HopfError, HopfPoint, HopfSettings};
use crate::lyapunov::{
    lyapunov_report, HopfLinearization, LyapunovError, LyapunovReport, DEGENERACY_THRESHOLD,
};
use crate::model::{Builtin, Params, SystemModel};
use crate::multilinear::{ExpansionPoint, FdOptions, MultilinearError};
use crate::oracle::exit::{OracleError, OracleResult};

/// Process exit codes.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const NO_HOPF: i32 = 2;
    pub const DEGENERATE: i32 = 3;
    pub const RESONANCE: i32 = 4;
    pub const ORACLE_BRACKET: i32 = 5;
    pub const CONFIG: i32 = 6;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Hopf(#[from] HopfError),
    #[error(transparent)]
    Multilinear(#[from] MultilinearError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Canard(#[from] CanardError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn hopf_code(e: &HopfError) -> i32 {
    match e {
        HopfError::InvalidBracket { .. } => exit_code::CONFIG,
        HopfError::NoSignChange { .. }
        | HopfError::RealCrossing { .. }
        | HopfError::NoComplexPair { .. } => exit_code::NO_HOPF,
        HopfError::Defective => exit_code::DEGENERATE,
        _ => exit_code::FAILURE,
    }
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Hopf(e) | PipelineError::Lyapunov(LyapunovError::Hopf(e)) => hopf_code(e),
            PipelineError::Lyapunov(LyapunovError::Resonance { .. }) => exit_code::RESONANCE,
            PipelineError::Lyapunov(
                LyapunovError::Degenerate(_) | LyapunovError::SingularJacobian,
            ) => exit_code::DEGENERATE,
            PipelineError::Oracle(OracleError::Geometry(_)) => exit_code::CONFIG,
            PipelineError::Oracle(_) => exit_code::ORACLE_BRACKET,
            PipelineError::Canard(
                CanardError::NonPositiveEpsilon(_) | CanardError::UnknownRoute(_),
            ) => exit_code::CONFIG,
            _ => exit_code::FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    pub hopf: HopfSettings,
    pub fd: FdOptions,
    /// `|l1|` below this is a degenerate Hopf point.
    pub degeneracy: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            hopf: HopfSettings::default(),
            fd: FdOptions::default(),
            degeneracy: DEGENERACY_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub epsilon: f64,
    pub hopf: HopfPoint,
    pub lyapunov: LyapunovReport,
    pub predictions: Vec<CanardPrediction>,
    pub hopf_seconds: f64,
    pub lyapunov_seconds: f64,
}

impl Analysis {
    pub fn prediction(&self, route: Route) -> Option<&CanardPrediction> {
        self.predictions.iter().find(|p| p.route == route)
    }
}

/// The Lyapunov coefficient a route converts to `K`.
pub fn l1_for_route(report: &LyapunovReport, route: Route) -> Option<f64> {
    match route {
        Route::Ku => Some(report.l1_ku),
        Route::Mc => Some(report.l1_mc),
        Route::Gh => report.l1_gh,
        Route::Clw => report.l1_clw,
        Route::Pe => report.l1_pe,
        Route::AnalyticNormalForm => None,
    }
}

/// Locates the Hopf point in `bracket`, computes every applicable Lyapunov
/// convention there and turns each into a canard prediction. The van der Pol
/// built-in also gets the normal-form route.
pub fn analyze(
    model: &SystemModel,
    params: &Params,
    bracket: (f64, f64),
    guess: &[f64],
    settings: &AnalysisSettings,
) -> Result<Analysis, PipelineError> {
    let epsilon = params.get(model.epsilon_index());
    if !(epsilon > 0.0) {
        return Err(CanardError::NonPositiveEpsilon(epsilon).into());
    }
    let start = Instant::now();
    let hopf = locate_hopf(model, params, bracket, guess, &settings.hopf)?;
    let hopf_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let bound = model.bind(hopf.params());
    let forms = ExpansionPoint::new(&bound, &hopf.equilibrium.state, settings.fd)?;
    let lin = HopfLinearization::from_hopf(&hopf);
    let lyapunov = lyapunov_report(&lin, &forms, settings.degeneracy)?;
    let lyapunov_seconds = start.elapsed().as_secs_f64();

    let mut predictions = Vec::new();
    for route in Route::L1_ROUTES {
        if let Some(l1) = l1_for_route(&lyapunov, route) {
            let k = k_from_l1(route, l1, epsilon, hopf.omega0)?;
            predictions.push(predict_lambda_c(route, hopf.lambda_h, k, epsilon));
        }
    }
    if model.builtin_kind() == Some(Builtin::VanDerPol) {
        let k = vdp_normal_form().k;
        predictions.push(predict_lambda_c(
            Route::AnalyticNormalForm,
            hopf.lambda_h,
            k,
            epsilon,
        ));
    }
    Ok(Analysis {
        epsilon,
        hopf,
        lyapunov,
        predictions,
        hopf_seconds,
        lyapunov_seconds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub hopf_s: f64,
    pub lyapunov_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_s: Option<f64>,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub model: String,
    pub epsilon: f64,
    #[serde(rename = "lambda_H")]
    pub lambda_h: f64,
    pub omega0: f64,
    pub equilibrium: Vec<f64>,
    pub transversality: f64,
    pub lyapunov: LyapunovReport,
    pub predictions: Vec<CanardPrediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    pub version: String,
}

impl AnalysisReport {
    pub fn new(model: &SystemModel, analysis: Analysis, oracle: Option<OracleResult>) -> Self {
        AnalysisReport {
            model: model.name().to_string(),
            epsilon: analysis.epsilon,
            lambda_h: analysis.hopf.lambda_h,
            omega0: analysis.hopf.omega0,
            equilibrium: analysis.hopf.equilibrium.state.clone(),
            transversality: analysis.hopf.transversality,
            lyapunov: analysis.lyapunov,
            predictions: analysis.predictions,
            oracle,
            timing: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_fhn, builtin_vdp, load_model};

    #[test]
    fn vdp_routes() {
        let m = builtin_vdp();
        let a = analyze(&m, &m.default_params(), (-0.2, 0.2), &[0.0, 0.0], &Default::default())
            .unwrap();
        let routes: Vec<Route> = a.predictions.iter().map(|p| p.route).collect();
        assert_eq!(
            routes,
            [Route::Ku, Route::Mc, Route::Gh, Route::Clw, Route::Pe, Route::AnalyticNormalForm]
        );
        let mc = a.prediction(Route::Mc).unwrap();
        assert!((mc.lambda_c + 0.0060).abs() < 3e-4);
        let nf = a.prediction(Route::AnalyticNormalForm).unwrap();
        assert!((nf.lambda_c + 0.00625).abs() < 1e-9);
    }

    #[test]
    fn spatial_model_omits_planar_routes() {
        let m = builtin_fhn();
        let a = analyze(&m, &m.default_params(), (0.04, 0.07), &[0.0; 3], &Default::default())
            .unwrap();
        let routes: Vec<Route> = a.predictions.iter().map(|p| p.route).collect();
        assert_eq!(routes, [Route::Ku, Route::Mc]);
        assert!((a.prediction(Route::Mc).unwrap().lambda_c - 0.05196).abs() < 1e-4);
    }

    #[test]
    fn error_codes() {
        let m = builtin_vdp();
        let p = m.default_params();
        let s = AnalysisSettings::default();
        let e = analyze(&m, &p, (0.05, 0.2), &[0.0, 0.0], &s).unwrap_err();
        assert_eq!(e.exit_code(), exit_code::NO_HOPF);
        assert!(e.to_string().contains("[0.05, 0.2]"));
        let e = analyze(&m, &p, (0.2, -0.2), &[0.0, 0.0], &s).unwrap_err();
        assert_eq!(e.exit_code(), exit_code::CONFIG);
        // linear centre family: l1 vanishes identically
        let lin = load_model(
            r#"{"name":"lin","states":["x","y"],"params":{"a":0,"e":1},
            "epsilon_param":"e","bifurcation_param":"a","equations":["a*x - y","x + a*y"]}"#,
        )
        .unwrap();
        let e = analyze(&lin, &lin.default_params(), (-1.0, 0.5), &[0.0, 0.0], &s).unwrap_err();
        assert_eq!(e.exit_code(), exit_code::DEGENERATE);
        let res = PipelineError::Lyapunov(LyapunovError::Resonance {
            shift: num_complex::Complex64::new(0.0, 2.0),
            mu: num_complex::Complex64::new(0.0, 2.0),
        });
        assert_eq!(res.exit_code(), exit_code::RESONANCE);
        let bracket = PipelineError::Oracle(OracleError::InvalidBracket { lo: 1.0, hi: 0.0 });
        assert_eq!(bracket.exit_code(), exit_code::ORACLE_BRACKET);
    }
}
