//! From Lyapunov coefficients to the canard constant `K` and the predicted
//! maximal-canard parameter `λ_c = λ_H − Kε`; the normal-form route through
//! the coefficients `a₁..a₅`; and a checker for the canard-point conditions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::model::{Params, SystemModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CanardError {
    #[error("ε must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("ω₀ must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("route `{0}` does not derive K from a Lyapunov coefficient")]
    NotAnL1Route(Route),
    #[error("unknown route `{0}`")]
    UnknownRoute(String),
    #[error("canard-point check needs a planar model, got dimension {0}")]
    NotPlanar(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    AnalyticNormalForm,
    Ku,
    Mc,
    Gh,
    Clw,
    Pe,
}

impl Route {
    pub const L1_ROUTES: [Route; 5] = [Route::Ku, Route::Mc, Route::Gh, Route::Clw, Route::Pe];

    pub fn name(self) -> &'static str {
        match self {
            Route::AnalyticNormalForm => "analytic_normal_form",
            Route::Ku => "ku",
            Route::Mc => "mc",
            Route::Gh => "gh",
            Route::Clw => "clw",
            Route::Pe => "pe",
        }
    }

    /// Planar-only conventions.
    pub fn planar_only(self) -> bool {
        matches!(self, Route::Gh | Route::Clw | Route::Pe)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = CanardError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic_normal_form" | "analytic" => Ok(Route::AnalyticNormalForm),
            "ku" => Ok(Route::Ku),
            "mc" => Ok(Route::Mc),
            "gh" => Ok(Route::Gh),
            "clw" => Ok(Route::Clw),
            "pe" => Ok(Route::Pe),
            other => Err(CanardError::UnknownRoute(other.to_string())),
        }
    }
}

/// `K` from a first Lyapunov coefficient in the given convention.
pub fn k_from_l1(route: Route, l1: f64, epsilon: f64, omega0: f64) -> Result<f64, CanardError> {
    if !(epsilon > 0.0) {
        return Err(CanardError::NonPositiveEpsilon(epsilon));
    }
    let needs_omega = matches!(route, Route::Mc | Route::Pe);
    if needs_omega && !(omega0 > 0.0) {
        return Err(CanardError::NonPositiveOmega(omega0));
    }
    match route {
        Route::Ku => Ok(l1 * epsilon.sqrt() / 4.0),
        Route::Mc => Ok(l1 * epsilon.sqrt() / (4.0 * omega0)),
        Route::Gh | Route::Clw => Ok(l1),
        Route::Pe => Ok(l1 * 64.0 * omega0 / (3.0 * std::f64::consts::PI)),
        Route::AnalyticNormalForm => Err(CanardError::NotAnL1Route(route)),
    }
}

pub const ERROR_ORDER: &str = "O(eps^(3/2))";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanardPrediction {
    pub route: Route,
    pub lambda_h: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub epsilon: f64,
    pub lambda_c: f64,
    pub error_order: &'static str,
}

/// `λ_c = λ_H − Kε`.
pub fn predict_lambda_c(route: Route, lambda_h: f64, k: f64, epsilon: f64) -> CanardPrediction {
    CanardPrediction {
        route,
        lambda_h,
        k,
        epsilon,
        lambda_c: lambda_h - k * epsilon,
        error_order: ERROR_ORDER,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalFormCoeffs {
    pub a: [f64; 5],
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl NormalFormCoeffs {
    /// Coefficients from `a₁..a₅`, with `A = −a₂ + 3a₃ − 2a₄ − 2a₅` and `K = A/8`.
    pub fn from_a(a: [f64; 5]) -> Self {
        let big_a = -a[1] + 3.0 * a[2] - 2.0 * a[3] - 2.0 * a[4];
        NormalFormCoeffs {
            a,
            big_a,
            k: big_a / 8.0,
        }
    }
}

/// One of the functions `h₁..h₆` of the canard-point normal form, as a
/// function of `(x, y, λ, ε)`.
pub type HFunction = dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync;

/// `a₁ = ∂ₓh₃, a₂ = ∂ₓh₁, a₃ = ∂ₓh₂, a₄ = ∂ₓh₄, a₅ = ∂ₓh₆` at the origin by
/// central differences; `h` is indexed `h[0] = h₁ … h[5] = h₆`.
pub fn normal_form_constants(h: &[&HFunction; 6], fd_step: f64) -> NormalFormCoeffs {
    let dx = |f: &HFunction| (f(fd_step, 0.0, 0.0, 0.0) - f(-fd_step, 0.0, 0.0, 0.0)) / (2.0 * fd_step);
    NormalFormCoeffs::from_a([dx(h[2]), dx(h[0]), dx(h[1]), dx(h[3]), dx(h[5])])
}

/// The normal-form functions of the built-in van der Pol model.
pub fn vdp_h_functions() -> [Box<HFunction>; 6] {
    [
        Box::new(|_, _, _, _| 1.0),
        Box::new(|x, _, _, _| 1.0 + x / 3.0),
        Box::new(|_, _, _, _| 0.0),
        Box::new(|_, _, _, _| 1.0),
        Box::new(|_, _, _, _| 1.0),
        Box::new(|_, _, _, _| 0.0),
    ]
}

pub fn vdp_normal_form() -> NormalFormCoeffs {
    let h = vdp_h_functions();
    let refs: [&HFunction; 6] = [&*h[0], &*h[1], &*h[2], &*h[3], &*h[4], &*h[5]];
    normal_form_constants(&refs, f64::EPSILON.cbrt())
}

/// Leading-order `(λ_H, λ_c)` from the normal-form coefficients.
pub fn analytic_predictions(c: &NormalFormCoeffs, epsilon: f64) -> (f64, f64) {
    let half = (c.a[0] + c.a[4]) / 2.0;
    (-half * epsilon, -(half + c.big_a / 8.0) * epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Zero,
    Nonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub value: f64,
    pub expect: Expect,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanardPointReport {
    pub conditions: Vec<Condition>,
    /// `f = f_x = 0`, `f_xx ≠ 0`, `f_y ≠ 0`.
    pub is_fold: bool,
    /// Fold plus `g = 0`, `g_x ≠ 0`, `g_λ ≠ 0`.
    pub is_canard_point: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSettings {
    pub h1: f64,
    pub h2: f64,
    /// Values at most this large count as zero; larger ones as nonzero.
    pub zero_tol: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            h1: f64::EPSILON.cbrt(),
            h2: f64::EPSILON.powf(0.25),
            zero_tol: 1e-6,
        }
    }
}

/// Finite-difference check of the fold and canard-point conditions for a
/// planar model whose first equation is fast. The slow equation is divided
/// by ε before testing.
pub fn check_canard_point(
    model: &SystemModel,
    params: &Params,
    point: [f64; 2],
    lambda: f64,
    settings: &CheckSettings,
) -> Result<CanardPointReport, CanardError> {
    if model.dim() != 2 {
        return Err(CanardError::NotPlanar(model.dim()));
    }
    let li = model.bifurcation_index();
    let eps = params.get(model.epsilon_index());
    if !(eps > 0.0) {
        return Err(CanardError::NonPositiveEpsilon(eps));
    }
    let eval = |x: f64, y: f64, lam: f64| -> Result<[f64; 2], CanardError> {
        let mut out = [0.0; 2];
        model.rhs(&[x, y], &params.with(li, lam), &mut out)?;
        Ok([out[0], out[1] / eps])
    };
    let [x, y] = point;
    let (h1, h2) = (settings.h1, settings.h2);
    let c = eval(x, y, lambda)?;
    let xp = eval(x + h1, y, lambda)?;
    let xm = eval(x - h1, y, lambda)?;
    let yp = eval(x, y + h1, lambda)?;
    let ym = eval(x, y - h1, lambda)?;
    let lp = eval(x, y, lambda + h1)?;
    let lm = eval(x, y, lambda - h1)?;
    let xp2 = eval(x + h2, y, lambda)?;
    let xm2 = eval(x - h2, y, lambda)?;

    let values = [
        ("f", c[0], Expect::Zero),
        ("f_x", (xp[0] - xm[0]) / (2.0 * h1), Expect::Zero),
        ("f_xx", (xp2[0] - 2.0 * c[0] + xm2[0]) / (h2 * h2), Expect::Nonzero),
        ("f_y", (yp[0] - ym[0]) / (2.0 * h1), Expect::Nonzero),
        ("g", c[1], Expect::Zero),
        ("g_x", (xp[1] - xm[1]) / (2.0 * h1), Expect::Nonzero),
        ("g_lambda", (lp[1] - lm[1]) / (2.0 * h1), Expect::Nonzero),
    ];
    let conditions: Vec<Condition> = values
        .into_iter()
        .map(|(name, value, expect)| {
            let pass = match expect {
                Expect::Zero => value.abs() <= settings.zero_tol,
                Expect::Nonzero => value.abs() > settings.zero_tol,
            };
            Condition {
                name,
                value,
                expect,
                pass,
            }
        })
        .collect();
    let is_fold = conditions[..4].iter().all(|c| c.pass);
    let is_canard_point = is_fold && conditions[4..].iter().all(|c| c.pass);
    Ok(CanardPointReport {
        conditions,
        is_fold,
        is_canard_point,
    })
}
