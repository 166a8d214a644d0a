//! ODE systems on the fast time scale, `z' = F(z; λ, ε)`.
//!
//! Two built-ins (time-reversed van der Pol, three-variable FitzHugh–Nagumo)
//! use native evaluators; anything else is loaded from a JSON config whose
//! right-hand sides are parsed into [`Expr`] trees.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_expression, EvalError, Expr, ParseError};

/// Parameter values in the model's declared parameter order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Params(Vec<f64>);

impl Params {
    pub fn new(values: Vec<f64>) -> Self {
        Params(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    /// Copy with one entry replaced.
    pub fn with(&self, index: usize, value: f64) -> Params {
        let mut v = self.0.clone();
        v[index] = value;
        Params(v)
    }
}

/// Anything that can be evaluated as an autonomous vector field.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError>;
}

/// Closure-backed field, mostly for synthetic test systems.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        (self.f)(z, out);
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

/// A model with its parameters fixed.
#[derive(Clone, Copy)]
pub struct BoundModel<'a> {
    pub model: &'a SystemModel,
    pub params: &'a Params,
}

impl VectorField for BoundModel<'_> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.model.rhs(z, self.params, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    VanDerPol,
    FitzHughNagumo,
}

#[derive(Debug, Clone)]
enum Rhs {
    Native(Builtin),
    Exprs(Vec<Expr>),
}

/// An immutable ODE model. Expression variables index into
/// `states ++ params`.
#[derive(Debug, Clone)]
pub struct SystemModel {
    name: String,
    states: Vec<String>,
    params: Vec<String>,
    defaults: Params,
    epsilon: usize,
    bifurcation: usize,
    equations: Vec<String>,
    rhs: Rhs,
    jacobian: Option<Vec<Expr>>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    Schema(String),
    #[error("duplicate identifier `{0}`")]
    Duplicate(String),
    #[error("`{0}` is not a valid identifier")]
    InvalidIdentifier(String),
    #[error("{role} parameter `{name}` is not declared in params")]
    MissingParam { role: &'static str, name: String },
    #[error("epsilon and bifurcation parameters must differ (both `{0}`)")]
    SameParam(String),
    #[error("{states} states but {equations} equations")]
    EquationCount { states: usize, equations: usize },
    #[error("equation {index}: {source}")]
    Equation { index: usize, source: ParseError },
    #[error("jacobian entry ({row},{col}): {source}")]
    Jacobian {
        row: usize,
        col: usize,
        source: ParseError,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelConfig {
    name: String,
    states: Vec<String>,
    params: serde_json::Map<String, serde_json::Value>,
    epsilon_param: String,
    bifurcation_param: String,
    equations: Vec<String>,
    #[serde(default)]
    jacobian: Option<Vec<Vec<String>>>,
}

const RESERVED: [&str; 6] = ["sin", "cos", "exp", "log", "sqrt", "abs"];

fn check_identifier(id: &str) -> Result<(), ModelError> {
    let mut chars = id.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    if !head_ok
        || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        || RESERVED.contains(&id)
    {
        return Err(ModelError::InvalidIdentifier(id.to_string()));
    }
    Ok(())
}

/// Parses and validates a JSON model config.
pub fn load_model(config_text: &str) -> Result<SystemModel, ModelError> {
    let cfg: ModelConfig =
        serde_json::from_str(config_text).map_err(|e| ModelError::Schema(e.to_string()))?;
    if cfg.name.trim().is_empty() {
        return Err(ModelError::Schema("empty model name".into()));
    }
    if cfg.states.is_empty() {
        return Err(ModelError::Schema("no states declared".into()));
    }
    let mut params = Vec::with_capacity(cfg.params.len());
    let mut values = Vec::with_capacity(cfg.params.len());
    for (name, value) in &cfg.params {
        let v = value
            .as_f64()
            .filter(|v| v.is_finite())
            .ok_or_else(|| ModelError::Schema(format!("param `{name}` must be a finite number")))?;
        params.push(name.clone());
        values.push(v);
    }

    let mut seen = std::collections::HashSet::new();
    for id in cfg.states.iter().chain(&params) {
        check_identifier(id)?;
        if !seen.insert(id.as_str()) {
            return Err(ModelError::Duplicate(id.clone()));
        }
    }
    let find = |role, name: &str| {
        params
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| ModelError::MissingParam {
                role,
                name: name.to_string(),
            })
    };
    let epsilon = find("epsilon", &cfg.epsilon_param)?;
    let bifurcation = find("bifurcation", &cfg.bifurcation_param)?;
    if epsilon == bifurcation {
        return Err(ModelError::SameParam(cfg.epsilon_param));
    }
    let n = cfg.states.len();
    if cfg.equations.len() != n {
        return Err(ModelError::EquationCount {
            states: n,
            equations: cfg.equations.len(),
        });
    }

    let idents: Vec<String> = cfg.states.iter().chain(&params).cloned().collect();
    let exprs = cfg
        .equations
        .iter()
        .enumerate()
        .map(|(index, text)| {
            parse_expression(text, &idents).map_err(|source| ModelError::Equation { index, source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let jacobian = match cfg.jacobian {
        None => None,
        Some(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(ModelError::Schema(format!("jacobian must be {n}x{n}")));
            }
            let mut entries = Vec::with_capacity(n * n);
            for (row, cols) in rows.iter().enumerate() {
                for (col, text) in cols.iter().enumerate() {
                    entries.push(
                        parse_expression(text, &idents)
                            .map_err(|source| ModelError::Jacobian { row, col, source })?,
                    );
                }
            }
            Some(entries)
        }
    };

    Ok(SystemModel {
        name: cfg.name,
        states: cfg.states,
        params,
        defaults: Params(values),
        epsilon,
        bifurcation,
        equations: cfg.equations,
        rhs: Rhs::Exprs(exprs),
        jacobian,
    })
}

/// Time-reversed van der Pol: `x' = x^2 + x^3/3 - y`, `y' = ε(x - λ)`.
pub fn builtin_vdp() -> SystemModel {
    SystemModel {
        name: "vdp".into(),
        states: vec!["x".into(), "y".into()],
        params: vec!["lambda".into(), "eps".into()],
        defaults: Params(vec![0.0, 0.05]),
        epsilon: 1,
        bifurcation: 0,
        equations: vec!["x^2 + x^3/3 - y".into(), "eps*(x - lambda)".into()],
        rhs: Rhs::Native(Builtin::VanDerPol),
        jacobian: None,
    }
}

/// FitzHugh–Nagumo with two fast variables and one slow one; `I` is the
/// bifurcation parameter and `s = 1.37` by default.
pub fn builtin_fhn() -> SystemModel {
    SystemModel {
        name: "fhn".into(),
        states: vec!["x1".into(), "x2".into(), "y".into()],
        params: vec!["I".into(), "s".into(), "eps".into()],
        defaults: Params(vec![0.05, 1.37, 0.001]),
        epsilon: 2,
        bifurcation: 0,
        equations: vec![
            "x2".into(),
            "(s*x2 - x1*(x1-1)*(0.1-x1) + y - I)/5".into(),
            "eps/s*(x1 - y)".into(),
        ],
        rhs: Rhs::Native(Builtin::FitzHughNagumo),
        jacobian: None,
    }
}

/// Looks up a built-in by name (`vdp` or `fhn`).
pub fn builtin(name: &str) -> Option<SystemModel> {
    match name {
        "vdp" => Some(builtin_vdp()),
        "fhn" => Some(builtin_fhn()),
        _ => None,
    }
}

impl SystemModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    pub fn equations(&self) -> &[String] {
        &self.equations
    }

    pub fn default_params(&self) -> Params {
        self.defaults.clone()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p == name)
    }

    pub fn epsilon_index(&self) -> usize {
        self.epsilon
    }

    pub fn bifurcation_index(&self) -> usize {
        self.bifurcation
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        match self.rhs {
            Rhs::Native(b) => Some(b),
            Rhs::Exprs(_) => None,
        }
    }

    pub fn bind<'a>(&'a self, params: &'a Params) -> BoundModel<'a> {
        BoundModel {
            model: self,
            params,
        }
    }

    fn slots(&self, z: &[f64], params: &Params) -> Vec<f64> {
        let mut slots = Vec::with_capacity(z.len() + params.0.len());
        slots.extend_from_slice(z);
        slots.extend_from_slice(&params.0);
        slots
    }

    /// Evaluates the right-hand side into `out`.
    pub fn rhs(&self, z: &[f64], params: &Params, out: &mut [f64]) -> Result<(), EvalError> {
        debug_assert_eq!(z.len(), self.dim());
        match &self.rhs {
            Rhs::Native(Builtin::VanDerPol) => {
                let (x, y) = (z[0], z[1]);
                let (lambda, eps) = (params.0[0], params.0[1]);
                out[0] = x.powi(2) + x.powi(3) / 3.0 - y;
                out[1] = eps * (x - lambda);
            }
            Rhs::Native(Builtin::FitzHughNagumo) => {
                let (x1, x2, y) = (z[0], z[1], z[2]);
                let (i, s, eps) = (params.0[0], params.0[1], params.0[2]);
                out[0] = x2;
                out[1] = (s * x2 - x1 * (x1 - 1.0) * (0.1 - x1) + y - i) / 5.0;
                out[2] = eps / s * (x1 - y);
            }
            Rhs::Exprs(exprs) => {
                let slots = self.slots(z, params);
                for (o, e) in out.iter_mut().zip(exprs) {
                    *o = e.eval(&slots)?;
                }
            }
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Row-major analytic Jacobian, when the model has one.
    pub fn analytic_jacobian(
        &self,
        z: &[f64],
        params: &Params,
    ) -> Option<Result<Vec<f64>, EvalError>> {
        match (&self.rhs, &self.jacobian) {
            (Rhs::Native(Builtin::VanDerPol), _) => {
                let x = z[0];
                let eps = params.0[1];
                Some(Ok(vec![2.0 * x + x * x, -1.0, eps, 0.0]))
            }
            (Rhs::Native(Builtin::FitzHughNagumo), _) => {
                let x1 = z[0];
                let (s, eps) = (params.0[1], params.0[2]);
                let dc = -3.0 * x1 * x1 + 2.2 * x1 - 0.1;
                Some(Ok(vec![
                    0.0,
                    1.0,
                    0.0,
                    -dc / 5.0,
                    s / 5.0,
                    1.0 / 5.0,
                    eps / s,
                    0.0,
                    -eps / s,
                ]))
            }
            (Rhs::Exprs(_), Some(entries)) => {
                let slots = self.slots(z, params);
                Some(entries.iter().map(|e| e.eval(&slots)).collect())
            }
            (Rhs::Exprs(_), None) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const VDP_JSON: &str = r#"{
        "name": "vdp-config",
        "states": ["x", "y"],
        "params": {"lambda": 0.0, "eps": 0.05},
        "epsilon_param": "eps",
        "bifurcation_param": "lambda",
        "equations": ["x^2+x^3/3-y", "eps*(x-lambda)"]
    }"#;

    #[test]
    fn loads_vdp_config() {
        let m = load_model(VDP_JSON).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.param_names(), ["lambda", "eps"]);
        assert_eq!(m.epsilon_index(), 1);
        assert_eq!(m.bifurcation_index(), 0);
        let mut out = [0.0; 2];
        m.rhs(&[1.0, 0.0], &m.default_params(), &mut out).unwrap();
        assert!((out[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((out[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_duplicate_state() {
        let cfg = VDP_JSON.replace(r#"["x", "y"]"#, r#"["x", "x"]"#);
        assert!(matches!(load_model(&cfg), Err(ModelError::Duplicate(n)) if n == "x"));
    }

    #[test]
    fn rejects_undeclared_identifier() {
        let cfg = VDP_JSON.replace("x^2+x^3/3-y", "x^2+z");
        match load_model(&cfg) {
            Err(ModelError::Equation {
                index: 0,
                source: ParseError::UnknownIdentifier { name, .. },
            }) => assert_eq!(name, "z"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_designations() {
        let cfg = VDP_JSON.replace(r#""epsilon_param": "eps""#, r#""epsilon_param": "mu""#);
        assert!(matches!(
            load_model(&cfg),
            Err(ModelError::MissingParam { role: "epsilon", .. })
        ));
        let cfg = VDP_JSON.replace(r#""bifurcation_param": "lambda""#, r#""bifurcation_param": "eps""#);
        assert!(matches!(load_model(&cfg), Err(ModelError::SameParam(_))));
        let cfg = VDP_JSON.replace(r#""epsilon_param": "eps","#, "");
        assert!(matches!(load_model(&cfg), Err(ModelError::Schema(_))));
    }

    #[test]
    fn rejects_overlap_and_count_mismatch() {
        let cfg = VDP_JSON.replace(r#"["x", "y"]"#, r#"["x", "eps"]"#);
        assert!(matches!(load_model(&cfg), Err(ModelError::Duplicate(_))));
        let cfg = VDP_JSON.replace(r#", "eps*(x-lambda)""#, "");
        assert!(matches!(load_model(&cfg), Err(ModelError::EquationCount { .. })));
        let cfg = VDP_JSON.replace(r#""name": "vdp-config","#, r#""name": "v", "extra": 1,"#);
        assert!(matches!(load_model(&cfg), Err(ModelError::Schema(_))));
    }

    #[test]
    fn vdp_builtin_values() {
        let m = builtin_vdp();
        let p = m.default_params();
        let mut out = [0.0; 2];
        m.rhs(&[0.0, 0.0], &p.with(1, 0.3), &mut out).unwrap();
        assert_eq!(out, [0.0, 0.0]);
        m.rhs(&[1.0, 0.0], &p, &mut out).unwrap();
        assert!((out[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((out[1] - 0.05).abs() < 1e-15);
        let j = m.analytic_jacobian(&[0.0, 0.0], &p).unwrap().unwrap();
        assert_eq!(j, vec![0.0, -1.0, 0.05, 0.0]);
    }

    #[test]
    fn fhn_builtin_values() {
        let m = builtin_fhn();
        let p = m.default_params().with(0, 0.0);
        let mut out = [0.0; 3];
        m.rhs(&[0.0, 0.0, 0.0], &p, &mut out).unwrap();
        assert_eq!(out, [0.0, 0.0, 0.0]);

        let p = m.default_params();
        m.rhs(&[1.0, 0.0, 0.0], &p, &mut out).unwrap();
        assert!((out[2] - 0.001 / 1.37).abs() < 1e-18);
        assert!((out[2] - 7.2993e-4).abs() < 1e-8);

        // points on the critical manifold are fast-equilibria
        let i = p.get(0);
        for &x1 in &[-0.3, 0.0, 0.05, 0.4, 0.9] {
            let y = x1 * (x1 - 1.0) * (0.1 - x1) + i;
            m.rhs(&[x1, 0.0, y], &p, &mut out).unwrap();
            assert_eq!(out[0], 0.0);
            assert!(out[1].abs() < 1e-16);
        }
    }

    #[test]
    fn config_jacobian_is_used() {
        let cfg = VDP_JSON.replace(
            r#""equations""#,
            r#""jacobian": [["2*x + x^2", "-1"], ["eps", "0"]], "equations""#,
        );
        let m = load_model(&cfg).unwrap();
        let j = m
            .analytic_jacobian(&[0.5, 0.0], &m.default_params())
            .unwrap()
            .unwrap();
        assert_eq!(j, vec![1.25, -1.0, 0.05, 0.0]);
    }
}
