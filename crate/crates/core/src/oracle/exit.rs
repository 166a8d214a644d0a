//! Exit-side classification of trajectories leaving a fold region and
//! bisection of the bifurcation parameter on the side flip.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::EvalError;
use crate::model::{Builtin, Params, SystemModel, VectorField};
use crate::oracle::integrator::{
    integrate, Direction, IntegratorError, IntegratorSettings, Reversed, Section, Stats,
};
use crate::smallmat::{fd_jacobian, solve_real, RealMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid exit geometry: {0}")]
    Geometry(String),
    #[error("could not place the seed on the critical manifold: {0}")]
    Projection(String),
    #[error("no exit section reached at λ = {lambda} ({reason})")]
    Undecided { lambda: f64, reason: String },
    #[error("bracket ends [{lo}, {hi}] both exit {side:?}")]
    SameSide { lo: f64, hi: f64, side: ExitSide },
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("exit side is not monotone in λ near {lambda}")]
    NonMonotone { lambda: f64 },
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExitSide {
    Left,
    Right,
}

/// Where trajectories start and how their exit is recognised.
///
/// The seed is first moved onto the critical manifold by solving the fast
/// equations `fast_equations` for the coordinates `free_coordinates`, then
/// relaxed for `settle_time`. A trajectory exits `Left` when
/// `z[index]` decreases through `left`, and `Right` when it increases
/// through `right`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitGeometry {
    pub seed: Vec<f64>,
    #[serde(default)]
    pub fast_equations: Vec<usize>,
    #[serde(default)]
    pub free_coordinates: Vec<usize>,
    pub index: usize,
    pub left: f64,
    pub right: f64,
    #[serde(default)]
    pub reverse_time: bool,
    #[serde(default = "default_settle")]
    pub settle_time: f64,
    pub max_time: f64,
}

fn default_settle() -> f64 {
    10.0
}

/// Fold abscissae of the FitzHugh–Nagumo cubic `x(x−1)(0.1−x)`.
pub fn fhn_folds() -> (f64, f64) {
    let d = (2.2f64 * 2.2 - 1.2).sqrt();
    ((2.2 - d) / 6.0, (2.2 + d) / 6.0)
}

impl ExitGeometry {
    /// Seed at `x = −1` on the attracting middle branch; exit right when `x`
    /// passes `+1`, left when it falls back through the fold abscissa `0`.
    pub fn vdp_default() -> Self {
        ExitGeometry {
            seed: vec![-1.0, 0.0],
            fast_equations: vec![0],
            free_coordinates: vec![1],
            index: 0,
            left: 0.0,
            right: 1.0,
            reverse_time: false,
            settle_time: 10.0,
            max_time: 2000.0,
        }
    }

    /// Runs backwards in time, where the middle branch of the cubic is
    /// attracting. Seed at `x₁ = 0.3`; exit right when `x₁` returns up
    /// through the lower fold, left when it escapes half a branch width below
    /// that fold.
    pub fn fhn_default(epsilon: f64) -> Self {
        let (lo, hi) = fhn_folds();
        ExitGeometry {
            seed: vec![0.3, 0.0, 0.0],
            fast_equations: vec![0, 1],
            free_coordinates: vec![1, 2],
            index: 0,
            left: lo - 0.5 * (hi - lo),
            right: lo,
            reverse_time: true,
            settle_time: 10.0,
            max_time: 50.0 / epsilon,
        }
    }

    /// Default geometry of a built-in model.
    pub fn for_model(model: &SystemModel, params: &Params) -> Option<Self> {
        match model.builtin_kind()? {
            Builtin::VanDerPol => Some(Self::vdp_default()),
            Builtin::FitzHughNagumo => Some(Self::fhn_default(params.get(model.epsilon_index()))),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), OracleError> {
        let bad = |m: String| Err(OracleError::Geometry(m));
        if self.seed.len() != dim {
            return bad(format!("seed has {} entries for a {dim}-dimensional model", self.seed.len()));
        }
        if self.index >= dim {
            return bad(format!("section coordinate {} out of range", self.index));
        }
        if self.fast_equations.len() != self.free_coordinates.len() {
            return bad("fast equations and free coordinates differ in number".into());
        }
        if self
            .fast_equations
            .iter()
            .chain(&self.free_coordinates)
            .any(|&i| i >= dim)
        {
            return bad("projection index out of range".into());
        }
        if !(self.left < self.right) {
            return bad(format!(
                "left section {} must lie below right section {}",
                self.left, self.right
            ));
        }
        if !(self.settle_time >= 0.0) || !(self.max_time > 0.0) {
            return bad("times must be non-negative".into());
        }
        Ok(())
    }

    pub(crate) fn sections(&self) -> [Section; 2] {
        [
            Section {
                index: self.index,
                value: self.left,
                direction: Direction::Decreasing,
            },
            Section {
                index: self.index,
                value: self.right,
                direction: Direction::Increasing,
            },
        ]
    }
}

/// Solves the fast equations for the free coordinates, holding the others.
pub fn project_seed(
    model: &SystemModel,
    params: &Params,
    geometry: &ExitGeometry,
) -> Result<Vec<f64>, OracleError> {
    let field = model.bind(params);
    let mut z = geometry.seed.clone();
    let m = geometry.fast_equations.len();
    if m == 0 {
        return Ok(z);
    }
    let mut full = vec![0.0; model.dim()];
    for _ in 0..50 {
        field.eval(&z, &mut full)?;
        let r: Vec<f64> = geometry.fast_equations.iter().map(|&i| full[i]).collect();
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-14 {
            return Ok(z);
        }
        let jac = fd_jacobian(&field, &z, f64::EPSILON.cbrt())
            .map_err(|e| OracleError::Projection(e.to_string()))?;
        let mut sub = RealMatrix::zeros(m);
        for (a, &i) in geometry.fast_equations.iter().enumerate() {
            for (b, &j) in geometry.free_coordinates.iter().enumerate() {
                sub[(a, b)] = jac[(i, j)];
            }
        }
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = solve_real(&sub, &neg).map_err(|e| OracleError::Projection(e.to_string()))?;
        for (b, &j) in geometry.free_coordinates.iter().enumerate() {
            z[j] += step[b];
        }
        if step.iter().map(|v| v * v).sum::<f64>().sqrt()
            <= 1e-15 * z.iter().map(|v| v.abs()).fold(1.0, f64::max)
        {
            return Ok(z);
        }
    }
    Err(OracleError::Projection("Newton iteration did not converge".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub side: ExitSide,
    pub exit_time: f64,
    pub stats: Stats,
}

/// Integrates from the projected, relaxed seed until one exit section fires.
pub fn classify_exit(
    model: &SystemModel,
    params: &Params,
    settings: &IntegratorSettings,
    geometry: &ExitGeometry,
) -> Result<Classification, OracleError> {
    geometry.validate(model.dim())?;
    let lambda = params.get(model.bifurcation_index());
    let seed = project_seed(model, params, geometry)?;
    let bound = model.bind(params);
    let reversed = Reversed(&bound);
    let field: &dyn VectorField = if geometry.reverse_time {
        &reversed
    } else {
        &bound
    };
    let undecided = |e: IntegratorError| match e {
        IntegratorError::StepBudget { .. } | IntegratorError::BlowUp { .. } => {
            OracleError::Undecided {
                lambda,
                reason: e.to_string(),
            }
        }
        other => OracleError::Integrator(other),
    };
    let mut stats = Stats::default();
    let start = if geometry.settle_time > 0.0 {
        let settle = integrate(field, &seed, 0.0, geometry.settle_time, settings, &[])
            .map_err(undecided)?;
        stats += settle.stats;
        settle.y_final
    } else {
        seed
    };
    let run = integrate(
        field,
        &start,
        geometry.settle_time,
        geometry.max_time,
        settings,
        &geometry.sections(),
    )
    .map_err(undecided)?;
    stats += run.stats;
    match run.event {
        Some(ev) => Ok(Classification {
            side: if ev.section == 0 {
                ExitSide::Left
            } else {
                ExitSide::Right
            },
            exit_time: ev.t,
            stats,
        }),
        None => Err(OracleError::Undecided {
            lambda,
            reason: format!("no section crossed before t = {}", geometry.max_time),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub lambda: f64,
    pub side: ExitSide,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub epsilon: f64,
    /// Final bracket; its ends classify differently.
    pub bracket: [f64; 2],
    pub lambda_c: f64,
    /// Side taken below and above the flip.
    pub below: ExitSide,
    pub above: ExitSide,
    pub trace: Vec<TraceEntry>,
    pub stats: Stats,
}

/// Bisects `bracket` on the exit side until its width is at most
/// `lambda_tol`; the midpoint is the observed explosion parameter.
pub fn bisect_canard(
    model: &SystemModel,
    params: &Params,
    bracket: (f64, f64),
    lambda_tol: f64,
    settings: &IntegratorSettings,
    geometry: &ExitGeometry,
) -> Result<OracleResult, OracleError> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(lambda_tol > 0.0) {
        return Err(OracleError::InvalidBracket { lo, hi });
    }
    let li = model.bifurcation_index();
    let mut stats = Stats::default();
    let mut trace = Vec::new();
    let mut classify = |lambda: f64, trace: &mut Vec<TraceEntry>| -> Result<ExitSide, OracleError> {
        let c = classify_exit(model, &params.with(li, lambda), settings, geometry)?;
        stats += c.stats;
        trace.push(TraceEntry {
            lambda,
            side: c.side,
        });
        Ok(c.side)
    };
    let below = classify(lo, &mut trace)?;
    let above = classify(hi, &mut trace)?;
    if below == above {
        return Err(OracleError::SameSide {
            lo,
            hi,
            side: below,
        });
    }
    while hi - lo > lambda_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if classify(mid, &mut trace)? == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    check_monotone(&trace)?;
    Ok(OracleResult {
        epsilon: params.get(model.epsilon_index()),
        bracket: [lo, hi],
        lambda_c: 0.5 * (lo + hi),
        below,
        above,
        trace,
        stats,
    })
}

/// Sorted by λ, the sides may change at most once.
pub fn check_monotone(trace: &[TraceEntry]) -> Result<(), OracleError> {
    let mut sorted = trace.to_vec();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let mut flips = 0;
    for w in sorted.windows(2) {
        if w[0].side != w[1].side {
            flips += 1;
            if flips > 1 {
                return Err(OracleError::NonMonotone { lambda: w[1].lambda });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_fhn, builtin_vdp};

    #[test]
    fn vdp_seed_lies_on_parabola() {
        let m = builtin_vdp();
        let p = m.default_params();
        let z = project_seed(&m, &p, &ExitGeometry::vdp_default()).unwrap();
        assert_eq!(z[0], -1.0);
        assert!((z[1] - (1.0 - 1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn fhn_seed_lies_on_cubic() {
        let m = builtin_fhn();
        let p = m.default_params().with(0, 0.055);
        let z = project_seed(&m, &p, &ExitGeometry::fhn_default(1e-3)).unwrap();
        let c = 0.3 * (0.3 - 1.0) * (0.1 - 0.3);
        assert!(z[1].abs() < 1e-14);
        assert!((z[2] - (c + 0.055)).abs() < 1e-13);
    }

    #[test]
    fn geometry_validation() {
        let mut g = ExitGeometry::vdp_default();
        g.left = 2.0;
        assert!(matches!(g.validate(2), Err(OracleError::Geometry(_))));
        let g = ExitGeometry::vdp_default();
        assert!(matches!(g.validate(3), Err(OracleError::Geometry(_))));
        let m = builtin_vdp();
        let mut g = ExitGeometry::vdp_default();
        g.right = g.left;
        assert!(matches!(
            classify_exit(&m, &m.default_params(), &Default::default(), &g),
            Err(OracleError::Geometry(_))
        ));
    }

    #[test]
    fn vdp_sides_differ_across_explosion() {
        let m = builtin_vdp();
        let p = m.default_params();
        let s = IntegratorSettings::default();
        let g = ExitGeometry::vdp_default();
        let lo = classify_exit(&m, &p.with(0, -0.01), &s, &g).unwrap();
        let hi = classify_exit(&m, &p.with(0, -0.001), &s, &g).unwrap();
        assert_eq!(lo.side, ExitSide::Left);
        assert_eq!(hi.side, ExitSide::Right);
        let a = classify_exit(&m, &p.with(0, -0.0066), &s, &g).unwrap();
        let b = classify_exit(&m, &p.with(0, -0.0064), &s, &g).unwrap();
        assert_ne!(a.side, b.side);
    }

    #[test]
    fn same_side_bracket_is_rejected() {
        let m = builtin_vdp();
        let r = bisect_canard(
            &m,
            &m.default_params(),
            (-0.003, -0.001),
            1e-6,
            &Default::default(),
            &ExitGeometry::vdp_default(),
        );
        assert!(matches!(r, Err(OracleError::SameSide { .. })));
    }

    #[test]
    fn monotonicity_check() {
        use ExitSide::*;
        let t = |v: &[(f64, ExitSide)]| -> Vec<TraceEntry> {
            v.iter().map(|&(lambda, side)| TraceEntry { lambda, side }).collect()
        };
        assert!(check_monotone(&t(&[(0.0, Left), (1.0, Right), (0.5, Left)])).is_ok());
        assert!(check_monotone(&t(&[(0.0, Left), (1.0, Left), (0.5, Right)])).is_err());
    }
}
