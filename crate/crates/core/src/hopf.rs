//! Equilibria by damped Newton iteration, natural-parameter continuation and
//! localization of Hopf points with normalized eigenvectors.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Params, SystemModel};
use crate::smallmat::{
    cdot, cnorm, eigen_small, eigenvalues, eigenvector_for, jacobian, solve_real, ComplexVector,
    JacobianScheme, LinalgError, RealMatrix,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewtonError {
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian during Newton iteration")]
    Singular,
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for NewtonError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular => NewtonError::Singular,
            other => NewtonError::Linalg(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HopfError {
    #[error("equilibrium solve failed at λ = {lambda}: {source}")]
    Newton { lambda: f64, source: NewtonError },
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("no Hopf point in [{lo}, {hi}]: complex-pair real part is {re_lo:e} and {re_hi:e} at the ends")]
    NoSignChange {
        lo: f64,
        hi: f64,
        re_lo: f64,
        re_hi: f64,
    },
    #[error("a real eigenvalue crosses zero in [{lo}, {hi}] (fold, not Hopf)")]
    RealCrossing { lo: f64, hi: f64 },
    #[error("no complex eigenvalue pair at λ = {lambda}")]
    NoComplexPair { lambda: f64 },
    #[error("Hopf localization did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("Hopf eigenvectors are defective or ill-conditioned")]
    Defective,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: JacobianScheme,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tol: 1e-12,
            max_iter: 50,
            scheme: JacobianScheme::Auto,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub state: Vec<f64>,
    pub params: Params,
    pub residual: f64,
    #[serde(skip)]
    pub jacobian: RealMatrix,
}

fn residual_norm(model: &SystemModel, z: &[f64], params: &Params) -> Result<f64, NewtonError> {
    let mut f = vec![0.0; model.dim()];
    model
        .rhs(z, params, &mut f)
        .map_err(|e| NewtonError::Linalg(LinalgError::Eval(e)))?;
    let r = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(if r.is_finite() { r } else { f64::INFINITY })
}

pub fn find_equilibrium(
    model: &SystemModel,
    params: &Params,
    guess: &[f64],
    settings: &NewtonSettings,
) -> Result<Equilibrium, NewtonError> {
    let n = model.dim();
    let mut z = guess.to_vec();
    let mut f = vec![0.0; n];
    let mut res = residual_norm(model, &z, params)?;
    if !res.is_finite() {
        return Err(NewtonError::NoConvergence {
            iterations: 0,
            residual: res,
        });
    }
    for it in 0..=settings.max_iter {
        if res <= settings.tol {
            polish(model, params, &mut z, &mut res, settings)?;
            let jac = jacobian(model, &z, params, settings.scheme)?;
            return Ok(Equilibrium {
                state: z,
                params: params.clone(),
                residual: res,
                jacobian: jac,
            });
        }
        if it == settings.max_iter {
            break;
        }
        model
            .rhs(&z, params, &mut f)
            .map_err(|e| NewtonError::Linalg(LinalgError::Eval(e)))?;
        let jac = jacobian(model, &z, params, settings.scheme)?;
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = solve_real(&jac, &neg)?;
        let step_norm = step.iter().map(|d| d * d).sum::<f64>().sqrt();
        // natural monotonicity test: the residual measured through the
        // current Jacobian must shrink, which keeps slow and fast
        // components on a common scale
        let mut t = 1.0;
        let mut accepted = false;
        let mut ft = vec![0.0; n];
        for _ in 0..30 {
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            let r = residual_norm(model, &trial, params)?;
            if r.is_finite() {
                model
                    .rhs(&trial, params, &mut ft)
                    .map_err(|e| NewtonError::Linalg(LinalgError::Eval(e)))?;
                let level = solve_real(&jac, &ft)?
                    .iter()
                    .map(|d| d * d)
                    .sum::<f64>()
                    .sqrt();
                if level < step_norm || r < res {
                    z = trial;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(NewtonError::NoConvergence {
        iterations: settings.max_iter,
        residual: res,
    })
}

/// A few extra undamped Newton steps once the residual is below tolerance;
/// on slow-fast systems a small residual can still leave an O(residual/ε)
/// error in the state.
fn polish(
    model: &SystemModel,
    params: &Params,
    z: &mut Vec<f64>,
    res: &mut f64,
    settings: &NewtonSettings,
) -> Result<(), NewtonError> {
    let mut f = vec![0.0; model.dim()];
    for _ in 0..3 {
        model
            .rhs(z, params, &mut f)
            .map_err(|e| NewtonError::Linalg(LinalgError::Eval(e)))?;
        let jac = jacobian(model, z, params, settings.scheme)?;
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let Ok(step) = solve_real(&jac, &neg) else {
            return Ok(());
        };
        let trial: Vec<f64> = z.iter().zip(&step).map(|(a, d)| a + d).collect();
        let r = residual_norm(model, &trial, params)?;
        if r > *res {
            return Ok(());
        }
        let size = step.iter().map(|d| d * d).sum::<f64>().sqrt();
        let scale = z.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        *z = trial;
        *res = r;
        if size <= 4.0 * f64::EPSILON * scale {
            return Ok(());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub equilibrium: Equilibrium,
    pub eigenvalues: Vec<Complex64>,
}

/// Greedy minimal-distance matching of `next` onto the order of `prev`.
fn match_eigenvalues(prev: &[Complex64], next: Vec<Complex64>) -> Vec<Complex64> {
    let mut pool = next;
    let mut out = Vec::with_capacity(pool.len());
    for p in prev {
        let (k, _) = pool
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - p).norm().total_cmp(&(b.1 - p).norm()))
            .expect("spectra have equal length");
        out.push(pool.swap_remove(k));
    }
    out
}

/// Equilibria at `steps + 1` evenly spaced values of the bifurcation
/// parameter, each seeded by its predecessor; eigenvalues keep a consistent
/// order along the branch.
pub fn continue_equilibrium(
    model: &SystemModel,
    params: &Params,
    range: (f64, f64),
    steps: usize,
    guess: &[f64],
    settings: &NewtonSettings,
) -> Result<Vec<BranchPoint>, HopfError> {
    let (lo, hi) = range;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(HopfError::InvalidBracket { lo, hi });
    }
    let idx = model.bifurcation_index();
    let count = if lo == hi { 1 } else { steps.max(1) + 1 };
    let mut branch: Vec<BranchPoint> = Vec::with_capacity(count);
    let mut z = guess.to_vec();
    for k in 0..count {
        let lambda = if count == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (count - 1) as f64
        };
        let p = params.with(idx, lambda);
        let eq = find_equilibrium(model, &p, &z, settings)
            .map_err(|source| HopfError::Newton { lambda, source })?;
        let mut ev = eigenvalues(&eq.jacobian)?;
        if let Some(prev) = branch.last() {
            ev = match_eigenvalues(&prev.eigenvalues, ev);
        }
        z = eq.state.clone();
        branch.push(BranchPoint {
            lambda,
            equilibrium: eq,
            eigenvalues: ev,
        });
    }
    Ok(branch)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfSettings {
    /// Convergence tolerance on the real part of the crossing pair.
    pub tol: f64,
    pub max_iter: usize,
    pub newton: NewtonSettings,
}

impl Default for HopfSettings {
    fn default() -> Self {
        HopfSettings {
            tol: 1e-10,
            max_iter: 200,
            newton: NewtonSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfPoint {
    pub lambda_h: f64,
    pub equilibrium: Equilibrium,
    pub omega0: f64,
    /// Real part of the crossing pair at `lambda_h`.
    pub re_mu: f64,
    /// `d Re μ / dλ` by central differences.
    pub transversality: f64,
    pub q: ComplexVector,
    pub p: ComplexVector,
    pub iterations: usize,
}

impl HopfPoint {
    pub fn jacobian(&self) -> &RealMatrix {
        &self.equilibrium.jacobian
    }

    pub fn params(&self) -> &Params {
        &self.equilibrium.params
    }
}

fn complex_threshold(j: &RealMatrix) -> f64 {
    1e-8 * j.norm().max(1.0)
}

/// Largest real part among eigenvalues with nonzero imaginary part, or
/// `None` when the spectrum is real.
pub fn complex_pair_real_part(j: &RealMatrix) -> Result<Option<f64>, LinalgError> {
    let thr = complex_threshold(j);
    Ok(eigenvalues(j)?
        .iter()
        .filter(|m| m.im.abs() > thr)
        .map(|m| m.re)
        .max_by(f64::total_cmp))
}

struct Probe {
    lambda: f64,
    eq: Equilibrium,
    re: Option<f64>,
}

fn probe(
    model: &SystemModel,
    params: &Params,
    lambda: f64,
    guess: &[f64],
    newton: &NewtonSettings,
) -> Result<Probe, HopfError> {
    let idx = model.bifurcation_index();
    let eq = find_equilibrium(model, &params.with(idx, lambda), guess, newton)
        .map_err(|source| HopfError::Newton { lambda, source })?;
    let re = complex_pair_real_part(&eq.jacobian)?;
    Ok(Probe { lambda, eq, re })
}

/// Endpoints whose complex-pair real parts differ in sign. When the given
/// ends do not qualify (for instance a real spectrum at one end) the bracket
/// is scanned on a uniform grid for the first qualifying subinterval.
fn initial_bracket(
    model: &SystemModel,
    params: &Params,
    (lo, hi): (f64, f64),
    guess: &[f64],
    settings: &HopfSettings,
) -> Result<(Probe, Probe), HopfError> {
    let straddles = |a: &Probe, b: &Probe| match (a.re, b.re) {
        (Some(x), Some(y)) => x == 0.0 || y == 0.0 || x.signum() != y.signum(),
        _ => false,
    };
    let a = probe(model, params, lo, guess, &settings.newton)?;
    let b = probe(model, params, hi, &a.eq.state, &settings.newton)?;
    if straddles(&a, &b) {
        return Ok((a, b));
    }
    let det_sign = |p: &Probe| p.eq.jacobian.determinant().signum();
    let mut det_flip = det_sign(&a) != det_sign(&b);
    let mut prev = probe(model, params, lo, &a.eq.state, &settings.newton)?;
    for k in 1..=SCAN_POINTS {
        let lambda = lo + (hi - lo) * k as f64 / SCAN_POINTS as f64;
        let next = probe(model, params, lambda, &prev.eq.state, &settings.newton)?;
        if straddles(&prev, &next) {
            return Ok((prev, next));
        }
        det_flip |= det_sign(&prev) != det_sign(&next);
        prev = next;
    }
    if det_flip {
        return Err(HopfError::RealCrossing { lo, hi });
    }
    match (a.re, b.re) {
        (Some(re_lo), Some(re_hi)) => Err(HopfError::NoSignChange {
            lo,
            hi,
            re_lo,
            re_hi,
        }),
        (None, _) => Err(HopfError::NoComplexPair { lambda: lo }),
        (_, None) => Err(HopfError::NoComplexPair { lambda: hi }),
    }
}

const SCAN_POINTS: usize = 64;

/// Localizes the Hopf point in `bracket` by Illinois-accelerated bisection on
/// the real part of the complex pair.
pub fn locate_hopf(
    model: &SystemModel,
    params: &Params,
    bracket: (f64, f64),
    guess: &[f64],
    settings: &HopfSettings,
) -> Result<HopfPoint, HopfError> {
    let (lo, hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(HopfError::InvalidBracket { lo, hi });
    }
    let (a, b) = initial_bracket(model, params, bracket, guess, settings)?;
    let (ta, tb) = (a.re.unwrap_or(0.0), b.re.unwrap_or(0.0));
    let (mut a, mut b) = (a, b);
    let (mut ta, mut tb) = (ta, tb);
    // Illinois weights; the true values ta, tb decide convergence
    let (mut wa, mut wb) = (ta, tb);
    let mut side = 0i8;
    let mut iterations = 0;
    let found = loop {
        if ta.abs() <= settings.tol && ta.abs() <= tb.abs() {
            break a;
        }
        if tb.abs() <= settings.tol {
            break b;
        }
        let width = b.lambda - a.lambda;
        if width <= 4.0 * f64::EPSILON * a.lambda.abs().max(b.lambda.abs()).max(1.0) {
            break if ta.abs() <= tb.abs() { a } else { b };
        }
        if iterations >= settings.max_iter {
            return Err(HopfError::NoConvergence { iterations });
        }
        iterations += 1;
        let mut c = (a.lambda * wb - b.lambda * wa) / (wb - wa);
        // keep regula falsi inside the central part of the bracket
        if !c.is_finite() || c <= a.lambda + 0.01 * width || c >= b.lambda - 0.01 * width {
            c = 0.5 * (a.lambda + b.lambda);
        }
        let seed = if (c - a.lambda).abs() < (b.lambda - c).abs() {
            a.eq.state.clone()
        } else {
            b.eq.state.clone()
        };
        let m = probe(model, params, c, &seed, &settings.newton)?;
        let tm = m.re.ok_or(HopfError::NoComplexPair { lambda: c })?;
        if tm.signum() == ta.signum() {
            a = m;
            ta = tm;
            wa = tm;
            if side == -1 {
                wb *= 0.5;
            }
            side = -1;
        } else {
            b = m;
            tb = tm;
            wb = tm;
            if side == 1 {
                wa *= 0.5;
            }
            side = 1;
        }
    };

    let j = &found.eq.jacobian;
    let thr = complex_threshold(j);
    let mu = eigenvalues(j)?
        .into_iter()
        .filter(|m| m.im > thr)
        .max_by(|x, y| x.re.total_cmp(&y.re))
        .ok_or(HopfError::NoComplexPair {
            lambda: found.lambda,
        })?;
    let omega0 = mu.im;
    let (q, p) = hopf_eigenvectors(j, omega0)?;

    let delta = 1e-6 * (bracket.1 - bracket.0).max(found.lambda.abs()).max(1e-3);
    let up = probe(
        model,
        params,
        found.lambda + delta,
        &found.eq.state,
        &settings.newton,
    )?;
    let down = probe(
        model,
        params,
        found.lambda - delta,
        &found.eq.state,
        &settings.newton,
    )?;
    let transversality = match (up.re, down.re) {
        (Some(u), Some(d)) => (u - d) / (2.0 * delta),
        _ => f64::NAN,
    };

    Ok(HopfPoint {
        lambda_h: found.lambda,
        re_mu: mu.re,
        equilibrium: found.eq,
        omega0,
        transversality,
        q,
        p,
        iterations,
    })
}

/// Rotates `v` so that its largest-modulus component is real and positive.
pub fn fix_phase(v: &mut [Complex64]) {
    let Some(k) = (0..v.len()).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())) else {
        return;
    };
    let r = v[k].norm();
    if r == 0.0 {
        return;
    }
    let rot = v[k].conj() / r;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[k] = Complex64::new(v[k].norm(), 0.0);
}

/// Right eigenvector `q` of `J` for `iω₀` with `q̄ᵀq = 1` and phase fixed,
/// and left eigenvector `p` (`Jᵀp = −iω₀p`) scaled so `p̄ᵀq = 1`.
pub fn hopf_eigenvectors(
    j: &RealMatrix,
    omega0: f64,
) -> Result<(ComplexVector, ComplexVector), HopfError> {
    let shift = Complex64::new(0.0, omega0);
    // refine the shift to the nearest computed eigenvalue
    let mu = eigen_small(j)?
        .into_iter()
        .map(|e| e.value)
        .min_by(|a, b| (a - shift).norm().total_cmp(&(b - shift).norm()))
        .unwrap_or(shift);
    let mut q = eigenvector_for(j, mu)?;
    let nq = cnorm(&q);
    q.iter_mut().for_each(|z| *z /= nq);
    fix_phase(&mut q);
    let p0 = eigenvector_for(&j.transpose(), mu.conj())?;
    let s = cdot(&p0, &q);
    if s.norm() < 1e-10 * cnorm(&p0) {
        return Err(HopfError::Defective);
    }
    let p: ComplexVector = p0.iter().map(|z| z / s.conj()).collect();
    Ok((q, p))
}
