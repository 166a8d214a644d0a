//! Dormand–Prince 5(4) with PI step-size control, dense output and
//! sign-change events on single coordinates.

use thiserror::Error;

use crate::expr::EvalError;
use crate::model::VectorField;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegratorError {
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
    #[error("step size underflow at t = {t} (h = {h:e}); the problem may be stiff")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {steps} accepted steps exhausted at t = {t}")]
    StepBudget { steps: usize, t: f64 },
    #[error("state exceeded the bound {bound:e} at t = {t}")]
    BlowUp { t: f64, bound: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("right-hand side evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recording {
    None,
    /// Every accepted step.
    Steps,
    /// Uniform samples from the dense output.
    Uniform(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Any state component beyond this magnitude aborts with `BlowUp`.
    pub blowup: f64,
    pub recording: Recording,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rtol: 1e-12,
            atol: 1e-14,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
            blowup: 1e6,
            recording: Recording::None,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        let bad = |m: &str| Err(IntegratorError::InvalidSettings(m.to_string()));
        if !(self.rtol >= 1e-15) || !self.rtol.is_finite() {
            return bad("relative tolerance must be finite and at least 1e-15");
        }
        if !(self.atol > 0.0) || !self.atol.is_finite() {
            return bad("absolute tolerance must be positive");
        }
        if !(self.max_step > 0.0) {
            return bad("max step must be positive");
        }
        if !(self.blowup > 0.0) {
            return bad("blow-up bound must be positive");
        }
        if let Recording::Uniform(dt) = self.recording {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad("sampling interval must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    Either,
}

/// Terminal event when `z[index] − value` changes sign in `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub index: usize,
    pub value: f64,
    pub direction: Direction,
}

impl Section {
    fn triggered(&self, before: f64, after: f64) -> bool {
        let (a, b) = (before - self.value, after - self.value);
        match self.direction {
            Direction::Increasing => a < 0.0 && b >= 0.0,
            Direction::Decreasing => a > 0.0 && b <= 0.0,
            Direction::Either => (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// Position of the section in the list passed to [`integrate`].
    pub section: usize,
    pub t: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for Stats {
    fn add_assign(&mut self, o: Stats) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// The terminal event, if one stopped the integration.
    pub event: Option<Event>,
    pub t_final: f64,
    pub y_final: Vec<f64>,
    pub stats: Stats,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const BETA: f64 = 0.04;
const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Continuous extension over one accepted step.
struct Dense {
    t0: f64,
    h: f64,
    cont: [Vec<f64>; 5],
}

impl Dense {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = &self.cont;
        for i in 0..out.len() {
            out[i] = c0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i])));
        }
    }

    fn component(&self, t: f64, i: usize) -> f64 {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = &self.cont;
        c0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i])))
    }
}

fn error_norm(err: &[f64], y: &[f64], ynew: &[f64], s: &IntegratorSettings) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(ynew))
        .map(|(e, (a, b))| {
            let sk = s.atol + s.rtol * a.abs().max(b.abs());
            (e / sk) * (e / sk)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step(
    field: &dyn VectorField,
    y: &[f64],
    f0: &[f64],
    s: &IntegratorSettings,
    stats: &mut Stats,
) -> Result<f64, IntegratorError> {
    let n = y.len();
    let sk: Vec<f64> = y.iter().map(|v| s.atol + s.rtol * v.abs()).collect();
    let rms = |v: &[f64]| {
        (v.iter().zip(&sk).map(|(a, k)| (a / k) * (a / k)).sum::<f64>() / n as f64).sqrt()
    };
    let d0 = rms(y);
    let d1 = rms(f0);
    let mut h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(s.max_step);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h * b).collect();
    let mut f1 = vec![0.0; n];
    field.eval(&y1, &mut f1)?;
    stats.evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h;
    let big = d1.max(d2);
    let h1 = if big <= 1e-15 {
        (1e-6f64).max(h * 1e-3)
    } else {
        (0.01 / big).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(s.max_step))
}

/// Integrates `z' = field(z)` from `t0` to `t_end` (`t_end > t0`), stopping
/// early at the first section crossing, located to `1e-12` in time.
pub fn integrate(
    field: &dyn VectorField,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    settings: &IntegratorSettings,
    sections: &[Section],
) -> Result<Trajectory, IntegratorError> {
    settings.validate()?;
    if !(t_end >= t0) {
        return Err(IntegratorError::InvalidSettings(format!(
            "end time {t_end} precedes start time {t0}"
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(IntegratorError::NonFinite { t: t0 });
    }
    let n = y0.len();
    let mut stats = Stats::default();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut next_sample = t0;
    let record_sample = |t: f64, y: &[f64], times: &mut Vec<f64>, states: &mut Vec<Vec<f64>>| {
        times.push(t);
        states.push(y.to_vec());
    };
    if settings.recording != Recording::None {
        record_sample(t0, y0, &mut times, &mut states);
        if let Recording::Uniform(dt) = settings.recording {
            next_sample = t0 + dt;
        }
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    if t_end == t0 {
        return Ok(Trajectory {
            times,
            states,
            event: None,
            t_final: t,
            y_final: y,
            stats,
        });
    }

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut err = vec![0.0; n];

    field.eval(&y, &mut k1)?;
    stats.evaluations += 1;
    let mut h = initial_step(field, &y, &k1, settings, &mut stats)?;
    let mut facold: f64 = 1e-4;
    let expo1 = 0.2 - BETA * 0.75;
    let mut last_rejected = false;

    loop {
        if stats.accepted >= settings.max_steps {
            return Err(IntegratorError::StepBudget {
                steps: stats.accepted,
                t,
            });
        }
        let remaining = t_end - t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) && !last {
            return Err(IntegratorError::StepUnderflow { t, h });
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        field.eval(&ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        field.eval(&ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        field.eval(&ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        field.eval(&ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        field.eval(&ytmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        field.eval(&ynew, &mut k7)?;
        stats.evaluations += 6;
        for i in 0..n {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let mut e = error_norm(&err, &y, &ynew, settings);
        if !e.is_finite() {
            e = 1e10;
        }
        let fac11 = e.powf(expo1);

        if e <= 1.0 {
            let fac = (fac11 / facold.powf(BETA)) / SAFE;
            let fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut hnew = (h / fac).min(settings.max_step);
            if last_rejected {
                hnew = hnew.min(h);
            }
            facold = e.max(1e-4);
            stats.accepted += 1;

            let ydiff: Vec<f64> = (0..n).map(|i| ynew[i] - y[i]).collect();
            let bspl: Vec<f64> = (0..n).map(|i| h * k1[i] - ydiff[i]).collect();
            let dense = Dense {
                t0: t,
                h,
                cont: [
                    y.clone(),
                    ydiff.clone(),
                    bspl.clone(),
                    (0..n).map(|i| ydiff[i] - h * k7[i] - bspl[i]).collect(),
                    (0..n)
                        .map(|i| {
                            h * (D1 * k1[i]
                                + D3 * k3[i]
                                + D4 * k4[i]
                                + D5 * k5[i]
                                + D6 * k6[i]
                                + D7 * k7[i])
                        })
                        .collect(),
                ],
            };
            let t_new = if last { t_end } else { t + h };

            let mut first: Option<(usize, f64)> = None;
            for (k, sec) in sections.iter().enumerate() {
                if sec.triggered(y[sec.index], ynew[sec.index]) {
                    let te = locate_crossing(&dense, sec, t, t_new);
                    if first.map_or(true, |(_, t0)| te < t0) {
                        first = Some((k, te));
                    }
                }
            }

            if let Recording::Uniform(dt) = settings.recording {
                let stop = first.map_or(t_new, |(_, te)| te);
                let mut buf = vec![0.0; n];
                while next_sample <= stop {
                    dense.eval(next_sample, &mut buf);
                    record_sample(next_sample, &buf, &mut times, &mut states);
                    next_sample += dt;
                }
            }

            if let Some((section, te)) = first {
                let mut state = vec![0.0; n];
                dense.eval(te, &mut state);
                if settings.recording == Recording::Steps {
                    record_sample(te, &state, &mut times, &mut states);
                }
                return Ok(Trajectory {
                    times,
                    states,
                    event: Some(Event {
                        section,
                        t: te,
                        state: state.clone(),
                    }),
                    t_final: te,
                    y_final: state,
                    stats,
                });
            }

            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut ynew);
            t = t_new;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(IntegratorError::NonFinite { t });
            }
            if y.iter().any(|v| v.abs() > settings.blowup) {
                return Err(IntegratorError::BlowUp {
                    t,
                    bound: settings.blowup,
                });
            }
            if settings.recording == Recording::Steps {
                record_sample(t, &y, &mut times, &mut states);
            }
            if last {
                return Ok(Trajectory {
                    times,
                    states,
                    event: None,
                    t_final: t,
                    y_final: y,
                    stats,
                });
            }
            h = hnew;
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
}

/// Root of `z[index] − value` on the dense output within `[a, b]`, by
/// Illinois steps with a bisection step whenever the bracket fails to halve.
fn locate_crossing(dense: &Dense, sec: &Section, a: f64, b: f64) -> f64 {
    let g = |t: f64| dense.component(t, sec.index) - sec.value;
    let (mut lo, mut hi) = (a, b);
    let (mut glo, mut ghi) = (g(lo), g(hi));
    if ghi == 0.0 {
        return hi;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let width = hi - lo;
        if width <= 1e-12 {
            break;
        }
        let mut m = (lo * ghi - hi * glo) / (ghi - glo);
        if !(m > lo && m < hi) {
            m = 0.5 * (lo + hi);
        }
        for attempt in 0..2 {
            if attempt == 1 {
                if hi - lo <= 0.5 * width {
                    break;
                }
                m = 0.5 * (lo + hi);
            }
            let gm = g(m);
            if gm == 0.0 {
                return m;
            }
            if (gm < 0.0) == (glo < 0.0) {
                lo = m;
                glo = gm;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = m;
                ghi = gm;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
        }
    }
    hi
}

/// Wrapper that runs a field backwards in time.
pub struct Reversed<'a>(pub &'a dyn VectorField);

impl VectorField for Reversed<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.0.eval(z, out)?;
        out.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    }
}
