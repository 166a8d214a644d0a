//! Second and third derivative forms of a vector field at a point, by
//! central differences and polarization.

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::EvalError;
use crate::model::VectorField;
use crate::smallmat::ComplexVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultilinearError {
    #[error("right-hand side evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("finite-difference result is not finite")]
    NonFinite,
    #[error("expansion point is not an equilibrium (residual {residual:e})")]
    NotEquilibrium { residual: f64 },
    #[error("vector of length {got} where {expected} was expected")]
    Dimension { expected: usize, got: usize },
}

/// Finite-difference settings. `None` steps are scaled by `max(1, ‖z*‖)`
/// and balance truncation against rounding for the chosen order:
/// `ε_mach^{1/6}` for B and `ε_mach^{1/7}` for C with extrapolation,
/// `ε_mach^{1/4}` and `ε_mach^{1/5}` without.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    pub h_b: Option<f64>,
    pub h_c: Option<f64>,
    /// One level of Richardson extrapolation on (h, h/2).
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            h_b: None,
            h_c: None,
            richardson: true,
        }
    }
}

impl FdOptions {
    /// Plain central differences without extrapolation.
    pub fn plain() -> Self {
        FdOptions {
            richardson: false,
            ..Default::default()
        }
    }

    fn steps(&self) -> (f64, f64) {
        let (pb, pc) = if self.richardson {
            (1.0 / 6.0, 1.0 / 7.0)
        } else {
            (0.25, 0.2)
        };
        (
            self.h_b.unwrap_or(f64::EPSILON.powf(pb)),
            self.h_c.unwrap_or(f64::EPSILON.powf(pc)),
        )
    }
}

pub const EQUILIBRIUM_TOL: f64 = 1e-10;

/// A vector field with a base point at which derivative forms are taken.
pub struct ExpansionPoint<'a> {
    field: &'a dyn VectorField,
    z: Vec<f64>,
    f0: Vec<f64>,
    h_b: f64,
    h_c: f64,
    richardson: bool,
}

impl<'a> ExpansionPoint<'a> {
    /// Base point that must be an equilibrium to `EQUILIBRIUM_TOL`.
    pub fn new(
        field: &'a dyn VectorField,
        z: &[f64],
        options: FdOptions,
    ) -> Result<Self, MultilinearError> {
        let point = Self::anywhere(field, z, options)?;
        let residual = norm(&point.f0);
        if residual > EQUILIBRIUM_TOL {
            return Err(MultilinearError::NotEquilibrium { residual });
        }
        Ok(point)
    }

    /// Base point without the equilibrium check.
    pub fn anywhere(
        field: &'a dyn VectorField,
        z: &[f64],
        options: FdOptions,
    ) -> Result<Self, MultilinearError> {
        let n = field.dim();
        if z.len() != n {
            return Err(MultilinearError::Dimension {
                expected: n,
                got: z.len(),
            });
        }
        let mut f0 = vec![0.0; n];
        field.eval(z, &mut f0)?;
        if f0.iter().any(|v| !v.is_finite()) {
            return Err(MultilinearError::NonFinite);
        }
        let scale = norm(z).max(1.0);
        let (h_b, h_c) = options.steps();
        Ok(ExpansionPoint {
            field,
            z: z.to_vec(),
            f0,
            h_b: h_b * scale,
            h_c: h_c * scale,
            richardson: options.richardson,
        })
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn state(&self) -> &[f64] {
        &self.z
    }

    pub fn residual(&self) -> &[f64] {
        &self.f0
    }

    fn eval_at(&self, dir: &[f64], t: f64, out: &mut [f64]) -> Result<(), MultilinearError> {
        let shifted: Vec<f64> = self.z.iter().zip(dir).map(|(z, d)| z + t * d).collect();
        self.field.eval(&shifted, out)?;
        Ok(())
    }

    /// Second directional difference along the unit direction `dir`.
    fn d2_unit(&self, dir: &[f64], h: f64) -> Result<Vec<f64>, MultilinearError> {
        let n = self.dim();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        self.eval_at(dir, h, &mut fp)?;
        self.eval_at(dir, -h, &mut fm)?;
        Ok((0..n)
            .map(|i| (fp[i] - 2.0 * self.f0[i] + fm[i]) / (h * h))
            .collect())
    }

    /// Third directional difference along the unit direction `dir`.
    fn d3_unit(&self, dir: &[f64], h: f64) -> Result<Vec<f64>, MultilinearError> {
        let n = self.dim();
        let mut f2p = vec![0.0; n];
        let mut f1p = vec![0.0; n];
        let mut f1m = vec![0.0; n];
        let mut f2m = vec![0.0; n];
        self.eval_at(dir, 2.0 * h, &mut f2p)?;
        self.eval_at(dir, h, &mut f1p)?;
        self.eval_at(dir, -h, &mut f1m)?;
        self.eval_at(dir, -2.0 * h, &mut f2m)?;
        Ok((0..n)
            .map(|i| (f2p[i] - 2.0 * f1p[i] + 2.0 * f1m[i] - f2m[i]) / (2.0 * h * h * h))
            .collect())
    }

    fn directional(
        &self,
        w: &[f64],
        order: i32,
        h: f64,
        stencil: fn(&Self, &[f64], f64) -> Result<Vec<f64>, MultilinearError>,
    ) -> Result<Vec<f64>, MultilinearError> {
        let len = norm(w);
        if len == 0.0 {
            return Ok(vec![0.0; self.dim()]);
        }
        let unit: Vec<f64> = w.iter().map(|v| v / len).collect();
        let coarse = stencil(self, &unit, h)?;
        let value = if self.richardson {
            let fine = stencil(self, &unit, 0.5 * h)?;
            fine.iter()
                .zip(&coarse)
                .map(|(f, c)| (4.0 * f - c) / 3.0)
                .collect()
        } else {
            coarse
        };
        let factor = len.powi(order);
        let out: Vec<f64> = value.iter().map(|v| v * factor).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(MultilinearError::NonFinite);
        }
        Ok(out)
    }

    fn check(&self, v: &[f64]) -> Result<(), MultilinearError> {
        if v.len() != self.dim() {
            return Err(MultilinearError::Dimension {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `B(u, v)`, the symmetric second-derivative form.
    pub fn b(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>, MultilinearError> {
        self.check(u)?;
        self.check(v)?;
        let plus: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        let dp = self.directional(&plus, 2, self.h_b, Self::d2_unit)?;
        let dm = self.directional(&minus, 2, self.h_b, Self::d2_unit)?;
        Ok(dp.iter().zip(&dm).map(|(p, m)| 0.25 * (p - m)).collect())
    }

    /// `C(u, v, w)`, the symmetric third-derivative form.
    pub fn c(&self, u: &[f64], v: &[f64], w: &[f64]) -> Result<Vec<f64>, MultilinearError> {
        self.check(u)?;
        self.check(v)?;
        self.check(w)?;
        let n = self.dim();
        let mut acc = vec![0.0; n];
        for (sv, sw, weight) in [
            (1.0, 1.0, 1.0),
            (1.0, -1.0, -1.0),
            (-1.0, 1.0, -1.0),
            (-1.0, -1.0, 1.0),
        ] {
            let dir: Vec<f64> = (0..n).map(|i| u[i] + sv * v[i] + sw * w[i]).collect();
            let d = self.directional(&dir, 3, self.h_c, Self::d3_unit)?;
            for (a, x) in acc.iter_mut().zip(&d) {
                *a += weight * x;
            }
        }
        Ok(acc.iter().map(|a| a / 24.0).collect())
    }

    /// Complex extension of `B` by bilinearity over real and imaginary parts.
    pub fn b_complex(
        &self,
        a: &[Complex64],
        b: &[Complex64],
    ) -> Result<ComplexVector, MultilinearError> {
        let (ar, ai) = split(a);
        let (br, bi) = split(b);
        let rr = self.b(&ar, &br)?;
        let ii = self.b(&ai, &bi)?;
        let ri = self.b(&ar, &bi)?;
        let ir = self.b(&ai, &br)?;
        Ok((0..self.dim())
            .map(|k| Complex64::new(rr[k] - ii[k], ri[k] + ir[k]))
            .collect())
    }

    /// Complex extension of `C` by trilinearity over real and imaginary parts.
    pub fn c_complex(
        &self,
        a: &[Complex64],
        b: &[Complex64],
        c: &[Complex64],
    ) -> Result<ComplexVector, MultilinearError> {
        let (ar, ai) = split(a);
        let (br, bi) = split(b);
        let (cr, ci) = split(c);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        let parts = [(&ar, 0), (&ai, 1)];
        for (x, px) in parts {
            for (y, py) in [(&br, 0), (&bi, 1)] {
                for (z, pz) in [(&cr, 0), (&ci, 1)] {
                    // i^(px+py+pz)
                    let unit = match px + py + pz {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    };
                    let term = self.c(x, y, z)?;
                    for (o, t) in out.iter_mut().zip(&term) {
                        *o += unit * t;
                    }
                }
            }
        }
        Ok(out)
    }
}

fn split(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
