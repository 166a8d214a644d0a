//! First Lyapunov coefficient of a Hopf point in several normalizations.
//!
//! `ku` works in any dimension from the eigenvectors `q`, `p` and the
//! multilinear forms. The planar conventions (`planar_g`, `gh`, `clw`, `pe`)
//! need `n = 2`. All of them are positive multiples of one another, so they
//! agree in sign.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::hopf::{fix_phase, hopf_eigenvectors, HopfError, HopfPoint};
use crate::multilinear::{ExpansionPoint, MultilinearError};
use crate::smallmat::{
    cdot, eigenvalues, solve_complex_shifted, ComplexVector, LinalgError, RealMatrix,
};

pub const DEGENERACY_THRESHOLD: f64 = 1e-8;
pub const RESONANCE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LyapunovError {
    #[error("2iω₀ = {shift} is within {RESONANCE_GAP:e} of the eigenvalue {mu}")]
    Resonance { shift: Complex64, mu: Complex64 },
    #[error("Jacobian at the Hopf point is singular")]
    SingularJacobian,
    #[error("planar convention requested for a {0}-dimensional system")]
    NotPlanar(usize),
    #[error("Jordan frame is singular")]
    SingularFrame,
    #[error("Jordan frame does not reduce the linear part to a rotation (deviation {0:e})")]
    NotRotation(f64),
    #[error("degenerate Hopf point: l1 = {0:e}")]
    Degenerate(f64),
    #[error(transparent)]
    Multilinear(#[from] MultilinearError),
    #[error(transparent)]
    Hopf(#[from] HopfError),
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for LyapunovError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular => LyapunovError::SingularJacobian,
            other => LyapunovError::Linalg(other),
        }
    }
}

/// Linearization at a Hopf point with its eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfLinearization {
    pub j: RealMatrix,
    pub omega0: f64,
    /// `J q = iω₀ q`, `q̄ᵀq = 1`.
    pub q: ComplexVector,
    /// `Jᵀ p = −iω₀ p`, `p̄ᵀq = 1`.
    pub p: ComplexVector,
}

impl HopfLinearization {
    pub fn new(j: RealMatrix, omega0: f64) -> Result<Self, HopfError> {
        let (q, p) = hopf_eigenvectors(&j, omega0)?;
        Ok(HopfLinearization { j, omega0, q, p })
    }

    pub fn from_hopf(h: &HopfPoint) -> Self {
        HopfLinearization {
            j: h.equilibrium.jacobian.clone(),
            omega0: h.omega0,
            q: h.q.clone(),
            p: h.p.clone(),
        }
    }

    /// Same linearization with `q` replaced by `factor·q` and `p`
    /// compensated so that `p̄ᵀq = 1` still holds.
    pub fn regauged(&self, factor: Complex64) -> Self {
        let q: ComplexVector = self.q.iter().map(|z| z * factor).collect();
        let s = cdot(&self.p, &q);
        let p = self.p.iter().map(|z| z / s.conj()).collect();
        HopfLinearization {
            j: self.j.clone(),
            omega0: self.omega0,
            q,
            p,
        }
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }
}

fn conj(v: &[Complex64]) -> ComplexVector {
    v.iter().map(|z| z.conj()).collect()
}

fn check_resonance(lin: &HopfLinearization) -> Result<(), LyapunovError> {
    let shift = Complex64::new(0.0, 2.0 * lin.omega0);
    for mu in eigenvalues(&lin.j)? {
        if (shift - mu).norm() < RESONANCE_GAP {
            return Err(LyapunovError::Resonance { shift, mu });
        }
    }
    Ok(())
}

/// `l1 = (1/2ω₀) Re[p̄ᵀC(q,q,q̄) − 2p̄ᵀB(q, J⁻¹B(q,q̄)) + p̄ᵀB(q̄, (2iω₀−J)⁻¹B(q,q))]`.
pub fn l1_kuznetsov(
    lin: &HopfLinearization,
    forms: &ExpansionPoint,
) -> Result<f64, LyapunovError> {
    check_resonance(lin)?;
    let (q, p, w) = (&lin.q, &lin.p, lin.omega0);
    let qb = conj(q);
    let b_qqb = forms.b_complex(q, &qb)?;
    let b_qq = forms.b_complex(q, q)?;
    let zero = Complex64::new(0.0, 0.0);
    // solve_complex_shifted(J, 0, ·) applies (−J)⁻¹
    let s: ComplexVector = solve_complex_shifted(&lin.j, zero, &b_qqb)?
        .iter()
        .map(|z| -z)
        .collect();
    let r = solve_complex_shifted(&lin.j, Complex64::new(0.0, 2.0 * w), &b_qq)
        .map_err(|_| LyapunovError::Resonance {
            shift: Complex64::new(0.0, 2.0 * w),
            mu: Complex64::new(0.0, 2.0 * w),
        })?;
    let c = forms.c_complex(q, q, &qb)?;
    let total = cdot(p, &c) - 2.0 * cdot(p, &forms.b_complex(q, &s)?)
        + cdot(p, &forms.b_complex(&qb, &r)?);
    Ok(total.re / (2.0 * w))
}

/// `ω₀ · l1_ku`.
pub fn l1_matcont(omega0: f64, l1_ku: f64) -> f64 {
    omega0 * l1_ku
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GCoefficients {
    pub g20: Complex64,
    pub g11: Complex64,
    pub g21: Complex64,
}

pub fn g_coefficients(
    lin: &HopfLinearization,
    forms: &ExpansionPoint,
) -> Result<GCoefficients, LyapunovError> {
    if lin.dim() != 2 {
        return Err(LyapunovError::NotPlanar(lin.dim()));
    }
    let (q, p) = (&lin.q, &lin.p);
    let qb = conj(q);
    Ok(GCoefficients {
        g20: cdot(p, &forms.b_complex(q, q)?),
        g11: cdot(p, &forms.b_complex(q, &qb)?),
        g21: cdot(p, &forms.c_complex(q, q, &qb)?),
    })
}

/// `(1/2ω₀²) Re(i·g20·g11 + ω₀·g21)`.
pub fn l1_planar_g(g: &GCoefficients, omega0: f64) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    (i * g.g20 * g.g11 + omega0 * g.g21).re / (2.0 * omega0 * omega0)
}

/// Second and third partial derivatives of one component at the origin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Partials {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
    pub xxx: f64,
    pub xxy: f64,
    pub xyy: f64,
    pub yyy: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PlanarPartials {
    pub f: Partials,
    pub g: Partials,
}

/// Partials of `N⁻¹ F(z* + N·(u, v))` with respect to `(u, v)`; the linear
/// part does not contribute, so these are the partials of the nonlinear
/// remainder in the frame `N`.
pub fn planar_partials(
    forms: &ExpansionPoint,
    frame: &RealMatrix,
) -> Result<PlanarPartials, LyapunovError> {
    if forms.dim() != 2 || frame.dim() != 2 {
        return Err(LyapunovError::NotPlanar(forms.dim()));
    }
    let inv = frame.inverse().map_err(|_| LyapunovError::SingularFrame)?;
    let cols = [[frame[(0, 0)], frame[(1, 0)]], [frame[(0, 1)], frame[(1, 1)]]];
    let (ex, ey) = (&cols[0][..], &cols[1][..]);
    let b2 = |a: &[f64], b: &[f64]| -> Result<Vec<f64>, LyapunovError> {
        Ok(inv.mul_vec(&forms.b(a, b)?))
    };
    let c3 = |a: &[f64], b: &[f64], c: &[f64]| -> Result<Vec<f64>, LyapunovError> {
        Ok(inv.mul_vec(&forms.c(a, b, c)?))
    };
    let xx = b2(ex, ex)?;
    let xy = b2(ex, ey)?;
    let yy = b2(ey, ey)?;
    let xxx = c3(ex, ex, ex)?;
    let xxy = c3(ex, ex, ey)?;
    let xyy = c3(ex, ey, ey)?;
    let yyy = c3(ey, ey, ey)?;
    let component = |k: usize| Partials {
        xx: xx[k],
        xy: xy[k],
        yy: yy[k],
        xxx: xxx[k],
        xxy: xxy[k],
        xyy: xyy[k],
        yyy: yyy[k],
    };
    Ok(PlanarPartials {
        f: component(0),
        g: component(1),
    })
}

/// A frame `N` with `N⁻¹ M N = [[0, −ω₀], [ω₀, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanizedPlanar {
    pub n: RealMatrix,
    pub omega0: f64,
}

impl JordanizedPlanar {
    fn checked(m: &RealMatrix, n: RealMatrix, omega0: f64) -> Result<Self, LyapunovError> {
        let inv = n.inverse().map_err(|_| LyapunovError::SingularFrame)?;
        if n.determinant().abs() <= 1e-12 * n.norm() * n.norm() {
            return Err(LyapunovError::SingularFrame);
        }
        let rot = inv.matmul(m).matmul(&n);
        let target = RealMatrix::from_rows([[0.0, -omega0], [omega0, 0.0]]);
        let dev = rot
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > 1e-8 * (1.0 + m.norm()) {
            return Err(LyapunovError::NotRotation(dev));
        }
        Ok(JordanizedPlanar { n, omega0 })
    }

    /// `N⁻¹MN`, for inspection.
    pub fn rotation_block(&self, m: &RealMatrix) -> RealMatrix {
        let inv = self.n.inverse().expect("frame was checked to be invertible");
        inv.matmul(m).matmul(&self.n)
    }

    pub fn partials(&self, forms: &ExpansionPoint) -> Result<PlanarPartials, LyapunovError> {
        planar_partials(forms, &self.n)
    }
}

/// `N = [[2Re q₁, −2Im q₁], [2Re q₂, −2Im q₂]]` built from the given `q`.
pub fn jordan_transform_planar(
    m: &RealMatrix,
    q: &[Complex64],
    omega0: f64,
) -> Result<JordanizedPlanar, LyapunovError> {
    if m.dim() != 2 || q.len() != 2 {
        return Err(LyapunovError::NotPlanar(m.dim()));
    }
    let n = RealMatrix::from_rows([
        [2.0 * q[0].re, -2.0 * q[0].im],
        [2.0 * q[1].re, -2.0 * q[1].im],
    ]);
    JordanizedPlanar::checked(m, n, omega0)
}

/// Eigenvector scaled so that its largest-modulus component is exactly
/// `1/2`. With this gauge the frame built from `q` maps a system already in
/// rotation form to itself.
pub fn gh_frame_vector(q: &[Complex64]) -> ComplexVector {
    let mut v = q.to_vec();
    fix_phase(&mut v);
    let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if big > 0.0 {
        v.iter_mut().for_each(|z| *z *= 0.5 / big);
    }
    v
}

/// Frame that keeps the first coordinate: `N = [[1, 0], [m₂₂/m₁₂, −ω₀/m₁₂]]`.
pub fn x_preserving_frame(m: &RealMatrix, omega0: f64) -> Result<JordanizedPlanar, LyapunovError> {
    if m.dim() != 2 {
        return Err(LyapunovError::NotPlanar(m.dim()));
    }
    let m12 = m[(0, 1)];
    if m12.abs() <= f64::EPSILON * m.norm() {
        return Err(LyapunovError::SingularFrame);
    }
    let n = RealMatrix::from_rows([[1.0, 0.0], [m[(1, 1)] / m12, -omega0 / m12]]);
    JordanizedPlanar::checked(m, n, omega0)
}

/// Rotation-form formula applied to partials in a Jordan frame.
pub fn l1_gh_from_partials(d: &PlanarPartials, omega0: f64) -> f64 {
    let (f, g) = (&d.f, &d.g);
    (f.xxx + f.xyy + g.xxy + g.yyy) / 16.0
        + (f.xy * (f.xx + f.yy) - g.xy * (g.xx + g.yy) - f.xx * g.xx + f.yy * g.yy)
            / (16.0 * omega0)
}

pub fn l1_gh(jordan: &JordanizedPlanar, forms: &ExpansionPoint) -> Result<f64, LyapunovError> {
    Ok(l1_gh_from_partials(&jordan.partials(forms)?, jordan.omega0))
}

/// `(3π/4ω₀²)([quadratic terms] + ω₀[cubic terms])` in a Jordan frame.
pub fn l1_pe_from_partials(d: &PlanarPartials, omega0: f64) -> f64 {
    let (f, g) = (&d.f, &d.g);
    let quad = f.xy * f.yy + f.yy * g.yy - f.xx * g.xx - g.xy * g.xx - g.xy * g.yy + f.xy * f.xx;
    let cubic = g.yyy + f.xxx + f.xyy + g.xxy;
    3.0 * PI / (4.0 * omega0 * omega0) * (quad + omega0 * cubic)
}

pub fn l1_pe(jordan: &JordanizedPlanar, forms: &ExpansionPoint) -> Result<f64, LyapunovError> {
    Ok(l1_pe_from_partials(&jordan.partials(forms)?, jordan.omega0))
}

/// Chow–Li–Wang normalization: the rotation-form formula in the frame that
/// keeps the first coordinate (see [`x_preserving_frame`]).
pub fn l1_clw(m: &RealMatrix, omega0: f64, forms: &ExpansionPoint) -> Result<f64, LyapunovError> {
    l1_gh(&x_preserving_frame(m, omega0)?, forms)
}

/// The closed-form expression in the untransformed coordinates exactly as it
/// is usually printed, including its `−2g_xy` and `−2f_xy²` terms. It does not
/// reproduce [`l1_clw`] in general and is kept as a diagnostic.
pub fn l1_clw_as_printed(m: &RealMatrix, omega0: f64, d: &PlanarPartials) -> f64 {
    let (f, g) = (&d.f, &d.g);
    let (m12, m21, m22) = (m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let w2 = omega0 * omega0;
    m12 / (16.0 * w2 * w2)
        * (w2 * ((f.xxx + g.xxy) + 2.0 * m22 * (f.xxy + g.xyy) - m21 * (f.xyy + g.yyy))
            - m12 * m22 * (f.xx * f.xx - f.xx * g.xy - f.xy * g.xx - g.xx * g.yy - 2.0 * g.xy)
            - m21 * m22 * (g.yy * g.yy - g.yy * f.xy - g.xy * f.yy - f.xx * f.yy - 2.0 * f.xy * f.xy)
            + m12 * m12 * (f.xx * g.xx + g.xx * g.xy)
            - m21 * m21 * (f.yy * g.yy + f.xy * f.yy)
            - (w2 + 3.0 * m22 * m22) * (f.xx * f.xy - g.xy * g.yy))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criticality {
    #[serde(rename = "super")]
    Supercritical,
    #[serde(rename = "sub")]
    Subcritical,
}

impl Criticality {
    pub fn label(self) -> &'static str {
        match self {
            Criticality::Supercritical => "supercritical",
            Criticality::Subcritical => "subcritical",
        }
    }
}

pub fn classify_criticality(l1: f64, threshold: f64) -> Result<Criticality, LyapunovError> {
    if !(l1.abs() > threshold) {
        return Err(LyapunovError::Degenerate(l1));
    }
    Ok(if l1 < 0.0 {
        Criticality::Supercritical
    } else {
        Criticality::Subcritical
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub omega0: f64,
    pub l1_ku: f64,
    pub l1_mc: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_planar_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_gh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_clw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_clw_as_printed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_pe: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<GCoefficients>,
    pub criticality: Criticality,
}

impl LyapunovReport {
    /// Every convention present, with its name.
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("ku", self.l1_ku), ("mc", self.l1_mc)];
        for (name, v) in [
            ("planar_g", self.l1_planar_g),
            ("gh", self.l1_gh),
            ("clw", self.l1_clw),
            ("pe", self.l1_pe),
        ] {
            if let Some(v) = v {
                out.push((name, v));
            }
        }
        out
    }

    /// True when all conventions above `threshold` in magnitude share a sign.
    pub fn signs_agree(&self, threshold: f64) -> bool {
        let signs: Vec<f64> = self
            .values()
            .iter()
            .filter(|(_, v)| v.abs() > threshold)
            .map(|(_, v)| v.signum())
            .collect();
        signs.windows(2).all(|w| w[0] == w[1])
    }
}

/// All applicable conventions at a Hopf point.
pub fn lyapunov_report(
    lin: &HopfLinearization,
    forms: &ExpansionPoint,
    degeneracy: f64,
) -> Result<LyapunovReport, LyapunovError> {
    let l1_ku = l1_kuznetsov(lin, forms)?;
    let l1_mc = l1_matcont(lin.omega0, l1_ku);
    let mut report = LyapunovReport {
        omega0: lin.omega0,
        l1_ku,
        l1_mc,
        l1_planar_g: None,
        l1_gh: None,
        l1_clw: None,
        l1_clw_as_printed: None,
        l1_pe: None,
        g: None,
        criticality: classify_criticality(l1_mc, degeneracy)?,
    };
    if lin.dim() == 2 {
        let w = lin.omega0;
        let g = g_coefficients(lin, forms)?;
        report.l1_planar_g = Some(l1_planar_g(&g, w));
        report.g = Some(g);
        let jordan = jordan_transform_planar(&lin.j, &gh_frame_vector(&lin.q), w)?;
        let d = jordan.partials(forms)?;
        report.l1_gh = Some(l1_gh_from_partials(&d, w));
        report.l1_pe = Some(l1_pe_from_partials(&d, w));
        report.l1_clw = Some(l1_clw(&lin.j, w, forms)?);
        let raw = planar_partials(forms, &RealMatrix::identity(2))?;
        report.l1_clw_as_printed = Some(l1_clw_as_printed(&lin.j, w, &raw));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::locate_hopf;
    use crate::model::{builtin_vdp, FnField};
    use crate::multilinear::FdOptions;

    fn vdp_setup(eps: f64) -> (HopfLinearization, Vec<f64>, crate::model::Params) {
        let m = builtin_vdp();
        let p = m.default_params().with(m.epsilon_index(), eps);
        let h = locate_hopf(&m, &p, (-0.02, 0.02), &[0.0, 0.0], &Default::default()).unwrap();
        (
            HopfLinearization::from_hopf(&h),
            h.equilibrium.state.clone(),
            h.params().clone(),
        )
    }

    #[test]
    fn vdp_conventions() {
        let m = builtin_vdp();
        let (lin, z, p) = vdp_setup(0.05);
        let field = m.bind(&p);
        let forms = ExpansionPoint::new(&field, &z, FdOptions::default()).unwrap();
        let r = lyapunov_report(&lin, &forms, DEGENERACY_THRESHOLD).unwrap();
        let w = 0.05f64.sqrt();
        assert!((r.l1_ku - 1.0 / (2.0 * w * 1.05)).abs() < 1e-7, "{}", r.l1_ku);
        assert!((r.l1_mc - 1.0 / 2.1).abs() < 1e-7);
        assert_eq!(r.l1_mc, lin.omega0 * r.l1_ku);
        assert!((r.l1_planar_g.unwrap() - r.l1_ku).abs() < 1e-10);
        assert!((r.l1_gh.unwrap() - 0.125).abs() < 1e-7);
        assert!((r.l1_clw.unwrap() - 0.125).abs() < 1e-7);
        assert!((r.l1_clw_as_printed.unwrap() + 2.5).abs() < 1e-6);
        let ratio = r.l1_pe.unwrap() / r.l1_gh.unwrap();
        assert!((ratio - 12.0 * PI / w).abs() < 1e-6 * ratio);
        assert_eq!(r.criticality, Criticality::Subcritical);
        assert!(r.signs_agree(DEGENERACY_THRESHOLD));
    }

    #[test]
    fn vdp_jordan_frame_is_rotation() {
        let (lin, _, _) = vdp_setup(0.05);
        let jordan = jordan_transform_planar(&lin.j, &lin.q, lin.omega0).unwrap();
        let rot = jordan.rotation_block(&lin.j);
        let w = lin.omega0;
        let target = [0.0, -w, w, 0.0];
        for (a, b) in rot.as_slice().iter().zip(target) {
            assert!((a - b).abs() <= 1e-10);
        }
        let gh = jordan_transform_planar(&lin.j, &gh_frame_vector(&lin.q), w).unwrap();
        assert!((gh.n[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((gh.n[(1, 1)] - w).abs() < 1e-12);
    }

    #[test]
    fn rotation_form_frame() {
        let w = 1.3;
        let m = RealMatrix::from_rows([[0.0, -w], [w, 0.0]]);
        let s = 0.5f64.sqrt();
        let q = [Complex64::new(s, 0.0), Complex64::new(0.0, -s)];
        let j = jordan_transform_planar(&m, &q, w).unwrap();
        assert!((j.n[(0, 0)] - 2.0 * s).abs() < 1e-15 && (j.n[(1, 1)] - 2.0 * s).abs() < 1e-15);
        assert_eq!(j.rotation_block(&m), m);
        let real_q = [Complex64::new(0.5, 0.0), Complex64::new(0.3, 0.0)];
        assert_eq!(
            jordan_transform_planar(&m, &real_q, w),
            Err(LyapunovError::SingularFrame)
        );
    }

    #[test]
    fn planar_g_formula() {
        let zero = Complex64::new(0.0, 0.0);
        let w = 0.8;
        let g = GCoefficients {
            g20: zero,
            g11: zero,
            g21: Complex64::new(2.0 * w, 0.0),
        };
        assert!((l1_planar_g(&g, w) - 1.0).abs() < 1e-15);
        let g = GCoefficients {
            g20: Complex64::new(0.0, 1.0),
            g11: Complex64::new(0.0, 1.0),
            g21: Complex64::new(0.0, 5.0),
        };
        // i·(i·i) = −i has zero real part, and so does ω·g21
        assert_eq!(l1_planar_g(&g, w), 0.0);
        let g = GCoefficients {
            g20: Complex64::new(2.0, 0.0),
            g11: Complex64::new(0.0, 1.5),
            g21: Complex64::new(0.0, 5.0),
        };
        assert!((l1_planar_g(&g, w) - (-3.0) / (2.0 * w * w)).abs() < 1e-14);
    }

    #[test]
    fn linear_system_gives_zero() {
        let w = 0.9;
        let field = FnField::new(2, move |z, out| {
            out[0] = -w * z[1];
            out[1] = w * z[0];
        });
        let lin = HopfLinearization::new(RealMatrix::from_rows([[0.0, -w], [w, 0.0]]), w).unwrap();
        let forms = ExpansionPoint::new(&field, &[0.0, 0.0], FdOptions::default()).unwrap();
        assert!(l1_kuznetsov(&lin, &forms).unwrap().abs() < 1e-12);
        let g = g_coefficients(&lin, &forms).unwrap();
        assert!(g.g20.norm() < 1e-12 && g.g11.norm() < 1e-12);
        let jordan = jordan_transform_planar(&lin.j, &lin.q, w).unwrap();
        assert!(l1_pe(&jordan, &forms).unwrap().abs() < 1e-12);
        assert!(l1_clw(&lin.j, w, &forms).unwrap().abs() < 1e-12);
        assert_eq!(
            lyapunov_report(&lin, &forms, DEGENERACY_THRESHOLD).unwrap_err(),
            LyapunovError::Degenerate(l1_kuznetsov(&lin, &forms).unwrap() * w)
        );
    }

    #[test]
    fn resonance_is_reported() {
        // eigenvalues ±i and 2i·(1) present through a 4x4 block
        let m = RealMatrix::from_row_major(
            4,
            vec![
                0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 2.0, 0.0,
            ],
        );
        let mm = m.clone();
        let field = FnField::new(4, move |z, out| {
            out.copy_from_slice(&mm.mul_vec(z));
            out[0] += z[0] * z[0];
        });
        let lin = HopfLinearization::new(m, 1.0).unwrap();
        let forms = ExpansionPoint::new(&field, &[0.0; 4], FdOptions::default()).unwrap();
        assert!(matches!(
            l1_kuznetsov(&lin, &forms),
            Err(LyapunovError::Resonance { .. })
        ));
    }

    #[test]
    fn criticality() {
        assert_eq!(
            classify_criticality(-0.3, DEGENERACY_THRESHOLD),
            Ok(Criticality::Supercritical)
        );
        assert_eq!(
            classify_criticality(0.4762, DEGENERACY_THRESHOLD),
            Ok(Criticality::Subcritical)
        );
        assert_eq!(
            classify_criticality(1e-12, DEGENERACY_THRESHOLD),
            Err(LyapunovError::Degenerate(1e-12))
        );
    }
}
