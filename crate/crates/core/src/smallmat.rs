//! Small dense linear algebra: finite-difference Jacobians, eigenpairs of
//! real matrices (n <= 16) and shifted complex solves.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::EvalError;
use crate::model::{Params, SystemModel, VectorField};

pub type ComplexVector = Vec<Complex64>;

pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    TooLarge(usize),
    #[error("model has no analytic Jacobian")]
    NoAnalyticJacobian,
    #[error("right-hand side evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// Square real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(n: usize) -> Self {
        RealMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "expected {n}x{n} entries");
        RealMatrix { n, data }
    }

    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        RealMatrix {
            n: N,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_cvec(&self, v: &[Complex64]) -> ComplexVector {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| b * *a).sum())
            .collect()
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
                .unwrap();
            if a[piv * n + col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<RealMatrix, LinalgError> {
        let n = self.n;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(solve_real(self, &e)?);
        }
        let mut inv = Self::zeros(n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Display for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6e}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// `Σ conj(a_i) b_i`.
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn real_part(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

pub fn imag_part(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|z| z.im).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobianScheme {
    Analytic,
    CentralFd { h: f64 },
    /// Analytic when the model provides it, otherwise central differences
    /// with the default step.
    Auto,
}

/// Default central-difference step, cube root of machine epsilon.
pub fn default_fd_step() -> f64 {
    f64::EPSILON.cbrt()
}

pub fn jacobian(
    model: &SystemModel,
    state: &[f64],
    params: &Params,
    scheme: JacobianScheme,
) -> Result<RealMatrix, LinalgError> {
    let n = model.dim();
    match scheme {
        JacobianScheme::Analytic => match model.analytic_jacobian(state, params) {
            Some(entries) => Ok(RealMatrix::from_row_major(n, entries?)),
            None => Err(LinalgError::NoAnalyticJacobian),
        },
        JacobianScheme::CentralFd { h } => fd_jacobian(&model.bind(params), state, h),
        JacobianScheme::Auto => match model.analytic_jacobian(state, params) {
            Some(entries) => Ok(RealMatrix::from_row_major(n, entries?)),
            None => fd_jacobian(&model.bind(params), state, default_fd_step()),
        },
    }
}

/// Column-wise central differences with step `h * max(1, |z_j|)`.
pub fn fd_jacobian(
    field: &dyn VectorField,
    state: &[f64],
    h: f64,
) -> Result<RealMatrix, LinalgError> {
    let n = field.dim();
    let mut jac = RealMatrix::zeros(n);
    let mut z = state.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let step = h * state[j].abs().max(1.0);
        z[j] = state[j] + step;
        field.eval(&z, &mut fp)?;
        z[j] = state[j] - step;
        field.eval(&z, &mut fm)?;
        z[j] = state[j];
        let width = 2.0 * step;
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / width;
        }
    }
    Ok(jac)
}

/// Gaussian elimination with partial pivoting.
pub fn solve_real(m: &RealMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = m.dim();
    let mut a = m.as_slice().to_vec();
    let mut b = rhs.to_vec();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))
            .unwrap();
        if a[piv * n + col].abs() <= 1e-14 * scale {
            return Err(LinalgError::Singular);
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * b[j]).sum();
        b[i] = (b[i] - s) / a[i * n + i];
    }
    Ok(b)
}

/// Complex LU solve. Pivots below `1e-14 * scale` are singular; with
/// `regularize` they are replaced by `ε_mach * scale` instead of failing
/// (used by inverse iteration).
fn solve_complex(
    mut a: Vec<Complex64>,
    n: usize,
    rhs: &[Complex64],
    scale: f64,
    regularize: bool,
) -> Result<ComplexVector, LinalgError> {
    let mut b = rhs.to_vec();
    let scale = scale.max(f64::MIN_POSITIVE);
    let tiny = 1e-14 * scale;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].norm().total_cmp(&a[s * n + col].norm()))
            .unwrap();
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        if a[col * n + col].norm() <= tiny {
            if !regularize {
                return Err(LinalgError::Singular);
            }
            a[col * n + col] = Complex64::new(f64::EPSILON * scale, 0.0);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != Complex64::new(0.0, 0.0) {
                for j in col..n {
                    let t = a[col * n + j];
                    a[r * n + j] -= f * t;
                }
                let t = b[col];
                b[r] -= f * t;
            }
        }
    }
    for i in (0..n).rev() {
        let s: Complex64 = (i + 1..n).map(|j| a[i * n + j] * b[j]).sum();
        b[i] = (b[i] - s) / a[i * n + i];
    }
    Ok(b)
}

fn shifted(m: &RealMatrix, shift: Complex64) -> Vec<Complex64> {
    // shift*I - M
    let n = m.dim();
    let mut a: Vec<Complex64> = m.as_slice().iter().map(|&v| Complex64::new(-v, 0.0)).collect();
    for i in 0..n {
        a[i * n + i] += shift;
    }
    a
}

/// Solves `(shift·I − M) x = rhs`.
pub fn solve_complex_shifted(
    m: &RealMatrix,
    shift: Complex64,
    rhs: &[Complex64],
) -> Result<ComplexVector, LinalgError> {
    let a = shifted(m, shift);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    solve_complex(a, m.dim(), rhs, scale, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit 2-norm right eigenvector.
    pub vector: ComplexVector,
}

/// Eigenvector for a known eigenvalue by inverse iteration.
pub fn eigenvector_for(m: &RealMatrix, value: Complex64) -> Result<ComplexVector, LinalgError> {
    let n = m.dim();
    let a = shifted(m, value);
    let scale = (m.norm() + value.norm()).max(1.0);
    let mut v: ComplexVector = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * (i % 3) as f64))
        .collect();
    for _ in 0..3 {
        let x = solve_complex(a.clone(), n, &v, scale, true)?;
        let norm = cnorm(&x);
        if !norm.is_finite() || norm == 0.0 {
            return Err(LinalgError::NoConvergence);
        }
        v = x.iter().map(|z| z / norm).collect();
    }
    Ok(v)
}

/// All eigenpairs of a small real matrix. Complex eigenvalues come in exact
/// conjugate pairs with conjugate eigenvectors, positive imaginary part
/// first.
pub fn eigen_small(m: &RealMatrix) -> Result<Vec<EigenPair>, LinalgError> {
    let n = m.dim();
    if n > MAX_DIM {
        return Err(LinalgError::TooLarge(n));
    }
    let values = eigenvalues(m)?;
    let mut pairs = Vec::with_capacity(n);
    let mut i = 0;
    while i < values.len() {
        let mu = values[i];
        let vector = eigenvector_for(m, mu)?;
        if mu.im != 0.0 {
            let conj_vec = vector.iter().map(|z| z.conj()).collect();
            pairs.push(EigenPair { value: mu, vector });
            pairs.push(EigenPair {
                value: mu.conj(),
                vector: conj_vec,
            });
            i += 2;
        } else {
            pairs.push(EigenPair { value: mu, vector });
            i += 1;
        }
    }
    Ok(pairs)
}

/// Eigenvalues via balancing, reduction to Hessenberg form and Francis
/// double-shift QR. Complex pairs are adjacent, positive imaginary part
/// first.
pub fn eigenvalues(m: &RealMatrix) -> Result<Vec<Complex64>, LinalgError> {
    let n = m.dim();
    if n > MAX_DIM {
        return Err(LinalgError::TooLarge(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NoConvergence);
    }
    // 1-based working copy keeps the index arithmetic of the classic routine
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    balance(&mut a, n);
    hessenberg(&mut a, n);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a[i][j] = 0.0;
        }
    }
    let (wr, wi) = hqr(&mut a, n)?;
    let mut out = Vec::with_capacity(n);
    let mut k = 1;
    while k <= n {
        if wi[k] != 0.0 && k < n {
            let re = 0.5 * (wr[k] + wr[k + 1]);
            let im = wi[k].abs();
            out.push(Complex64::new(re, im));
            out.push(Complex64::new(re, -im));
            k += 2;
        } else {
            out.push(Complex64::new(wr[k], 0.0));
            k += 1;
        }
    }
    Ok(out)
}

fn balance(a: &mut [Vec<f64>], n: usize) {
    const RADIX: f64 = 2.0;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut().take(n + 1).skip(1) {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

#[allow(clippy::many_single_char_names, unused_assignments)]
fn hqr(a: &mut [Vec<f64>], n: usize) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize;
    let mut t = 0.0;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    let (mut x, mut y, mut z, mut w, mut s);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 2 {
                s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
            } else {
                y = a[nu - 1][nu - 1];
                w = a[nu][nu - 1] * a[nu - 1][nu];
                if l == nu - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nu - 1] = x + z;
                        wr[nu] = x + z;
                        if z != 0.0 {
                            wr[nu] = x - w / z;
                        }
                        wi[nu - 1] = 0.0;
                        wi[nu] = 0.0;
                    } else {
                        wr[nu - 1] = x + p;
                        wr[nu] = x + p;
                        wi[nu - 1] = -z;
                        wi[nu] = z;
                    }
                    nn -= 2;
                } else {
                    if its == 60 {
                        return Err(LinalgError::NoConvergence);
                    }
                    if its == 10 || its == 20 {
                        t += x;
                        for i in 1..=nu {
                            a[i][i] -= x;
                        }
                        s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nu - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nu {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k + 1 <= nu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nu - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                p = a[k][j] + q * a[k + 1][j];
                                if k != nu - 1 {
                                    p += r * a[k + 2][j];
                                    a[k + 2][j] -= p * z;
                                }
                                a[k + 1][j] -= p * y;
                                a[k][j] -= p * x;
                            }
                            let mmin = if nu < k + 3 { nu } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[i][k] + y * a[i][k + 1];
                                if k != nu - 1 {
                                    p += z * a[i][k + 2];
                                    a[i][k + 2] -= p * r;
                                }
                                a[i][k + 1] -= p * q;
                                a[i][k] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 1 || l + 1 >= nn as usize {
                break;
            }
        }
    }
    Ok((wr, wi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_fhn, builtin_vdp, FnField};

    fn residual(m: &RealMatrix, pair: &EigenPair) -> f64 {
        let mv = m.mul_cvec(&pair.vector);
        mv.iter()
            .zip(&pair.vector)
            .map(|(a, b)| (a - pair.value * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn vdp_jacobian_at_origin() {
        let m = builtin_vdp();
        let p = m.default_params();
        let j = jacobian(&m, &[0.0, 0.0], &p, JacobianScheme::Analytic).unwrap();
        assert_eq!(j, RealMatrix::from_rows([[0.0, -1.0], [0.05, 0.0]]));
        let fd = jacobian(&m, &[0.0, 0.0], &p, JacobianScheme::CentralFd { h: default_fd_step() })
            .unwrap();
        for (a, b) in fd.as_slice().iter().zip(j.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn fhn_first_row_is_constant() {
        let m = builtin_fhn();
        let p = m.default_params();
        for z in [[0.1, 0.2, -0.3], [1.5, -0.7, 0.4]] {
            let j = jacobian(&m, &z, &p, JacobianScheme::CentralFd { h: default_fd_step() })
                .unwrap();
            assert!((j[(0, 0)]).abs() < 1e-9);
            assert!((j[(0, 1)] - 1.0).abs() < 1e-9);
            assert!((j[(0, 2)]).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_field_jacobian_is_exact() {
        let m = RealMatrix::from_rows([[1.0, -2.0, 0.5], [3.0, 0.25, -1.0], [0.0, 4.0, 2.0]]);
        let mm = m.clone();
        let field = FnField::new(3, move |z, out| out.copy_from_slice(&mm.mul_vec(z)));
        let j = fd_jacobian(&field, &[0.3, -1.2, 2.0], default_fd_step()).unwrap();
        for (a, b) in j.as_slice().iter().zip(m.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn analytic_scheme_requires_expressions() {
        let cfg = r#"{"name":"lin","states":["x"],"params":{"a":1,"e":0.1},
            "epsilon_param":"e","bifurcation_param":"a","equations":["a*x"]}"#;
        let m = crate::model::load_model(cfg).unwrap();
        let p = m.default_params();
        assert_eq!(
            jacobian(&m, &[1.0], &p, JacobianScheme::Analytic),
            Err(LinalgError::NoAnalyticJacobian)
        );
        let j = jacobian(&m, &[1.0], &p, JacobianScheme::Auto).unwrap();
        assert!((j[(0, 0)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotation_like_eigenvalues() {
        let m = RealMatrix::from_rows([[0.0, -1.0], [0.05, 0.0]]);
        let pairs = eigen_small(&m).unwrap();
        assert_eq!(pairs.len(), 2);
        let w = 0.05f64.sqrt();
        assert!(pairs[0].value.re.abs() < 1e-14);
        assert!((pairs[0].value.im - w).abs() < 1e-14);
        assert!((pairs[0].value.im - 0.2236068).abs() < 1e-7);
        assert_eq!(pairs[1].value, pairs[0].value.conj());
        for p in &pairs {
            assert!(residual(&m, p) <= 1e-10 * m.norm());
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let id = RealMatrix::identity(4);
        let pairs = eigen_small(&id).unwrap();
        assert_eq!(pairs.len(), 4);
        for p in &pairs {
            assert_eq!(p.value, Complex64::new(1.0, 0.0));
            assert!(residual(&id, p) <= 1e-10 * id.norm());
        }
        let d = RealMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let mut vals: Vec<f64> = eigen_small(&d).unwrap().iter().map(|p| p.value.re).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn shifted_solves() {
        let zero = RealMatrix::zeros(2);
        let x = solve_complex_shifted(
            &zero,
            Complex64::new(0.0, 2.0),
            &[Complex64::new(0.0, 2.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        assert!((x[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(x[1].norm() < 1e-15);

        // shift 0 solves -M x = rhs
        let m = RealMatrix::from_rows([[2.0, 1.0], [1.0, 3.0]]);
        let rhs = [Complex64::new(1.0, 0.0), Complex64::new(2.0, -1.0)];
        let x = solve_complex_shifted(&m, Complex64::new(0.0, 0.0), &rhs).unwrap();
        let back = m.mul_cvec(&x);
        for (b, r) in back.iter().zip(&rhs) {
            assert!((b + r).norm() < 1e-14);
        }

        // 2iω is not in the spectrum of the vdP Hopf Jacobian, but iω is
        let j = RealMatrix::from_rows([[0.0, -1.0], [0.05, 0.0]]);
        let w = 0.05f64.sqrt();
        assert!(solve_complex_shifted(&j, Complex64::new(0.0, 2.0 * w), &rhs).is_ok());
        assert_eq!(
            solve_complex_shifted(&j, Complex64::new(0.0, w), &rhs),
            Err(LinalgError::Singular)
        );
    }

    #[test]
    fn real_solve_and_inverse() {
        let m = RealMatrix::from_rows([[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]);
        let inv = m.inverse().unwrap();
        let prod = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - e).abs() < 1e-14);
            }
        }
        assert!((m.determinant() - 18.0).abs() < 1e-12);
        let sing = RealMatrix::from_rows([[1.0, 2.0], [2.0, 4.0]]);
        assert_eq!(solve_real(&sing, &[1.0, 1.0]), Err(LinalgError::Singular));
    }

    #[test]
    fn too_large_is_rejected() {
        let m = RealMatrix::identity(MAX_DIM + 1);
        assert_eq!(eigen_small(&m), Err(LinalgError::TooLarge(MAX_DIM + 1)));
    }
}
