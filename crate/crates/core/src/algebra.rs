//! Small dense matrices for spatial dimensions 1, 2 and 3.
//!
//! Deformation gradients, plastic strains and their rates are all carried by
//! [`Mat`]. Minors are hard-coded per dimension so determinants and cofactors
//! are exact up to rounding; singular values use a closed form in 2D and a
//! Jacobi iteration on `mᵀm` in 3D.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Off-diagonal threshold for the Jacobi sweeps, relative to the Frobenius norm.
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Symmetry tolerance for [`mat_log_spd`].
const SYMMETRY_TOL: f64 = 1e-10;

/// A `d×d` real matrix with `d ∈ {1, 2, 3}`.
///
/// Entries outside the leading `d×d` block are kept at zero.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Mat {
    dim: usize,
    e: [[f64; 3]; 3],
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        Mat { dim, e: [[0.0; 3]; 3] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m.e[i][i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Mat::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.e[i][i] = *v;
        }
        m
    }

    pub fn scalar(a: f64) -> Self {
        Mat::diag(&[a])
    }

    /// 2×2 matrix from row-major entries.
    pub fn m2(a: f64, b: f64, c: f64, d: f64) -> Self {
        let mut m = Mat::zeros(2);
        m.e[0][0] = a;
        m.e[0][1] = b;
        m.e[1][0] = c;
        m.e[1][1] = d;
        m
    }

    /// Builds a matrix from its rows, rejecting non-square shapes,
    /// unsupported dimensions and non-finite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(dim));
        }
        let mut m = Mat::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(row.len()));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                m.e[i][j] = *v;
            }
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.e[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.e[i][..self.dim].to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.e.iter().flatten().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.dim, |i, j| self.e[j][i])
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.e[i][i]).sum()
    }

    /// Squared Frobenius norm `|m|²`.
    pub fn norm_sq(&self) -> f64 {
        self.e.iter().flatten().map(|v| v * v).sum()
    }

    /// Frobenius norm `|m|`.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.e.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Mat) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.e[i][j] * other.e[i][j];
            }
        }
        s
    }

    /// Trace-free part `m − (tr m / d) I`.
    pub fn deviator(&self) -> Self {
        let mut m = *self;
        let t = self.trace() / self.dim as f64;
        for i in 0..self.dim {
            m.e[i][i] -= t;
        }
        m
    }

    pub fn sym(&self) -> Self {
        Mat::from_fn(self.dim, |i, j| 0.5 * (self.e[i][j] + self.e[j][i]))
    }

    pub fn det(&self) -> f64 {
        det(self)
    }

    pub fn cof(&self) -> Self {
        cof(self)
    }

    /// Inverse through `cof(m)ᵀ / det(m)`; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = det(self);
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let c = cof(self);
        Some(Mat::from_fn(self.dim, |i, j| c.e[j][i] / d))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.e[i][j] * v[j]).sum())
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Mat {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Mat::from_rows(&rows)
    }
}

impl From<Mat> for Vec<Vec<f64>> {
    fn from(m: Mat) -> Self {
        m.rows()
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{:?}", self.rows())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.e[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.e[i][j]
    }
}

impl Add for Mat {
    type Output = Mat;

    fn add(self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dim, rhs.dim);
        Mat::from_fn(self.dim, |i, j| self.e[i][j] + rhs.e[i][j])
    }
}

impl AddAssign for Mat {
    fn add_assign(&mut self, rhs: Mat) {
        *self = *self + rhs;
    }
}

impl Sub for Mat {
    type Output = Mat;

    fn sub(self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dim, rhs.dim);
        Mat::from_fn(self.dim, |i, j| self.e[i][j] - rhs.e[i][j])
    }
}

impl Neg for Mat {
    type Output = Mat;

    fn neg(self) -> Mat {
        self * -1.0
    }
}

impl Mul for Mat {
    type Output = Mat;

    fn mul(self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dim, rhs.dim);
        Mat::from_fn(self.dim, |i, j| {
            (0..self.dim).map(|k| self.e[i][k] * rhs.e[k][j]).sum()
        })
    }
}

impl Mul<f64> for Mat {
    type Output = Mat;

    fn mul(self, s: f64) -> Mat {
        Mat::from_fn(self.dim, |i, j| self.e[i][j] * s)
    }
}

impl Mul<Mat> for f64 {
    type Output = Mat;

    fn mul(self, m: Mat) -> Mat {
        m * self
    }
}

/// A matrix together with its cofactor matrix and determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minors {
    pub matrix: Mat,
    pub cofactor: Mat,
    pub determinant: f64,
}

impl Minors {
    pub fn of(m: &Mat) -> Self {
        Minors { matrix: *m, cofactor: cof(m), determinant: det(m) }
    }
}

/// Determinant by cofactor expansion.
pub fn det(m: &Mat) -> f64 {
    let e = &m.e;
    match m.dim {
        1 => e[0][0],
        2 => e[0][0] * e[1][1] - e[0][1] * e[1][0],
        _ => {
            e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
                - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
                + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
        }
    }
}

/// Matrix of signed minors, so that `cof(m)ᵀ m = det(m) I`.
pub fn cof(m: &Mat) -> Mat {
    let e = &m.e;
    match m.dim {
        1 => Mat::scalar(1.0),
        2 => Mat::m2(e[1][1], -e[1][0], -e[0][1], e[0][0]),
        _ => Mat::from_fn(3, |i, j| {
            let (r0, r1) = others(i);
            let (c0, c1) = others(j);
            let minor = e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0];
            if (i + j) % 2 == 0 {
                minor
            } else {
                -minor
            }
        }),
    }
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    match m.dim {
        1 => vec![m.e[0][0].abs()],
        2 => {
            let n2 = m.norm_sq();
            let d = det(m);
            let disc = (n2 * n2 - 4.0 * d * d).max(0.0).sqrt();
            let s1 = (0.5 * (n2 + disc)).sqrt();
            // σ₁σ₂ = |det| avoids cancellation in the smaller root
            let s2 = if s1 > 0.0 { d.abs() / s1 } else { 0.0 };
            vec![s1, s2.min(s1)]
        }
        _ => {
            let (vals, _) = sym_eigen(&(m.transpose() * *m));
            let mut s: Vec<f64> = vals.iter().map(|v| v.max(0.0).sqrt()).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        }
    }
}

/// Largest singular value (spectral norm).
pub fn spectral_norm(m: &Mat) -> f64 {
    singular_values(m)[0]
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and a matrix whose columns are the
/// corresponding orthonormal eigenvectors.
pub fn sym_eigen(s: &Mat) -> (Vec<f64>, Mat) {
    let n = s.dim;
    let mut a = s.sym();
    let mut v = Mat::identity(n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.e[p][q] * a.e[p][q];
            }
        }
        if off.sqrt() <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.e[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.e[q][q] - a.e[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.e[k][p];
                    let akq = a.e[k][q];
                    a.e[k][p] = c * akp - sn * akq;
                    a.e[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.e[p][k];
                    let aqk = a.e[q][k];
                    a.e[p][k] = c * apk - sn * aqk;
                    a.e[q][k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v.e[k][p];
                    let vkq = v.e[k][q];
                    v.e[k][p] = c * vkp - sn * vkq;
                    v.e[k][q] = sn * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a.e[i][i]).collect(), v)
}

/// Reassembles `V diag(f(λ)) Vᵀ` from an eigen-decomposition.
fn spectral_map(vals: &[f64], vecs: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let n = vecs.dim;
    let fv: Vec<f64> = vals.iter().map(|&l| f(l)).collect();
    Mat::from_fn(n, |i, j| (0..n).map(|k| vecs.e[i][k] * fv[k] * vecs.e[j][k]).sum())
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The matrix is scaled by `2^-s` with `s = ⌈log₂(1 + |a|)⌉ + 4`.
pub fn mat_exp(a: &Mat) -> Mat {
    let n = a.dim;
    let norm = a.norm();
    let squarings = (1.0 + norm).log2().ceil() as i32 + 4;
    let b = *a * 0.5f64.powi(squarings);
    let mut result = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=30 {
        term = term * b * (1.0 / k as f64);
        result += term;
        if term.max_abs() <= 1e-18 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// Principal logarithm of a symmetric positive definite matrix.
pub fn mat_log_spd(s: &Mat) -> Result<Mat> {
    let scale = s.max_abs().max(1.0);
    for i in 0..s.dim {
        for j in (i + 1)..s.dim {
            if (s.e[i][j] - s.e[j][i]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::NotSpd("matrix is not symmetric".into()));
            }
        }
    }
    let (vals, vecs) = sym_eigen(s);
    if let Some(l) = vals.iter().find(|&&l| l <= 0.0) {
        return Err(Error::NotSpd(format!("eigenvalue {l} is not positive")));
    }
    Ok(spectral_map(&vals, &vecs, f64::ln))
}

/// Symmetric positive definite square root of `mᵀm` (right stretch).
pub fn right_stretch(m: &Mat) -> Mat {
    let (vals, vecs) = sym_eigen(&(m.transpose() * *m));
    spectral_map(&vals, &vecs, |l| l.max(0.0).sqrt())
}

/// Polar decomposition `m = R U` with `U` symmetric positive definite.
/// Returns `None` for singular `m`.
pub fn polar(m: &Mat) -> Option<(Mat, Mat)> {
    let u = right_stretch(m);
    let r = *m * u.inverse()?;
    Some((r, u))
}

/// Principal real logarithm of a 2×2 matrix, when one exists.
///
/// Uses the Cayley–Hamilton form `log m = α I + β m`. Matrices with a
/// negative real eigenvalue have no real logarithm unless they are a
/// negative multiple of the identity, in which case a rotation by π is used.
pub fn log_2x2(m: &Mat) -> Option<Mat> {
    assert_eq!(m.dim, 2, "log_2x2 needs a 2×2 matrix");
    let tr = m.trace();
    let d = det(m);
    if d <= 0.0 {
        return None;
    }
    let half = 0.5 * tr;
    let disc = half * half - d;
    let id = Mat::identity(2);
    let scale = half.abs().max(d.sqrt());
    if disc.abs() <= 1e-14 * scale * scale {
        // repeated eigenvalue λ = tr/2
        let lam = half;
        let nilp = *m - id * lam;
        if lam > 0.0 {
            return Some(id * lam.ln() + nilp * (1.0 / lam));
        }
        if nilp.max_abs() <= 1e-12 * scale {
            let j = Mat::m2(0.0, -std::f64::consts::PI, std::f64::consts::PI, 0.0);
            return Some(id * (-lam).ln() + j);
        }
        return None;
    }
    if disc > 0.0 {
        let r = disc.sqrt();
        let l1 = half + r;
        let l2 = half - r;
        if l1 <= 0.0 || l2 <= 0.0 {
            return None;
        }
        // log m = [(log l1 − log l2)/(l1 − l2)] (m − l2 I) + log l2 I
        let beta = (l1.ln() - l2.ln()) / (l1 - l2);
        let alpha = l2.ln() - beta * l2;
        Some(id * alpha + *m * beta)
    } else {
        // complex pair ρ e^{±iθ}
        let rho = d.sqrt();
        let theta = (-disc).sqrt().atan2(half);
        let beta = theta / (rho * theta.sin());
        let alpha = rho.ln() - beta * rho * theta.cos();
        Some(id * alpha + *m * beta)
    }
}

/// Counter-clockwise rotation by `theta`.
pub fn rotation2(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::m2(c, -s, s, c)
}
