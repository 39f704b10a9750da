//! Exact 2×2 complex-matrix algebra for the two-level atom.
//!
//! Basis convention: index 0 is the excited state, index 1 the ground state,
//! so that `σ+σ− = diag(1, 0)`, `σz = diag(1, −1)` and the ground state has
//! Bloch vector `(0, 0, −1)`.
//!
//! The decay generator is `L(X) = −½(σ+σ−X + Xσ+σ−) + σ+Xσ−`. On the basis
//! `{I, σ+, σ−, σ+σ−}` it is diagonal with eigenvalues `0, −½, −½, −1`, which
//! gives the semigroup `exp(tL)` in closed form.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A general 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub entries: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Self {
            entries: [[m00, m01], [m10, m11]],
        }
    }

    pub const fn real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self::new(
            Complex64::new(m00, 0.0),
            Complex64::new(m01, 0.0),
            Complex64::new(m10, 0.0),
            Complex64::new(m11, 0.0),
        )
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    /// Lowering operator `σ− = |g⟩⟨e|`.
    pub const fn sigma_minus() -> Self {
        Self::real(0.0, 0.0, 1.0, 0.0)
    }

    /// Raising operator `σ+ = |e⟩⟨g|`.
    pub const fn sigma_plus() -> Self {
        Self::real(0.0, 1.0, 0.0, 0.0)
    }

    /// Excited-state projector `σ+σ−`.
    pub const fn excited_projector() -> Self {
        Self::real(1.0, 0.0, 0.0, 0.0)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Self::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Self::new(f(a), f(b), f(c), f(d))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Largest entry modulus; used for componentwise comparisons.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Largest singular value, from the eigenvalues of `A†A`.
    pub fn spectral_norm(&self) -> f64 {
        let gram = Hermitian2::from_mat_unchecked(&(self.adjoint() * *self));
        gram.eigenvalues()[1].max(0.0).sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for (row, rrow) in out.entries.iter_mut().zip(rhs.entries.iter()) {
            for (z, w) in row.iter_mut().zip(rrow.iter()) {
                *z += *w;
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.map(|z| -z)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: f64) -> Mat2 {
        self.scale_real(rhs)
    }
}

impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Complex64) -> Mat2 {
        self.scale(rhs)
    }
}

/// A 2×2 Hermitian matrix `[[a, b], [b*, d]]`; Hermiticity holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hermitian2 {
    pub a: f64,
    pub d: f64,
    pub b_re: f64,
    pub b_im: f64,
}

impl Hermitian2 {
    pub const fn new(a: f64, b: Complex64, d: f64) -> Self {
        Self {
            a,
            d,
            b_re: b.re,
            b_im: b.im,
        }
    }

    pub const fn diag(a: f64, d: f64) -> Self {
        Self {
            a,
            d,
            b_re: 0.0,
            b_im: 0.0,
        }
    }

    pub const fn zero() -> Self {
        Self::diag(0.0, 0.0)
    }

    pub const fn identity() -> Self {
        Self::diag(1.0, 1.0)
    }

    pub const fn sigma_x() -> Self {
        Self::new(0.0, Complex64::new(1.0, 0.0), 0.0)
    }

    pub const fn sigma_y() -> Self {
        Self::new(0.0, Complex64::new(0.0, -1.0), 0.0)
    }

    pub const fn sigma_z() -> Self {
        Self::diag(1.0, -1.0)
    }

    /// `σ+σ− = diag(1, 0)`.
    pub const fn excited_projector() -> Self {
        Self::diag(1.0, 0.0)
    }

    pub fn off_diagonal(&self) -> Complex64 {
        Complex64::new(self.b_re, self.b_im)
    }

    /// Accepts `m` if it is Hermitian to `tol`, symmetrising the result.
    pub fn from_mat(m: &Mat2, tol: f64) -> Option<Self> {
        m.is_hermitian(tol).then(|| Self::from_mat_unchecked(m))
    }

    /// Hermitian part of `m`.
    pub fn from_mat_unchecked(m: &Mat2) -> Self {
        let b = 0.5 * (m.get(0, 1) + m.get(1, 0).conj());
        Self::new(m.get(0, 0).re, b, m.get(1, 1).re)
    }

    pub fn to_mat(&self) -> Mat2 {
        let b = self.off_diagonal();
        Mat2::new(
            Complex64::new(self.a, 0.0),
            b,
            b.conj(),
            Complex64::new(self.d, 0.0),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            a: self.a * s,
            d: self.d * s,
            b_re: self.b_re * s,
            b_im: self.b_im * s,
        }
    }

    /// `X²`, which is again Hermitian.
    pub fn square(&self) -> Self {
        Self::from_mat_unchecked(&(self.to_mat() * self.to_mat()))
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - (self.b_re * self.b_re + self.b_im * self.b_im)
    }

    /// Eigenvalues in ascending order.
    ///
    /// The larger-magnitude root comes from the quadratic formula and the
    /// other from `det / λ`, which avoids cancellation in the discriminant.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.a + self.d);
        let half_gap = 0.5 * (self.a - self.d);
        let radius = half_gap.hypot(self.off_diagonal().norm());
        let big = if mean >= 0.0 {
            mean + radius
        } else {
            mean - radius
        };
        let small = if big != 0.0 {
            self.det() / big
        } else {
            0.0
        };
        if big >= small {
            [small, big]
        } else {
            [big, small]
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_mat().max_abs_diff(&other.to_mat())
    }
}

impl Add for Hermitian2 {
    type Output = Hermitian2;
    fn add(self, rhs: Self) -> Self {
        Self {
            a: self.a + rhs.a,
            d: self.d + rhs.d,
            b_re: self.b_re + rhs.b_re,
            b_im: self.b_im + rhs.b_im,
        }
    }
}

impl Sub for Hermitian2 {
    type Output = Hermitian2;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

/// Largest absolute eigenvalue.
pub fn operator_norm(x: &Hermitian2) -> f64 {
    let [lo, hi] = x.eigenvalues();
    lo.abs().max(hi.abs())
}

/// Qubit state given by its Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl BlochVector {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    pub const GROUND: Self = Self::unchecked(0.0, 0.0, -1.0);
    pub const EXCITED: Self = Self::unchecked(0.0, 0.0, 1.0);
    pub const PLUS_X: Self = Self::unchecked(1.0, 0.0, 0.0);
    pub const MINUS_X: Self = Self::unchecked(-1.0, 0.0, 0.0);
    pub const TRACIAL: Self = Self::unchecked(0.0, 0.0, 0.0);

    pub fn new(px: f64, py: f64, pz: f64) -> Result<Self> {
        let v = Self { px, py, pz };
        let norm = v.norm();
        if norm.is_finite() && norm * norm <= 1.0 + Self::NORM_TOLERANCE {
            Ok(v)
        } else {
            Err(Error::InvalidBlochVector { px, py, pz, norm })
        }
    }

    pub const fn unchecked(px: f64, py: f64, pz: f64) -> Self {
        Self { px, py, pz }
    }

    pub fn norm(&self) -> f64 {
        (self.px * self.px + self.py * self.py + self.pz * self.pz).sqrt()
    }

    /// `ρ = ½(I + P·σ)`.
    pub fn density_matrix(&self) -> Hermitian2 {
        Hermitian2::new(
            0.5 * (1.0 + self.pz),
            Complex64::new(0.5 * self.px, -0.5 * self.py),
            0.5 * (1.0 - self.pz),
        )
    }
}

/// `ρ(X) = tr[ρX]`.
pub fn expectation(rho: &BlochVector, x: &Hermitian2) -> f64 {
    (rho.density_matrix().to_mat() * x.to_mat()).trace().re
}

/// `L(X)` for an arbitrary complex matrix.
pub fn lindblad_apply_mat(x: &Mat2) -> Mat2 {
    let sp = Mat2::sigma_plus();
    let sm = Mat2::sigma_minus();
    let n = Mat2::excited_projector();
    (n * *x + *x * n) * (-0.5) + sp * *x * sm
}

pub fn lindblad_apply(x: &Hermitian2) -> Hermitian2 {
    Hermitian2::from_mat_unchecked(&lindblad_apply_mat(&x.to_mat()))
}

/// `exp(tL)(X)` in closed form for an arbitrary complex matrix.
///
/// Writes `X = m11·I + (m00 − m11)·σ+σ− + m01·σ+ + m10·σ−` and damps each
/// component by its eigenvalue.
pub fn evolve_heisenberg_mat(x: &Mat2, t: f64) -> Result<Mat2> {
    require_nonnegative("t", t)?;
    let [[m00, m01], [m10, m11]] = x.entries;
    let half = (-0.5 * t).exp();
    let full = (-t).exp();
    Ok(Mat2::new(
        m11 + (m00 - m11) * full,
        m01 * half,
        m10 * half,
        m11,
    ))
}

pub fn evolve_heisenberg(x: &Hermitian2, t: f64) -> Result<Hermitian2> {
    evolve_heisenberg_mat(&x.to_mat(), t).map(|m| Hermitian2::from_mat_unchecked(&m))
}

/// Classical fourth-order Runge–Kutta integration of `dX/dt = L(X)`.
///
/// Independent of the closed form; kept for cross-checks.
pub fn evolve_heisenberg_rk4(x: &Mat2, t: f64, steps: usize) -> Result<Mat2> {
    require_nonnegative("t", t)?;
    let steps = steps.max(1);
    let h = t / steps as f64;
    let mut state = *x;
    for _ in 0..steps {
        let k1 = lindblad_apply_mat(&state);
        let k2 = lindblad_apply_mat(&(state + k1 * (0.5 * h)));
        let k3 = lindblad_apply_mat(&(state + k2 * (0.5 * h)));
        let k4 = lindblad_apply_mat(&(state + k3 * h));
        state = state + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(state)
}
