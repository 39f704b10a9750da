//! Error function, the Gaussian–Lorentzian integrals `I(ε)` and `J(ε)`, and
//! the quadrature engine used as their oracle.
//!
//! ```text
//! I(ε) = ∫ e^{−x²/2} / (x² + ε)  dx = π √(e^ε/ε) (1 − erf(√(ε/2)))
//! J(ε) = ∫ e^{−x²/2} / (x² + ε)² dx = (√(2π) + (1 − ε) I(ε)) / 2ε
//! ```

mod erf;
pub mod quadrature;

pub use erf::{erf, erfc, erfcx};
pub use quadrature::{adaptive_quadrature, integrate, QuadratureOptions, QuadratureResult};

use crate::error::{require_positive, Result};

/// `√(2π)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Standard normal density.
#[inline]
pub fn gaussian_pdf(y: f64) -> f64 {
    (-0.5 * y * y).exp() / SQRT_2PI
}

/// Standard normal CDF.
#[inline]
pub fn gaussian_cdf(y: f64) -> f64 {
    0.5 * erfc(-y / std::f64::consts::SQRT_2)
}

/// `I(ε)`, evaluated as `π/√ε · erfcx(√(ε/2))` so that large `ε` does not
/// overflow `e^ε`.
pub fn integral_i(eps: f64) -> Result<f64> {
    require_positive("eps", eps)?;
    Ok(std::f64::consts::PI / eps.sqrt() * erfcx((0.5 * eps).sqrt()))
}

/// `J(ε)` from the integration-by-parts identity.
pub fn integral_j(eps: f64) -> Result<f64> {
    let i = integral_i(eps)?;
    Ok(j_from_i(eps, i))
}

#[inline]
pub(crate) fn j_from_i(eps: f64, i: f64) -> f64 {
    (SQRT_2PI + (1.0 - eps) * i) / (2.0 * eps)
}

/// Residual of `2εJ + (ε − 1)I − √(2π) = 0` for the supplied values.
pub fn integrals_identity_residual(eps: f64, i: f64, j: f64) -> f64 {
    2.0 * eps * j + (eps - 1.0) * i - SQRT_2PI
}

fn lorentz_gauss(eps: f64, power: i32, tol: f64) -> Result<QuadratureResult> {
    require_positive("eps", eps)?;
    let opts = QuadratureOptions {
        abs_tol: 0.0,
        rel_tol: tol,
        max_subdivisions: 4000,
    };
    // even integrand: fold onto the half line and split at the peak width
    let width = eps.sqrt();
    let f = |x: f64| (-0.5 * x * x).exp() / (x * x + eps).powi(power);
    let near = integrate(f, 0.0, width, &opts)?;
    let far = integrate(f, width, f64::INFINITY, &opts)?;
    Ok(QuadratureResult {
        value: 2.0 * (near.value + far.value),
        abs_error_estimate: 2.0 * (near.abs_error_estimate + far.abs_error_estimate),
        evaluations: near.evaluations + far.evaluations,
    })
}

/// Quadrature oracle for `I(ε)`, independent of the error function.
pub fn integral_i_quadrature(eps: f64, tol: f64) -> Result<QuadratureResult> {
    lorentz_gauss(eps, 1, tol)
}

/// Quadrature oracle for `J(ε)`.
pub fn integral_j_quadrature(eps: f64, tol: f64) -> Result<QuadratureResult> {
    lorentz_gauss(eps, 2, tol)
}

/// `n` log-spaced points on `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}
