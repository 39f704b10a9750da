//! Pointer functions `h` applied to the endpoint of the weighted path.
//!
//! Two optimal families come out of the variational problem:
//!
//! ```text
//! h*(y) = C1·y / (y² + ε)                    (σx, after the constraints force C2 = C3 = 0)
//! h̃(y)  = (D1·y + D2) / (y² + δ) + D3         (σz, with D1 = 0)
//! ```
//!
//! together with the polynomial fall-backs `y/β` and `y²/β² − 1 − β⁻²`. The
//! naive pointers act on the un-weighted integral `ω_t = ∫₀ᵗ (dA + dA*)`
//! instead of the normalized endpoint.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Hermitian2;
use crate::density::TimeHorizon;
use crate::error::{require_positive, Error, Result};
use crate::special::{integral_i, integrate, QuadratureOptions, SQRT_2PI};

/// Residual tolerance accepted from the constraint solvers.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-9;

/// Below this magnitude a constraint denominator counts as degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PointerFunction {
    /// `ω/(2 − 2e^{−t/2})` on the un-weighted integral.
    NaiveLinear { t: f64 },
    /// `(ω² − t)/(4(e^{−t/2} − 1)²) − 1` on the un-weighted integral.
    NaiveQuadratic { t: f64 },
    /// `y/β`.
    Linear { beta: f64 },
    /// `y²/β² − 1 − β⁻²`.
    Quadratic { beta: f64 },
    RationalX { c1: f64, eps: f64 },
    RationalZ { d1: f64, d2: f64, d3: f64, delta: f64 },
}

impl PointerFunction {
    /// Evaluates `h(y)`; the rational families return their asymptote for
    /// non-finite `y`.
    pub fn evaluate(&self, y: f64) -> f64 {
        match *self {
            Self::NaiveLinear { t } => y / naive_linear_scale(t),
            Self::NaiveQuadratic { t } => (y * y - t) / naive_quadratic_scale(t) - 1.0,
            Self::Linear { beta } => y / beta,
            Self::Quadratic { beta } => y * y / (beta * beta) - 1.0 - 1.0 / (beta * beta),
            Self::RationalX { c1, eps } => {
                if !y.is_finite() {
                    0.0
                } else if y.abs() > 1e8 {
                    c1 / (y + eps / y)
                } else {
                    c1 * y / (y * y + eps)
                }
            }
            Self::RationalZ { d1, d2, d3, delta } => {
                if !y.is_finite() {
                    d3
                } else if y.abs() > 1e8 {
                    (d1 + d2 / y) / (y + delta / y) + d3
                } else {
                    (d1 * y + d2) / (y * y + delta) + d3
                }
            }
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match *self {
            Self::NaiveLinear { t } => 1.0 / naive_linear_scale(t),
            Self::NaiveQuadratic { t } => 2.0 * y / naive_quadratic_scale(t),
            Self::Linear { beta } => 1.0 / beta,
            Self::Quadratic { beta } => 2.0 * y / (beta * beta),
            Self::RationalX { c1, eps } => {
                let den = y * y + eps;
                c1 * (eps - y * y) / (den * den)
            }
            Self::RationalZ { d1, d2, delta, .. } => {
                let den = y * y + delta;
                (d1 * (delta - y * y) - 2.0 * d2 * y) / (den * den)
            }
        }
    }

    /// Whether the pointer reads the normalized endpoint `Y_t` (as opposed to
    /// the un-weighted integral used by the naive pointers).
    pub fn acts_on_normalized_endpoint(&self) -> bool {
        !matches!(self, Self::NaiveLinear { .. } | Self::NaiveQuadratic { .. })
    }

    /// Polynomial coefficients (ascending) of the naive and polynomial
    /// families; `None` for the rational ones.
    pub fn polynomial_coefficients(&self) -> Option<Vec<f64>> {
        match *self {
            Self::NaiveLinear { t } => Some(vec![0.0, 1.0 / naive_linear_scale(t)]),
            Self::NaiveQuadratic { t } => {
                let c = naive_quadratic_scale(t);
                Some(vec![-t / c - 1.0, 0.0, 1.0 / c])
            }
            Self::Linear { beta } => Some(vec![0.0, 1.0 / beta]),
            Self::Quadratic { beta } => {
                let b2 = beta * beta;
                Some(vec![-1.0 - 1.0 / b2, 0.0, 1.0 / b2])
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::NaiveLinear { .. } => "naive_linear",
            Self::NaiveQuadratic { .. } => "naive_quadratic",
            Self::Linear { .. } => "linear",
            Self::Quadratic { .. } => "quadratic",
            Self::RationalX { .. } => "rational_x",
            Self::RationalZ { .. } => "rational_z",
        }
    }
}

fn naive_linear_scale(t: f64) -> f64 {
    2.0 - 2.0 * (-0.5 * t).exp()
}

fn naive_quadratic_scale(t: f64) -> f64 {
    4.0 * (-0.5 * t).exp_m1().powi(2)
}

/// Solved coefficients together with the quadrature residuals of the three
/// moment constraints `(ground diagonal, excited diagonal, off-diagonal)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSolution {
    pub pointer: PointerFunction,
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl ConstraintSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn moment_opts() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_subdivisions: 4000,
    }
}

fn gaussian_expectation(f: impl Fn(f64) -> f64) -> Result<f64> {
    let opts = moment_opts();
    let g = |y: f64| f(y) * (-0.5 * y * y).exp();
    let neg = integrate(&g, f64::NEG_INFINITY, 0.0, &opts)?;
    let pos = integrate(&g, 0.0, f64::INFINITY, &opts)?;
    Ok((neg.value + pos.value) / SQRT_2PI)
}

/// `∫ h(y)^power p(y) dy` by quadrature, for pointers on the normalized
/// endpoint.
pub fn moment_against_density(h: &PointerFunction, power: i32, horizon: &TimeHorizon) -> Result<Hermitian2> {
    let b = horizon.beta;
    let hp = |y: f64| h.evaluate(y).powi(power);
    let ground = gaussian_expectation(hp)?;
    let curvature = gaussian_expectation(|y| hp(y) * (y * y - 1.0))?;
    let odd = gaussian_expectation(|y| hp(y) * y)?;
    Ok(Hermitian2::new(
        ground + b * b * curvature,
        Complex64::new(b * odd, 0.0),
        ground,
    ))
}

/// Residuals of `∫ h p = target`, ordered (ground, excited, off-diagonal).
pub fn constraint_residuals(h: &PointerFunction, target: &Hermitian2, horizon: &TimeHorizon) -> Result<Vec<f64>> {
    let m = moment_against_density(h, 1, horizon)?;
    let off = m.off_diagonal() - target.off_diagonal();
    Ok(vec![m.d - target.d, m.a - target.a, off.norm()])
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name: "beta",
            value: beta,
            reason: "must lie in (0, 1]",
        })
    }
}

/// `C1 = √(2π) / (β(√(2π) − εI(ε)))`.
pub fn rational_x_coefficient(eps: f64, beta: f64) -> Result<f64> {
    require_positive("eps", eps)?;
    check_beta(beta)?;
    let den = SQRT_2PI - eps * integral_i(eps)?;
    if den.abs() < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateConstraint {
            what: "sqrt(2pi) - eps*I(eps)",
            denominator: den,
            parameter: eps,
        });
    }
    Ok(SQRT_2PI / (beta * den))
}

/// `(D2, D3)` for the σz family with `D1 = 0`.
pub fn rational_z_coefficients(delta: f64, beta: f64) -> Result<(f64, f64)> {
    require_positive("delta", delta)?;
    check_beta(beta)?;
    let i = integral_i(delta)?;
    let den = SQRT_2PI - (1.0 + delta) * i;
    if den.abs() < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateConstraint {
            what: "sqrt(2pi) - (1+delta)*I(delta)",
            denominator: den,
            parameter: delta,
        });
    }
    let d2 = 2.0 * SQRT_2PI / (beta * beta * den);
    let d3 = -(SQRT_2PI + i * d2) / SQRT_2PI;
    Ok((d2, d3))
}

/// Unbiased σx pointer of the rational family at `ε`.
pub fn solve_unbiased_x(eps: f64, beta: f64) -> Result<ConstraintSolution> {
    let c1 = rational_x_coefficient(eps, beta)?;
    let pointer = PointerFunction::RationalX { c1, eps };
    let horizon = TimeHorizon::from_beta(beta)?;
    let residuals = constraint_residuals(&pointer, &Hermitian2::sigma_x(), &horizon)?;
    Ok(ConstraintSolution {
        pointer,
        coefficients: vec![c1, 0.0, 0.0],
        residuals,
    })
}

/// Unbiased σz pointer of the rational family at `δ`, with `D1 = 0`.
pub fn solve_unbiased_z(delta: f64, beta: f64) -> Result<ConstraintSolution> {
    let (d2, d3) = rational_z_coefficients(delta, beta)?;
    let pointer = PointerFunction::RationalZ {
        d1: 0.0,
        d2,
        d3,
        delta,
    };
    let horizon = TimeHorizon::from_beta(beta)?;
    let residuals = constraint_residuals(&pointer, &Hermitian2::sigma_z(), &horizon)?;
    Ok(ConstraintSolution {
        pointer,
        coefficients: vec![0.0, d2, d3],
        residuals,
    })
}

/// Root of `√(2π) − δI(δ)` on `[1e−6, 1e6]`, i.e. the only `δ` where the σz
/// constraints would admit `D1 ≠ 0`. Scans a log grid and bisects on a sign
/// change.
pub fn nonzero_d1_branch() -> Result<Option<f64>> {
    let f = |d: f64| -> Result<f64> { Ok(SQRT_2PI - d * integral_i(d)?) };
    let grid = crate::special::log_grid(1e-6, 1e6, 2001);
    let mut prev = (grid[0], f(grid[0])?);
    for &d in &grid[1..] {
        let v = f(d)?;
        if v == 0.0 {
            return Ok(Some(d));
        }
        if v.signum() != prev.1.signum() {
            let (mut lo, mut hi) = (prev.0, d);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid)?.signum() == prev.1.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev = (d, v);
    }
    Ok(None)
}

/// All real `y` with `C1·y/(y² + ε) = x`.
pub fn preimages_x(x: f64, c1: f64, eps: f64) -> Vec<f64> {
    if x == 0.0 {
        return vec![0.0];
    }
    let disc = c1 * c1 - 4.0 * x * x * eps;
    let merge_tol = 4.0 * f64::EPSILON * c1 * c1;
    if disc < -merge_tol {
        return Vec::new();
    }
    if disc.abs() <= merge_tol {
        return vec![c1 / (2.0 * x)];
    }
    // q·(2xε/q) = ε: the product of the roots, no division by a small x
    let q = c1 + c1.signum() * disc.sqrt();
    let mut roots = vec![q / (2.0 * x), 2.0 * x * eps / q];
    roots.sort_by(f64::total_cmp);
    roots
}

/// All real `y` with `D2/(y² + δ) + D3 = x` (the `D1 = 0` branch).
pub fn preimages_z(x: f64, d2: f64, d3: f64, delta: f64) -> Vec<f64> {
    if x == d3 {
        // only reached as |y| → ∞
        return Vec::new();
    }
    let y_sq = ((x - d3) * delta - d2) / (d3 - x);
    let tol = 4.0 * f64::EPSILON * (d2.abs() / (d3 - x).abs()).max(delta);
    if y_sq < -tol {
        Vec::new()
    } else if y_sq <= tol {
        vec![0.0]
    } else {
        let y = y_sq.sqrt();
        vec![-y, y]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_x_shape() {
        let h = PointerFunction::RationalX { c1: 2.359, eps: 0.605 };
        assert_eq!(h.evaluate(0.0), 0.0);
        let peak = h.evaluate(0.605f64.sqrt());
        assert!((peak - 2.359 / (2.0 * 0.605f64.sqrt())).abs() < 1e-14);
        for k in 1..200 {
            let y = k as f64 * 0.05;
            assert!(h.evaluate(y) <= peak + 1e-15);
            assert_eq!(h.evaluate(-y), -h.evaluate(y));
        }
        assert_eq!(h.evaluate(f64::INFINITY), 0.0);
        assert!(h.evaluate(1e300).abs() < 1e-299);
    }

    #[test]
    fn rational_z_even_and_asymptote() {
        let h = PointerFunction::RationalZ { d1: 0.0, d2: -21.649, d3: 5.391, delta: 2.701 };
        for k in 0..100 {
            let y = k as f64 * 0.1;
            assert_eq!(h.evaluate(y), h.evaluate(-y));
        }
        assert_eq!(h.evaluate(f64::NEG_INFINITY), 5.391);
        assert!((h.evaluate(1e200) - 5.391).abs() < 1e-12);
    }

    #[test]
    fn naive_linear_value() {
        let t = 2.513;
        let h = PointerFunction::NaiveLinear { t };
        assert!((h.evaluate(1.7) - 1.7 / (2.0 - 2.0 * (-t / 2.0f64).exp())).abs() < 1e-15);
        assert!(!h.acts_on_normalized_endpoint());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let pointers = [
            PointerFunction::RationalX { c1: 2.3, eps: 0.6 },
            PointerFunction::RationalZ { d1: 0.3, d2: -20.0, d3: 5.0, delta: 2.7 },
            PointerFunction::Quadratic { beta: 0.8 },
            PointerFunction::NaiveQuadratic { t: 2.0 },
        ];
        for h in pointers {
            for &y in &[-2.0, -0.3, 0.1, 0.9, 3.0] {
                let step = 1e-5;
                let fd = (h.evaluate(y + step) - h.evaluate(y - step)) / (2.0 * step);
                assert!((fd - h.derivative(y)).abs() < 1e-7, "{h:?} at {y}");
            }
        }
    }

    #[test]
    fn x_solution_reproduces_reported_coefficient() {
        let s = solve_unbiased_x(0.605, 1.0).unwrap();
        assert!((s.coefficients[0] - 2.359).abs() < 5e-4);
        assert!(s.max_residual() < CONSTRAINT_TOLERANCE, "{:?}", s.residuals);
    }

    #[test]
    fn x_coefficient_scales_inversely_with_beta() {
        for &eps in &[0.1, 0.605, 3.0] {
            let full = rational_x_coefficient(eps, 1.0).unwrap();
            let half = rational_x_coefficient(eps, 0.5).unwrap();
            assert!((half - full / 0.5).abs() < 1e-12 * half);
        }
        let s = solve_unbiased_x(0.9, 0.5).unwrap();
        assert!(s.max_residual() < CONSTRAINT_TOLERANCE);
    }

    #[test]
    fn z_solution_reproduces_reported_coefficients() {
        let s = solve_unbiased_z(2.701, 1.0).unwrap();
        assert_eq!(s.coefficients[0], 0.0);
        assert!((s.coefficients[1] + 21.649).abs() < 0.05);
        assert!((s.coefficients[2] - 5.391).abs() < 0.02);
        assert!(s.max_residual() < CONSTRAINT_TOLERANCE, "{:?}", s.residuals);
        let finite = solve_unbiased_z(1.3, 0.7).unwrap();
        assert!(finite.max_residual() < CONSTRAINT_TOLERANCE);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(solve_unbiased_x(0.0, 1.0).is_err());
        assert!(solve_unbiased_x(0.5, 0.0).is_err());
        assert!(solve_unbiased_z(-1.0, 1.0).is_err());
        assert!(solve_unbiased_z(1.0, 1.5).is_err());
    }

    #[test]
    fn d1_branch_never_opens() {
        // δ·I(δ) < √(2π) for every δ > 0, so D1 = 0 is forced
        assert_eq!(nonzero_d1_branch().unwrap(), None);
    }

    #[test]
    fn polynomial_families_are_unbiased() {
        for &beta in &[1.0, 0.9, 0.5] {
            let h = TimeHorizon::from_beta(beta).unwrap();
            let lin = constraint_residuals(&PointerFunction::Linear { beta }, &Hermitian2::sigma_x(), &h).unwrap();
            assert!(lin.iter().all(|r| r.abs() < 1e-9), "{lin:?}");
            let quad = constraint_residuals(&PointerFunction::Quadratic { beta }, &Hermitian2::sigma_z(), &h).unwrap();
            assert!(quad.iter().all(|r| r.abs() < 1e-9), "{quad:?}");
        }
    }

    #[test]
    fn quadratic_offset_must_scale_with_inverse_beta() {
        // y²/β² − 1 − β² is unbiased only at β = 1
        let beta: f64 = 0.5;
        let h = TimeHorizon::from_beta(beta).unwrap();
        let m = moment_against_density(&PointerFunction::Quadratic { beta }, 1, &h).unwrap();
        assert!((m.d + 1.0).abs() < 1e-9);
        let literal_ground = m.d + 1.0 / (beta * beta) - beta * beta;
        assert!((literal_ground + 1.0).abs() > 1.0);
    }

    #[test]
    fn preimages_x_cases() {
        let (c1, eps) = (2.359, 0.605);
        assert_eq!(preimages_x(0.0, c1, eps), vec![0.0]);
        let edge = c1 / (2.0 * eps.sqrt());
        let double = preimages_x(edge, c1, eps);
        assert_eq!(double.len(), 1);
        assert!((double[0] - eps.sqrt()).abs() < 1e-7);
        let double = preimages_x(-edge, c1, eps);
        assert!((double[0] + eps.sqrt()).abs() < 1e-7);
        assert!(preimages_x(edge * 1.001, c1, eps).is_empty());
        let h = PointerFunction::RationalX { c1, eps };
        for &x in &[1e-12, 0.01, 0.7, -1.2, 1.5] {
            let ys = preimages_x(x, c1, eps);
            assert_eq!(ys.len(), 2);
            for y in ys {
                assert!((h.evaluate(y) - x).abs() < 1e-10, "x = {x}, y = {y}");
            }
        }
    }

    #[test]
    fn preimages_z_cases() {
        let (d2, d3, delta) = (-21.649, 5.391, 2.701);
        assert_eq!(preimages_z(d3 + d2 / delta, d2, d3, delta), vec![0.0]);
        assert!(preimages_z(d3 + d2 / delta - 0.01, d2, d3, delta).is_empty());
        assert!(preimages_z(d3 + 0.01, d2, d3, delta).is_empty());
        assert!(preimages_z(d3, d2, d3, delta).is_empty());
        let h = PointerFunction::RationalZ { d1: 0.0, d2, d3, delta };
        for &x in &[-2.5, 0.0, 1.0, 5.0, 5.39] {
            let ys = preimages_z(x, d2, d3, delta);
            assert_eq!(ys.len(), 2);
            for y in ys {
                assert!((h.evaluate(y) - x).abs() < 1e-10);
            }
        }
    }
}
