//! Quality `σ² = ‖M(h²) − M(h)²‖` of an unbiased pointer.
//!
//! For an unbiased pointer `M(h) = X`, so the added-variance matrix is
//! `M(h²) − X²`. Its diagonal entries are `d1` (excited, the `σ+σ−`
//! component) and `d2` (ground).

use serde::{Deserialize, Serialize};

use crate::algebra::{Hermitian2, Mat2};
use crate::density::{MomentHierarchy, TimeHorizon};
use crate::error::{require_positive, Error, Result};
use crate::pointers::{
    moment_against_density, rational_x_coefficient, rational_z_coefficients, PointerFunction,
};
use crate::special::{integral_i, j_from_i, SQRT_2PI};

/// Per-entry tolerance on `M(h) − X` accepted by [`quality`].
pub const UNBIASED_TOLERANCE: f64 = 1e-8;

/// Tolerance below the bound `‖[X, X̃]‖/2` tolerated by [`heisenberg_check`].
pub const HEISENBERG_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub d1: f64,
    pub d2: f64,
    pub sigma_sq: f64,
    pub sigma: f64,
    pub pointer: PointerFunction,
    pub horizon: TimeHorizon,
    pub target: Hermitian2,
}

impl QualityReport {
    fn from_diagonal(d1: f64, d2: f64, pointer: PointerFunction, horizon: TimeHorizon, target: Hermitian2) -> Self {
        let sigma_sq = d1.max(d2);
        Self {
            d1,
            d2,
            sigma_sq,
            sigma: sigma_sq.max(0.0).sqrt(),
            pointer,
            horizon,
            target,
        }
    }
}

fn naive_steps(t: f64) -> usize {
    ((t * 800.0).ceil() as usize).max(2000)
}

fn naive_moment(h: &PointerFunction, power: u32) -> Result<Hermitian2> {
    let t = match *h {
        PointerFunction::NaiveLinear { t } | PointerFunction::NaiveQuadratic { t } => t,
        _ => unreachable!("only naive pointers act on the raw integral"),
    };
    require_positive("t", t)?;
    let base = h.polynomial_coefficients().expect("naive pointers are polynomial");
    let mut coeffs = vec![1.0];
    for _ in 0..power {
        let mut next = vec![0.0; coeffs.len() + base.len() - 1];
        for (i, a) in coeffs.iter().enumerate() {
            for (j, b) in base.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        coeffs = next;
    }
    let hierarchy = MomentHierarchy::integrate(coeffs.len() - 1, t, naive_steps(t), |_| 1.0)?;
    Ok(Hermitian2::from_mat_unchecked(&hierarchy.polynomial_moment(&coeffs)))
}

/// `M(h^power)`. Pointers on the normalized endpoint are integrated against
/// `p(y)` by quadrature; the naive pointers go through the `F`-map ODE
/// hierarchy in their own time variable, so `horizon` is not used for them.
pub fn moment_matrix(h: &PointerFunction, power: u32, horizon: &TimeHorizon) -> Result<Hermitian2> {
    if h.acts_on_normalized_endpoint() {
        moment_against_density(h, power as i32, horizon)
    } else {
        naive_moment(h, power)
    }
}

/// Rejects `h` unless `M(h)` matches `target` entrywise to
/// [`UNBIASED_TOLERANCE`].
pub fn check_unbiased(first_moment: &Hermitian2, target: &Hermitian2) -> Result<()> {
    let checks = [
        ("excited diagonal (1,1)", first_moment.a - target.a),
        ("ground diagonal (2,2)", first_moment.d - target.d),
        ("off-diagonal (1,2)", (first_moment.off_diagonal() - target.off_diagonal()).norm()),
    ];
    for (moment, residual) in checks {
        if !(residual.abs() <= UNBIASED_TOLERANCE) {
            return Err(Error::BiasedPointer {
                moment,
                residual,
                tolerance: UNBIASED_TOLERANCE,
            });
        }
    }
    Ok(())
}

/// Quality of `h` as an estimator of `target`, from the moment matrices.
pub fn quality(h: &PointerFunction, target: &Hermitian2, horizon: &TimeHorizon) -> Result<QualityReport> {
    let m1 = moment_matrix(h, 1, horizon)?;
    check_unbiased(&m1, target)?;
    let added = moment_matrix(h, 2, horizon)? - target.square();
    Ok(QualityReport::from_diagonal(added.a, added.d, *h, *horizon, *target))
}

/// The full added-variance matrix `M(h²) − M(h)²`.
pub fn added_variance(h: &PointerFunction, horizon: &TimeHorizon) -> Result<Hermitian2> {
    let m1 = moment_matrix(h, 1, horizon)?;
    Ok(moment_matrix(h, 2, horizon)? - m1.square())
}

/// Closed-form `(d1, d2)` of the σx family at `(ε, β)`:
///
/// ```text
/// d2 = C1²/√(2π) (I − εJ) − 1
/// d1 = C1²β²/√(2π) (√(2π) − (1 + 2ε)I + ε(1 + ε)J) + d2
/// ```
pub fn rational_x_d(eps: f64, beta: f64) -> Result<(f64, f64)> {
    let c1 = rational_x_coefficient(eps, beta)?;
    let i = integral_i(eps)?;
    let j = j_from_i(eps, i);
    let d2 = c1 * c1 / SQRT_2PI * (i - eps * j) - 1.0;
    let d1 = c1 * c1 * beta * beta / SQRT_2PI * (SQRT_2PI - (1.0 + 2.0 * eps) * i + eps * (1.0 + eps) * j) + d2;
    Ok((d1, d2))
}

/// Closed-form `(d1, d2)` of the σz family at `(δ, β)`, from the Gaussian
/// moments of `h̃²` and `h̃²(y² − 1)`.
pub fn rational_z_d(delta: f64, beta: f64) -> Result<(f64, f64)> {
    let (d2c, d3c) = rational_z_coefficients(delta, beta)?;
    let i = integral_i(delta)?;
    let j = j_from_i(delta, i);
    let h_sq = (d2c * d2c * j + 2.0 * d2c * d3c * i) / SQRT_2PI + d3c * d3c;
    let h_sq_curv = (d2c * d2c * (i - (1.0 + delta) * j) + 2.0 * d2c * d3c * (SQRT_2PI - (1.0 + delta) * i)) / SQRT_2PI;
    let d2 = h_sq - 1.0;
    let d1 = h_sq + beta * beta * h_sq_curv - 1.0;
    Ok((d1, d2))
}

/// [`QualityReport`] of the solved σx pointer from the closed forms alone.
pub fn rational_x_report(eps: f64, beta: f64) -> Result<QualityReport> {
    let (d1, d2) = rational_x_d(eps, beta)?;
    let c1 = rational_x_coefficient(eps, beta)?;
    Ok(QualityReport::from_diagonal(
        d1,
        d2,
        PointerFunction::RationalX { c1, eps },
        TimeHorizon::from_beta(beta)?,
        Hermitian2::sigma_x(),
    ))
}

/// [`QualityReport`] of the solved σz pointer from the closed forms alone.
pub fn rational_z_report(delta: f64, beta: f64) -> Result<QualityReport> {
    let (d1, d2) = rational_z_d(delta, beta)?;
    let (d2c, d3c) = rational_z_coefficients(delta, beta)?;
    Ok(QualityReport::from_diagonal(
        d1,
        d2,
        PointerFunction::RationalZ {
            d1: 0.0,
            d2: d2c,
            d3: d3c,
            delta,
        },
        TimeHorizon::from_beta(beta)?,
        Hermitian2::sigma_z(),
    ))
}

/// `σ²(t) = t/(2 − 2e^{−t/2})² + 1` for the naive σx pointer.
pub fn naive_quality_x(t: f64) -> Result<f64> {
    require_positive("t", t)?;
    let c = -2.0 * (-0.5 * t).exp_m1();
    Ok(t / (c * c) + 1.0)
}

/// `σ̃²(t) = t²/(8(e^{−t/2} − 1)⁴) + (2t − 4(e^{−t/2} − 1)²)/(e^{−t/2} − 1)²`.
pub fn naive_quality_z(t: f64) -> Result<f64> {
    require_positive("t", t)?;
    let u = (-0.5 * t).exp_m1().powi(2);
    Ok(t * t / (8.0 * u * u) + (2.0 * t - 4.0 * u) / u)
}

/// `σσ̃`, failing if it drops below `‖[X, X̃]‖/2` (which is 1 for σx, σz).
pub fn heisenberg_check(report_x: &QualityReport, report_z: &QualityReport) -> Result<f64> {
    let product = report_x.sigma * report_z.sigma;
    let commutator: Mat2 = report_x.target.to_mat().commutator(&report_z.target.to_mat());
    let bound = 0.5 * commutator.spectral_norm();
    if product < bound - HEISENBERG_SLACK {
        return Err(Error::HeisenbergViolation { product, bound });
    }
    Ok(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{expectation, operator_norm, BlochVector};

    fn inf() -> TimeHorizon {
        TimeHorizon::infinite()
    }

    #[test]
    fn linear_second_moment() {
        let m = moment_matrix(&PointerFunction::Linear { beta: 1.0 }, 2, &inf()).unwrap();
        let expected = Hermitian2::diag(3.0, 1.0);
        assert!(m.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn constant_pointer_first_moment() {
        let one = PointerFunction::RationalZ { d1: 0.0, d2: 0.0, d3: 1.0, delta: 1.0 };
        let m = moment_matrix(&one, 1, &TimeHorizon::finite(2.0).unwrap()).unwrap();
        assert!(m.max_abs_diff(&Hermitian2::identity()) < 1e-12);
    }

    #[test]
    fn naive_second_moment_via_hierarchy() {
        let t = 2.513;
        let h = PointerFunction::NaiveLinear { t };
        let m = moment_matrix(&h, 2, &inf()).unwrap();
        let c = 2.0 - 2.0 * (-t / 2.0f64).exp();
        let expected = Hermitian2::diag(
            (8.0 * ((-t / 2.0f64).exp() - 1.0).powi(2) + t) / (c * c),
            t / (c * c),
        );
        assert!(m.max_abs_diff(&expected) < 1e-10, "{m:?}");
    }

    #[test]
    fn naive_reports_match_closed_forms() {
        let t = 2.513;
        let rx = quality(&PointerFunction::NaiveLinear { t }, &Hermitian2::sigma_x(), &inf()).unwrap();
        assert!((rx.sigma_sq - naive_quality_x(t).unwrap()).abs() < 1e-9);
        let rz = quality(&PointerFunction::NaiveQuadratic { t }, &Hermitian2::sigma_z(), &inf()).unwrap();
        assert!((rz.sigma_sq - naive_quality_z(t).unwrap()).abs() < 1e-8, "{rz:?}");
    }

    #[test]
    fn naive_examples() {
        let t = 2.513;
        let x = naive_quality_x(t).unwrap();
        let z = naive_quality_z(t).unwrap();
        assert!((x - 2.228).abs() < 1e-3);
        assert!((x.sqrt() - 1.493).abs() < 1e-3);
        assert!((z - 8.836).abs() < 1e-3);
        assert!((z.sqrt() - 2.973).abs() < 1e-3);
        assert!(((x * z).sqrt() - 4.437).abs() < 2e-3);
        let big = naive_quality_x(1e3).unwrap();
        assert!((big / (1e3 / 4.0 + 1.0) - 1.0).abs() < 0.01);
        assert!(naive_quality_x(0.0).is_err());
        assert!(naive_quality_z(-1.0).is_err());
    }

    #[test]
    fn limit_qualities() {
        let rx = quality(&PointerFunction::Linear { beta: 1.0 }, &Hermitian2::sigma_x(), &inf()).unwrap();
        assert!((rx.sigma_sq - 2.0).abs() < 1e-8);
        let rz = quality(&PointerFunction::Quadratic { beta: 1.0 }, &Hermitian2::sigma_z(), &inf()).unwrap();
        assert!((rz.sigma_sq - 6.0).abs() < 1e-8);
        let product = heisenberg_check(&rx, &rz).unwrap();
        assert!((product - 12f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn optimal_x_report() {
        let s = crate::pointers::solve_unbiased_x(0.605, 1.0).unwrap();
        let r = quality(&s.pointer, &Hermitian2::sigma_x(), &inf()).unwrap();
        assert!((r.d1 - 0.470).abs() < 2e-3 && (r.d2 - 0.470).abs() < 2e-3, "{r:?}");
        assert!((r.sigma - 0.685).abs() < 2e-3);
        let (d1, d2) = rational_x_d(0.605, 1.0).unwrap();
        assert!((d1 - r.d1).abs() < 1e-8 && (d2 - r.d2).abs() < 1e-8);
    }

    #[test]
    fn biased_pointer_rejected() {
        let h = PointerFunction::RationalX { c1: 2.0, eps: 0.605 };
        match quality(&h, &Hermitian2::sigma_x(), &inf()) {
            Err(Error::BiasedPointer { moment, .. }) => assert!(moment.contains("(1,2)") || moment.contains("diagonal")),
            other => panic!("expected bias error, got {other:?}"),
        }
        let h = PointerFunction::Linear { beta: 1.0 };
        assert!(matches!(
            quality(&h, &Hermitian2::sigma_z(), &inf()),
            Err(Error::BiasedPointer { .. })
        ));
    }

    #[test]
    fn closed_forms_match_quadrature_x() {
        for eps in crate::special::log_grid(0.1, 10.0, 12) {
            for &beta in &[1.0, 0.7] {
                let s = crate::pointers::solve_unbiased_x(eps, beta).unwrap();
                let r = quality(&s.pointer, &Hermitian2::sigma_x(), &TimeHorizon::from_beta(beta).unwrap()).unwrap();
                let (d1, d2) = rational_x_d(eps, beta).unwrap();
                assert!((d1 - r.d1).abs() < 1e-8, "d1 at {eps}, {beta}");
                assert!((d2 - r.d2).abs() < 1e-8, "d2 at {eps}, {beta}");
            }
        }
    }

    #[test]
    fn closed_forms_match_quadrature_z() {
        for delta in crate::special::log_grid(0.2, 10.0, 8) {
            for &beta in &[1.0, 0.8] {
                let s = crate::pointers::solve_unbiased_z(delta, beta).unwrap();
                let r = quality(&s.pointer, &Hermitian2::sigma_z(), &TimeHorizon::from_beta(beta).unwrap()).unwrap();
                let (d1, d2) = rational_z_d(delta, beta).unwrap();
                assert!((d1 - r.d1).abs() < 1e-7 * d1.abs().max(1.0), "d1 at {delta}, {beta}");
                assert!((d2 - r.d2).abs() < 1e-7 * d2.abs().max(1.0), "d2 at {delta}, {beta}");
            }
        }
    }

    #[test]
    fn added_variance_is_psd_and_dominates_states() {
        let s = crate::pointers::solve_unbiased_x(0.605, 1.0).unwrap();
        let v = added_variance(&s.pointer, &inf()).unwrap();
        assert!(v.min_eigenvalue() >= -1e-9);
        let sigma_sq = operator_norm(&v);
        let m2 = moment_matrix(&s.pointer, 2, &inf()).unwrap();
        for k in 0..500 {
            let th = k as f64 * 0.731;
            let ph = k as f64 * 1.913;
            let r = (k % 7) as f64 / 6.0;
            let rho = BlochVector::new(r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()).unwrap();
            let mean = expectation(&rho, &Hermitian2::sigma_x());
            let var_final = expectation(&rho, &m2) - mean * mean;
            let var_target = 1.0 - mean * mean;
            assert!(var_final - var_target <= sigma_sq + 1e-6);
        }
    }

    #[test]
    fn heisenberg_rejects_impossible_pair() {
        let mut rx = rational_x_report(0.605, 1.0).unwrap();
        let rz = rational_z_report(2.701, 1.0).unwrap();
        rx.sigma = 0.1;
        assert!(matches!(heisenberg_check(&rx, &rz), Err(Error::HeisenbergViolation { .. })));
    }
}
