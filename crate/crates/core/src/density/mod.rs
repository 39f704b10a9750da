//! Law of the normalized weighted-path endpoint
//! `Y_t = (1 − e^{−t})^{−1/2} ∫₀ᵗ e^{−τ/2} (dA_τ + dA_τ*)`.
//!
//! The matrix density is
//!
//! ```text
//! p(y) = φ(y) (I + β y (σ− + σ+) + β² (y² − 1) σ+σ−),   β = √(1 − e^{−t}),
//! ```
//!
//! with `φ` the standard normal density, and a state `ρ` sees the scalar
//! density `q(y) = ρ(p(y))`.

mod hierarchy;

pub use hierarchy::{monomial_moment, MomentHierarchy};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{BlochVector, Hermitian2, Mat2};
use crate::error::{require_nonnegative, Error, Result};
use crate::special::{gaussian_cdf, gaussian_pdf};

/// Measurement horizon `t` together with `β_t = √(1 − e^{−t})`.
///
/// The `t → ∞` limit is represented exactly with `t = ∞`, `β = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeHorizon {
    pub t: f64,
    pub beta: f64,
}

impl TimeHorizon {
    pub fn finite(t: f64) -> Result<Self> {
        require_nonnegative("t", t)?;
        if t.is_infinite() {
            return Ok(Self::infinite());
        }
        Ok(Self {
            t,
            beta: (-(-t).exp_m1()).sqrt(),
        })
    }

    pub const fn infinite() -> Self {
        Self {
            t: f64::INFINITY,
            beta: 1.0,
        }
    }

    /// Horizon with the given `β ∈ (0, 1]`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidArgument {
                name: "beta",
                value: beta,
                reason: "must lie in (0, 1]",
            });
        }
        if beta == 1.0 {
            return Ok(Self::infinite());
        }
        Ok(Self {
            t: -(-beta * beta).ln_1p(),
            beta,
        })
    }

    pub fn is_infinite(&self) -> bool {
        self.t.is_infinite()
    }

    /// `1 − e^{−t} = β²`.
    pub fn beta_sq(&self) -> f64 {
        self.beta * self.beta
    }
}

fn sigma_x_mat() -> Mat2 {
    Mat2::sigma_minus() + Mat2::sigma_plus()
}

/// `F_k(I)` for the un-normalized endpoint `∫ e^{−τ/2}(dA + dA*)`:
///
/// ```text
/// e^{−k²b/2} (I − i k b (σ− + σ+) − k² b² σ+σ−),   b = 1 − e^{−t}.
/// ```
pub fn characteristic_matrix(k: f64, horizon: &TimeHorizon) -> Mat2 {
    let b = horizon.beta_sq();
    let envelope = (-0.5 * k * k * b).exp();
    (Mat2::identity() - sigma_x_mat() * Complex64::new(0.0, k * b)
        - Mat2::excited_projector() * (k * k * b * b))
        * envelope
}

/// The three matrices `F_k(I)`, `F_k(σ− + σ+)`, `F_k(σ+σ−)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicSystem {
    pub identity: Mat2,
    pub sigma_x: Mat2,
    pub excited: Mat2,
}

impl CharacteristicSystem {
    fn initial() -> Self {
        Self {
            identity: Mat2::identity(),
            sigma_x: sigma_x_mat(),
            excited: Mat2::excited_projector(),
        }
    }

    fn axpy(&self, h: f64, d: &Self) -> Self {
        Self {
            identity: self.identity + d.identity * h,
            sigma_x: self.sigma_x + d.sigma_x * h,
            excited: self.excited + d.excited * h,
        }
    }

    fn derivative(&self, k: f64, t: f64) -> Self {
        let half = (-0.5 * t).exp();
        let damp = 0.5 * k * k * (-t).exp();
        let ik = Complex64::new(0.0, k);
        Self {
            identity: self.sigma_x * (-ik * half) - self.identity * damp,
            sigma_x: self.sigma_x * (-0.5) - self.excited * (ik * 2.0 * half) - self.sigma_x * damp,
            excited: self.excited * (-1.0) - self.excited * damp,
        }
    }
}

/// Fourth-order Runge–Kutta integration of the characteristic-function
/// system from its initial conditions at `t = 0`.
pub fn ode_oracle_fk(k: f64, t: f64, steps: usize) -> Result<CharacteristicSystem> {
    require_nonnegative("t", t)?;
    if steps < 100 {
        return Err(Error::InvalidArgument {
            name: "steps",
            value: steps as f64,
            reason: "at least 100 steps required",
        });
    }
    let h = t / steps as f64;
    let mut state = CharacteristicSystem::initial();
    for n in 0..steps {
        let s = n as f64 * h;
        let k1 = state.derivative(k, s);
        let k2 = state.axpy(0.5 * h, &k1).derivative(k, s + 0.5 * h);
        let k3 = state.axpy(0.5 * h, &k2).derivative(k, s + 0.5 * h);
        let k4 = state.axpy(h, &k3).derivative(k, s + h);
        state = state
            .axpy(h / 6.0, &k1)
            .axpy(h / 3.0, &k2)
            .axpy(h / 3.0, &k3)
            .axpy(h / 6.0, &k4);
    }
    Ok(state)
}

/// Matrix density `p(y)` of the normalized endpoint.
pub fn matrix_density_p(y: f64, horizon: &TimeHorizon) -> Hermitian2 {
    let b = horizon.beta;
    let g = gaussian_pdf(y);
    Hermitian2::new(
        g * (1.0 + b * b * (y * y - 1.0)),
        Complex64::new(g * b * y, 0.0),
        g,
    )
}

/// Scalar density `q(y) = ρ(p(y))`; independent of `Py`.
///
/// Not clamped: may return values of order `−1e−17` where `q` touches zero.
pub fn scalar_density_q(y: f64, horizon: &TimeHorizon, rho: &BlochVector) -> f64 {
    let b = horizon.beta;
    gaussian_pdf(y) * (1.0 + b * y * rho.px + b * b * (y * y - 1.0) * 0.5 * (rho.pz + 1.0))
}

/// Closed-form distribution function of `q`:
/// `Φ(y) − β Px φ(y) − β² (Pz + 1)/2 · y φ(y)`.
pub fn scalar_cdf_q(y: f64, horizon: &TimeHorizon, rho: &BlochVector) -> f64 {
    if y == f64::INFINITY {
        return 1.0;
    }
    if y == f64::NEG_INFINITY {
        return 0.0;
    }
    let b = horizon.beta;
    let g = gaussian_pdf(y);
    gaussian_cdf(y) - b * rho.px * g - b * b * 0.5 * (rho.pz + 1.0) * y * g
}

/// Inverts the characteristic function by trapezoidal Fourier integration
/// over `k ∈ [−k_max, k_max]`, returning the normalized density at `y`.
///
/// Validation route only; the closed form is [`matrix_density_p`].
pub fn fourier_density(y: f64, horizon: &TimeHorizon, k_max: f64, nodes: usize) -> Mat2 {
    let b = horizon.beta;
    let nodes = nodes.max(3);
    let dk = 2.0 * k_max / (nodes - 1) as f64;
    let mut acc = Mat2::zero();
    for n in 0..nodes {
        let k = -k_max + n as f64 * dk;
        let w = if n == 0 || n == nodes - 1 { 0.5 } else { 1.0 };
        // normalized endpoint: E[exp(−ikY)] = F_{k/β}(I)
        let phase = Complex64::new(0.0, k * y).exp();
        acc = acc + characteristic_matrix(k / b, horizon) * (phase * w);
    }
    acc * (dk / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{adaptive_quadrature, integrate, QuadratureOptions};

    fn integrate_matrix(f: impl Fn(f64) -> Hermitian2) -> Hermitian2 {
        let opts = QuadratureOptions::with_tol(1e-12);
        let part = |g: &dyn Fn(f64) -> f64| integrate(g, f64::NEG_INFINITY, f64::INFINITY, &opts).unwrap().value;
        Hermitian2::new(
            part(&|y| f(y).a),
            Complex64::new(part(&|y| f(y).b_re), part(&|y| f(y).b_im)),
            part(&|y| f(y).d),
        )
    }

    #[test]
    fn horizon_construction() {
        let h = TimeHorizon::finite(8.0).unwrap();
        assert!((h.beta_sq() - (1.0 - (-8.0f64).exp())).abs() < 1e-15);
        assert_eq!(TimeHorizon::finite(0.0).unwrap().beta, 0.0);
        assert!(TimeHorizon::finite(-1.0).is_err());
        let back = TimeHorizon::from_beta(h.beta).unwrap();
        assert!((back.t - 8.0).abs() < 1e-9);
        assert!(TimeHorizon::from_beta(1.0).unwrap().is_infinite());
        assert!(TimeHorizon::from_beta(0.0).is_err());
    }

    #[test]
    fn characteristic_examples() {
        let h = TimeHorizon::finite(2.0).unwrap();
        assert!(characteristic_matrix(0.0, &h).max_abs_diff(&Mat2::identity()) < 1e-15);
        let zero = TimeHorizon::finite(0.0).unwrap();
        assert!(characteristic_matrix(3.0, &zero).max_abs_diff(&Mat2::identity()) < 1e-15);
        let far = TimeHorizon::finite(30.0).unwrap();
        let limit = (Mat2::identity() - sigma_x_mat() * Complex64::new(0.0, 1.0) - Mat2::excited_projector())
            * (-0.5f64).exp();
        assert!(characteristic_matrix(1.0, &far).max_abs_diff(&limit) < 1e-10);
    }

    #[test]
    fn ode_oracle_examples() {
        let at_zero = ode_oracle_fk(0.0, 1.0, 1000).unwrap();
        assert!(at_zero.identity.max_abs_diff(&Mat2::identity()) < 1e-9);
        for &t in &[0.5, 1.0, 4.0] {
            let s = ode_oracle_fk(0.0, t, 1000).unwrap();
            assert!(s.excited.max_abs_diff(&(Mat2::excited_projector() * (-t).exp())) < 1e-12);
        }
        let s = ode_oracle_fk(1.3, 2.0, 10_000).unwrap();
        let exact = characteristic_matrix(1.3, &TimeHorizon::finite(2.0).unwrap());
        assert!(s.identity.max_abs_diff(&exact) < 1e-7);
        assert!(ode_oracle_fk(1.0, 1.0, 10).is_err());
    }

    #[test]
    fn matrix_density_moments() {
        for h in [TimeHorizon::finite(0.7).unwrap(), TimeHorizon::infinite()] {
            let norm = integrate_matrix(|y| matrix_density_p(y, &h));
            assert!(norm.max_abs_diff(&Hermitian2::identity()) < 1e-9);
            let first = integrate_matrix(|y| matrix_density_p(y, &h).scale(y));
            assert!(first.max_abs_diff(&Hermitian2::sigma_x().scale(h.beta)) < 1e-9);
            let p0 = matrix_density_p(0.0, &h);
            assert!((p0.a - (1.0 - h.beta_sq()) / crate::special::SQRT_2PI).abs() < 1e-15);
            assert!(p0.a >= 0.0);
        }
    }

    #[test]
    fn first_moment_matches_semigroup_after_denormalization() {
        // β·σx·β = (1 − e^{−t})σx, which is ∫₀ᵗ e^{−τ/2}·e^{−τ/2}σx dτ
        let t = 1.7;
        let h = TimeHorizon::finite(t).unwrap();
        let first = integrate_matrix(|y| matrix_density_p(y, &h).scale(y * h.beta));
        let semigroup = adaptive_quadrature(|s| (-0.5 * s).exp() * (-0.5 * s).exp(), 0.0, t, 1e-13).unwrap();
        assert!((first.b_re - semigroup.value).abs() < 1e-9);
    }

    #[test]
    fn scalar_density_examples() {
        let h = TimeHorizon::finite(3.0).unwrap();
        for k in -40..=40 {
            let y = k as f64 * 0.2;
            assert!((scalar_density_q(y, &h, &BlochVector::GROUND) - gaussian_pdf(y)).abs() < 1e-18);
        }
        let rho = BlochVector::new(0.4, 0.2, -0.6).unwrap();
        let opts = QuadratureOptions::with_tol(1e-12);
        let m = |g: &dyn Fn(f64) -> f64| integrate(g, f64::NEG_INFINITY, f64::INFINITY, &opts).unwrap().value;
        assert!((m(&|y| scalar_density_q(y, &h, &rho)) - 1.0).abs() < 1e-10);
        assert!((m(&|y| y * scalar_density_q(y, &h, &rho)) - h.beta * rho.px).abs() < 1e-10);
        let second = m(&|y| (y * y - 1.0) * scalar_density_q(y, &h, &rho));
        assert!((second - h.beta_sq() * (rho.pz + 1.0)).abs() < 1e-10);
    }

    #[test]
    fn cdf_is_antiderivative() {
        let h = TimeHorizon::finite(1.2).unwrap();
        let rho = BlochVector::new(-0.5, 0.1, 0.7).unwrap();
        for &y in &[-3.0, -0.4, 0.0, 1.1, 2.5] {
            let q = adaptive_quadrature(|s| scalar_density_q(s, &h, &rho), f64::NEG_INFINITY, y, 1e-13).unwrap();
            assert!((q.value - scalar_cdf_q(y, &h, &rho)).abs() < 1e-12);
        }
        assert_eq!(scalar_cdf_q(f64::INFINITY, &h, &rho), 1.0);
    }

    #[test]
    fn fourier_inversion_recovers_density() {
        for h in [TimeHorizon::finite(0.9).unwrap(), TimeHorizon::infinite()] {
            for n in 0..20 {
                let y = -4.0 + 8.0 * n as f64 / 19.0;
                let numeric = fourier_density(y, &h, 40.0, 8001);
                let exact = matrix_density_p(y, &h).to_mat();
                assert!(numeric.max_abs_diff(&exact) < 1e-5, "y = {y}");
            }
        }
    }
}
