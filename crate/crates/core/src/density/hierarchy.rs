//! Moments of weighted homodyne integrals through the `F_h` maps.
//!
//! For the pointer `h(W)` with `W = ∫₀ᵗ f(τ)(dA_τ + dA_τ*)` the map
//! `F_h(X) = M(X ⊗ h(W))` obeys
//!
//! ```text
//! dF_h(X)/dt = F_h(L(X)) + f(t) F_{h'}(σ+X + Xσ−) + ½ f(t)² F_{h''}(X).
//! ```
//!
//! For monomials `h(x) = xⁿ` this closes into a triangular linear system over
//! `n = 0..=N`, integrated here with classical RK4. Each map is stored as
//! its images of the four matrix units.

use crate::algebra::{lindblad_apply_mat, Mat2};
use crate::error::{require_nonnegative, Result};

type LinearMap = [Mat2; 4];

fn unit(idx: usize) -> Mat2 {
    let mut m = Mat2::zero();
    m.entries[idx / 2][idx % 2] = num_complex::Complex64::new(1.0, 0.0);
    m
}

fn apply(map: &LinearMap, x: &Mat2) -> Mat2 {
    let mut out = Mat2::zero();
    for (idx, image) in map.iter().enumerate() {
        let c = x.entries[idx / 2][idx % 2];
        if c != num_complex::Complex64::new(0.0, 0.0) {
            out = out + *image * c;
        }
    }
    out
}

/// The maps `X ↦ F_{xⁿ}(X)` for `n = 0..=max_power` at time `t`.
#[derive(Debug, Clone)]
pub struct MomentHierarchy {
    maps: Vec<LinearMap>,
    pub t: f64,
}

impl MomentHierarchy {
    /// Integrates the hierarchy from `0` to `t` for the weight `f`.
    pub fn integrate(max_power: usize, t: f64, steps: usize, weight: impl Fn(f64) -> f64) -> Result<Self> {
        require_nonnegative("t", t)?;
        let steps = steps.max(1);
        let h = t / steps as f64;
        let units: Vec<Mat2> = (0..4).map(unit).collect();
        let generator: Vec<Mat2> = units.iter().map(lindblad_apply_mat).collect();
        let sp = Mat2::sigma_plus();
        let sm = Mat2::sigma_minus();
        let raised: Vec<Mat2> = units.iter().map(|e| sp * *e + *e * sm).collect();

        let rhs = |state: &[LinearMap], s: f64| -> Vec<LinearMap> {
            let f = weight(s);
            (0..state.len())
                .map(|n| {
                    let mut d = [Mat2::zero(); 4];
                    for (idx, slot) in d.iter_mut().enumerate() {
                        let mut v = apply(&state[n], &generator[idx]);
                        if n >= 1 {
                            v = v + apply(&state[n - 1], &raised[idx]) * (n as f64 * f);
                        }
                        if n >= 2 {
                            v = v + apply(&state[n - 2], &units[idx]) * (0.5 * (n * (n - 1)) as f64 * f * f);
                        }
                        *slot = v;
                    }
                    d
                })
                .collect()
        };
        let axpy = |x: &[LinearMap], a: f64, d: &[LinearMap]| -> Vec<LinearMap> {
            x.iter()
                .zip(d)
                .map(|(m, dm)| std::array::from_fn(|i| m[i] + dm[i] * a))
                .collect()
        };

        // F_{x⁰} starts at the identity map; higher powers start at zero.
        let mut state: Vec<LinearMap> = (0..=max_power)
            .map(|n| {
                if n == 0 {
                    std::array::from_fn(unit)
                } else {
                    [Mat2::zero(); 4]
                }
            })
            .collect();
        for step in 0..steps {
            let s = step as f64 * h;
            let k1 = rhs(&state, s);
            let k2 = rhs(&axpy(&state, 0.5 * h, &k1), s + 0.5 * h);
            let k3 = rhs(&axpy(&state, 0.5 * h, &k2), s + 0.5 * h);
            let k4 = rhs(&axpy(&state, h, &k3), s + h);
            state = axpy(&state, h / 6.0, &k1);
            state = axpy(&state, h / 3.0, &k2);
            state = axpy(&state, h / 3.0, &k3);
            state = axpy(&state, h / 6.0, &k4);
        }
        Ok(Self { maps: state, t })
    }

    pub fn max_power(&self) -> usize {
        self.maps.len() - 1
    }

    /// `F_{xⁿ}(X)`.
    pub fn apply(&self, power: usize, x: &Mat2) -> Mat2 {
        apply(&self.maps[power], x)
    }

    /// `M(p(W)) = Σ cₙ F_{xⁿ}(I)` for the polynomial with coefficients `coeffs`
    /// in ascending order.
    pub fn polynomial_moment(&self, coeffs: &[f64]) -> Mat2 {
        coeffs
            .iter()
            .enumerate()
            .fold(Mat2::zero(), |acc, (n, &c)| acc + self.apply(n, &Mat2::identity()) * c)
    }
}

/// `M(Wⁿ)` for the unweighted integral `W = A_t + A_t*` (weight `f ≡ 1`).
pub fn monomial_moment(power: usize, t: f64, steps: usize) -> Result<Mat2> {
    let h = MomentHierarchy::integrate(power, t, steps, |_| 1.0)?;
    Ok(h.apply(power, &Mat2::identity()))
}
