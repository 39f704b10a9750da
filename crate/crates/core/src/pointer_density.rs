//! Densities of the optimal pointer values `h*(Y_t)` and `h̃(Y_t)`
//! (Frobenius–Perron push-forward of `q`).
//!
//! ```text
//! r(x) = Σ± q(y±) / |h*'(y±)|,   support [−C1/(2√ε), C1/(2√ε)]
//! s(x) = Σ± q(y±) / |h̃'(y±)|,   support [D3 + D2/δ, D3]
//! ```
//!
//! `r` has an inverse-square-root singularity at both ends of its support,
//! `s` only at the lower end. Integrals use `x = mid − R cos θ` for `r` and
//! `x = lo + L u²` for `s`, which turn both into smooth integrands:
//!
//! ```text
//! r(x) dx = Σ± q(y±)(y±² + ε) / (2√ε) dθ
//! s(x) dx = √δ (q(y) + q(−y)) / (1 − u²)^{3/2} du,   y = u √(δ/(1 − u²))
//! ```

use serde::{Deserialize, Serialize};

use crate::algebra::BlochVector;
use crate::density::{scalar_density_q, TimeHorizon};
use crate::error::{require_positive, Error, Result};
use crate::optimizer::{optimize_pointer_x, optimize_pointer_z};
use crate::pointers::{rational_x_coefficient, rational_z_coefficients, PointerFunction};
use crate::special::{integrate, QuadratureOptions};

/// Default number of grid nodes for figure data.
pub const FIGURE_NODES: usize = 513;
/// Smallest grid accepted by [`figure_grid`].
pub const MIN_NODES: usize = 64;
/// Support of the endpoint-density figures.
pub const ENDPOINT_RANGE: (f64, f64) = (-6.0, 6.0);
/// Optimizer tolerance used to fix the figure pointers.
const FIGURE_TOL: f64 = 1e-10;

fn density_q(y: f64, horizon: &TimeHorizon, rho: &BlochVector) -> f64 {
    if !y.is_finite() {
        return 0.0;
    }
    // clamp round-off negatives; q ≥ 0 analytically
    scalar_density_q(y, horizon, rho).max(0.0)
}

/// How a density behaves at one end of its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndBehaviour {
    Regular,
    InverseSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Endpoint,
    PointerX,
    PointerZ,
}

impl GridKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Endpoint => "endpoint",
            Self::PointerX => "pointer_x",
            Self::PointerZ => "pointer_z",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "endpoint" => Some(Self::Endpoint),
            "pointer_x" => Some(Self::PointerX),
            "pointer_z" => Some(Self::PointerZ),
            _ => None,
        }
    }
}

/// Push-forward of `q` through one of the two optimal pointer families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PushForward {
    X {
        c1: f64,
        eps: f64,
        horizon: TimeHorizon,
        rho: BlochVector,
    },
    Z {
        d2: f64,
        d3: f64,
        delta: f64,
        horizon: TimeHorizon,
        rho: BlochVector,
    },
}

impl PushForward {
    pub fn x(c1: f64, eps: f64, horizon: TimeHorizon, rho: BlochVector) -> Result<Self> {
        require_positive("c1", c1)?;
        require_positive("eps", eps)?;
        Ok(Self::X { c1, eps, horizon, rho })
    }

    pub fn z(d2: f64, d3: f64, delta: f64, horizon: TimeHorizon, rho: BlochVector) -> Result<Self> {
        require_positive("delta", delta)?;
        if !(d2 < 0.0) {
            return Err(Error::InvalidArgument {
                name: "d2",
                value: d2,
                reason: "the unbiased sigma_z family has D2 < 0",
            });
        }
        Ok(Self::Z {
            d2,
            d3,
            delta,
            horizon,
            rho,
        })
    }

    /// Push-forward through a solved rational pointer.
    pub fn from_pointer(pointer: &PointerFunction, horizon: TimeHorizon, rho: BlochVector) -> Result<Self> {
        match *pointer {
            PointerFunction::RationalX { c1, eps } => Self::x(c1, eps, horizon, rho),
            PointerFunction::RationalZ { d1, d2, d3, delta } if d1 == 0.0 => Self::z(d2, d3, delta, horizon, rho),
            _ => Err(Error::InvalidArgument {
                name: "pointer",
                value: f64::NAN,
                reason: "push-forward densities exist for rational_x and rational_z (D1 = 0) only",
            }),
        }
    }

    pub fn pointer(&self) -> PointerFunction {
        match *self {
            Self::X { c1, eps, .. } => PointerFunction::RationalX { c1, eps },
            Self::Z { d2, d3, delta, .. } => PointerFunction::RationalZ { d1: 0.0, d2, d3, delta },
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::X { c1, eps, .. } => {
                let half = c1 / (2.0 * eps.sqrt());
                (-half, half)
            }
            Self::Z { d2, d3, delta, .. } => (d3 + d2 / delta, d3),
        }
    }

    pub fn ends(&self) -> [EndBehaviour; 2] {
        match self {
            Self::X { .. } => [EndBehaviour::InverseSqrt; 2],
            Self::Z { .. } => [EndBehaviour::InverseSqrt, EndBehaviour::Regular],
        }
    }

    /// Density at `x`; `+∞` at a singular end, `0` outside the support.
    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        self.density_from_gaps(x, x - lo, hi - x)
    }

    // `gap_lo = x − lo`, `gap_hi = hi − x`, supplied separately so that
    // callers near an end can pass them without cancellation.
    fn density_from_gaps(&self, x: f64, gap_lo: f64, gap_hi: f64) -> f64 {
        match *self {
            Self::X {
                c1,
                eps,
                ref horizon,
                ref rho,
            } => {
                // disc = C1² − 4x²ε = 4ε (half − x)(half + x)
                let disc = 4.0 * eps * gap_lo * gap_hi;
                if disc <= 0.0 {
                    return f64::INFINITY;
                }
                let root = disc.sqrt();
                let near = 2.0 * x * eps / (c1 + root);
                let mut sum = (near * near + eps) * density_q(near, horizon, rho);
                if x != 0.0 {
                    let far = (c1 + root) / (2.0 * x);
                    sum += (far * far + eps) * density_q(far, horizon, rho);
                }
                sum / root
            }
            Self::Z {
                d2,
                delta,
                ref horizon,
                ref rho,
                ..
            } => {
                if gap_lo <= 0.0 {
                    return f64::INFINITY;
                }
                if gap_hi <= 0.0 {
                    return 0.0;
                }
                let y = (delta * gap_lo / gap_hi).sqrt();
                let pair = density_q(y, horizon, rho) + density_q(-y, horizon, rho);
                -d2 / (2.0 * gap_hi * gap_hi * y) * pair
            }
        }
    }

    /// Smooth integrand in the substituted variable `s ∈ [0, s_max]`, with
    /// the corresponding pointer value.
    fn substituted(&self, s: f64) -> (f64, f64) {
        let (lo, hi) = self.support();
        match *self {
            Self::X { eps, .. } => {
                let radius = 0.5 * (hi - lo);
                let gap_lo = 2.0 * radius * (0.5 * s).sin().powi(2);
                let gap_hi = 2.0 * radius * (0.5 * s).cos().powi(2);
                let x = if gap_lo < gap_hi { lo + gap_lo } else { hi - gap_hi };
                let disc = 4.0 * eps * gap_lo * gap_hi;
                if disc <= 0.0 {
                    // limit θ → 0, π: both preimages at ±√ε
                    let y = x.signum() * eps.sqrt();
                    return (x, 2.0 * eps * self.q(y) / eps.sqrt());
                }
                let jac = radius * s.sin();
                (x, self.density_from_gaps(x, gap_lo, gap_hi) * jac)
            }
            Self::Z { delta, .. } => {
                let length = hi - lo;
                let u2 = s * s;
                let x = lo + length * u2;
                if u2 >= 1.0 {
                    return (hi, 0.0);
                }
                let y = s * (delta / (1.0 - u2)).sqrt();
                let pair = self.q(y) + self.q(-y);
                (x, delta.sqrt() * pair / (1.0 - u2).powf(1.5))
            }
        }
    }

    fn q(&self, y: f64) -> f64 {
        match self {
            Self::X { horizon, rho, .. } | Self::Z { horizon, rho, .. } => density_q(y, horizon, rho),
        }
    }

    fn to_substituted(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        let x = x.clamp(lo, hi);
        match self {
            Self::X { .. } => {
                let radius = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                ((mid - x) / radius).clamp(-1.0, 1.0).acos()
            }
            Self::Z { .. } => ((x - lo) / (hi - lo)).sqrt(),
        }
    }

    /// `∫ g(x) density(x) dx` over `[a, b] ∩ support`, by quadrature in the
    /// substituted variable.
    pub fn integrate_between(&self, g: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
        let (sa, sb) = (self.to_substituted(a), self.to_substituted(b));
        if sa >= sb {
            return Ok(0.0);
        }
        let opts = QuadratureOptions {
            abs_tol: tol,
            rel_tol: tol,
            max_subdivisions: 4000,
        };
        let f = |s: f64| {
            let (x, w) = self.substituted(s);
            if w == 0.0 {
                0.0
            } else {
                g(x) * w
            }
        };
        // split where the far preimage takes over (x = 0) for r
        let split = match self {
            Self::X { .. } => 0.5 * std::f64::consts::PI,
            Self::Z { .. } => f64::NAN,
        };
        if split > sa && split < sb {
            Ok(integrate(&f, sa, split, &opts)?.value + integrate(&f, split, sb, &opts)?.value)
        } else {
            Ok(integrate(&f, sa, sb, &opts)?.value)
        }
    }

    /// `∫ g(x) density(x) dx` over the whole support.
    pub fn expectation(&self, g: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        self.integrate_between(g, lo, hi, tol)
    }

    /// Probability of `x ∈ [a, b]`.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        self.integrate_between(|_| 1.0, a, b, 1e-12)
    }

    /// `∫ g(h(y)) q(y) dy`, the other side of the change of variables.
    pub fn expectation_in_y(&self, g: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let h = self.pointer();
        let opts = QuadratureOptions {
            abs_tol: tol,
            rel_tol: tol,
            max_subdivisions: 4000,
        };
        let f = |y: f64| g(h.evaluate(y)) * self.q(y);
        let knot = match *self {
            Self::X { eps, .. } => eps.sqrt(),
            Self::Z { delta, .. } => delta.sqrt(),
        };
        let mut total = 0.0;
        for (a, b) in [
            (f64::NEG_INFINITY, -knot),
            (-knot, 0.0),
            (0.0, knot),
            (knot, f64::INFINITY),
        ] {
            total += integrate(f, a, b, &opts)?.value;
        }
        Ok(total)
    }
}

/// `r(x)` for the σx pointer with parameters `(C1, ε)`.
pub fn density_r(x: f64, c1: f64, eps: f64, horizon: &TimeHorizon, rho: &BlochVector) -> Result<f64> {
    Ok(PushForward::x(c1, eps, *horizon, *rho)?.density(x))
}

/// `s(x)` for the σz pointer with parameters `(D2, D3, δ)`.
pub fn density_s(x: f64, d2: f64, d3: f64, delta: f64, horizon: &TimeHorizon, rho: &BlochVector) -> Result<f64> {
    Ok(PushForward::z(d2, d3, delta, *horizon, *rho)?.density(x))
}

/// Density sampled on an evenly spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub kind: GridKind,
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
    pub support: (f64, f64),
    pub ends: [EndBehaviour; 2],
    pub pointer: Option<PointerFunction>,
}

impl DensityGrid {
    /// Nodes at half-cell offsets `lo + (i + ½)(hi − lo)/n`, so no node sits
    /// on a singular end.
    pub fn half_cell_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let step = (hi - lo) / n as f64;
        (0..n).map(|i| lo + (i as f64 + 0.5) * step).collect()
    }

    /// Plain trapezoid over the nodes.
    pub fn trapezoid(&self) -> f64 {
        self.axis
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Total mass over the support from the grid values alone.
    ///
    /// The values are multiplied by the Jacobian of the end-regularizing
    /// substitution (θ for two singular ends, `u²` for one), which leaves a
    /// bounded function; that is integrated by the trapezoid rule in the new
    /// variable, with linear extrapolation out to the ends.
    pub fn mass(&self) -> f64 {
        let (lo, hi) = self.support;
        let length = hi - lo;
        let (s, g): (Vec<f64>, Vec<f64>) = match self.ends {
            [EndBehaviour::InverseSqrt, EndBehaviour::InverseSqrt] => {
                let radius = 0.5 * length;
                let mid = 0.5 * (lo + hi);
                self.axis
                    .iter()
                    .zip(&self.values)
                    .map(|(&x, &v)| {
                        let theta = ((mid - x) / radius).clamp(-1.0, 1.0).acos();
                        (theta, v * ((x - lo) * (hi - x)).sqrt())
                    })
                    .unzip()
            }
            [EndBehaviour::InverseSqrt, EndBehaviour::Regular] => self
                .axis
                .iter()
                .zip(&self.values)
                .map(|(&x, &v)| {
                    let u = ((x - lo) / length).sqrt();
                    (u, v * 2.0 * length * u)
                })
                .unzip(),
            [EndBehaviour::Regular, EndBehaviour::InverseSqrt] => self
                .axis
                .iter()
                .zip(&self.values)
                .map(|(&x, &v)| {
                    let u = ((hi - x) / length).sqrt();
                    (1.0 - u, v * 2.0 * length * u)
                })
                .unzip(),
            [EndBehaviour::Regular, EndBehaviour::Regular] => {
                self.axis.iter().map(|&x| x - lo).zip(self.values.iter().copied()).unzip()
            }
        };
        let s_max = match self.ends {
            [EndBehaviour::InverseSqrt, EndBehaviour::InverseSqrt] => std::f64::consts::PI,
            [EndBehaviour::Regular, EndBehaviour::Regular] => length,
            _ => 1.0,
        };
        trapezoid_with_ends(&s, &g, 0.0, s_max)
    }
}

fn trapezoid_with_ends(s: &[f64], g: &[f64], s_lo: f64, s_hi: f64) -> f64 {
    let n = s.len();
    if n < 2 {
        return 0.0;
    }
    let extrapolate = |i: usize, j: usize, at: f64| g[i] + (g[j] - g[i]) * (at - s[i]) / (s[j] - s[i]);
    let mut nodes = Vec::with_capacity(n + 2);
    nodes.push((s_lo, extrapolate(0, 1, s_lo).max(0.0)));
    nodes.extend(s.iter().copied().zip(g.iter().copied()));
    nodes.push((s_hi, extrapolate(n - 2, n - 1, s_hi).max(0.0)));
    nodes
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Grid of the push-forward density on the support of `pointer`.
pub fn pointer_grid(pointer: &PointerFunction, rho: &BlochVector, horizon: &TimeHorizon, n: usize) -> Result<DensityGrid> {
    check_nodes(n)?;
    let push = PushForward::from_pointer(pointer, *horizon, *rho)?;
    let support = push.support();
    let axis = DensityGrid::half_cell_axis(support.0, support.1, n);
    let values = axis.iter().map(|&x| push.density(x)).collect();
    let kind = match pointer {
        PointerFunction::RationalX { .. } => GridKind::PointerX,
        _ => GridKind::PointerZ,
    };
    Ok(DensityGrid {
        kind,
        axis,
        values,
        support,
        ends: push.ends(),
        pointer: Some(*pointer),
    })
}

fn check_nodes(n: usize) -> Result<()> {
    if n < MIN_NODES {
        return Err(Error::InvalidArgument {
            name: "n",
            value: n as f64,
            reason: "figure grids need at least 64 nodes",
        });
    }
    Ok(())
}

/// The optimal σx pointer at `horizon`.
pub fn optimal_pointer_x(horizon: &TimeHorizon) -> Result<PointerFunction> {
    let eps = optimize_pointer_x(horizon.beta, FIGURE_TOL)?.argmin;
    Ok(PointerFunction::RationalX {
        c1: rational_x_coefficient(eps, horizon.beta)?,
        eps,
    })
}

/// The optimal σz pointer at `horizon`.
pub fn optimal_pointer_z(horizon: &TimeHorizon) -> Result<PointerFunction> {
    let delta = optimize_pointer_z(horizon.beta, FIGURE_TOL)?.argmin;
    let (d2, d3) = rational_z_coefficients(delta, horizon.beta)?;
    Ok(PointerFunction::RationalZ { d1: 0.0, d2, d3, delta })
}

/// Figure data: the endpoint density on `[−6, 6]` or the density of the
/// optimal σx / σz pointer on its support.
pub fn figure_grid(which: GridKind, rho: &BlochVector, horizon: &TimeHorizon, n: usize) -> Result<DensityGrid> {
    check_nodes(n)?;
    match which {
        GridKind::Endpoint => {
            let (lo, hi) = ENDPOINT_RANGE;
            let axis = DensityGrid::half_cell_axis(lo, hi, n);
            let values = axis.iter().map(|&y| density_q(y, horizon, rho)).collect();
            Ok(DensityGrid {
                kind: which,
                axis,
                values,
                support: (lo, hi),
                ends: [EndBehaviour::Regular; 2],
                pointer: None,
            })
        }
        GridKind::PointerX => pointer_grid(&optimal_pointer_x(horizon)?, rho, horizon, n),
        GridKind::PointerZ => pointer_grid(&optimal_pointer_z(horizon)?, rho, horizon, n),
    }
}
