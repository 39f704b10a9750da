//! Minimax search over the one-parameter pointer families.
//!
//! The objective `max{d1, d2}` is continuous but has a crease where the two
//! branches cross, so the search is derivative-free: a log-grid pre-scan
//! brackets the minimum and golden-section search refines it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Hermitian2;
use crate::density::TimeHorizon;
use crate::error::{require_positive, Error, Result};
use crate::pointers::PointerFunction;
use crate::quality::{naive_quality_x, naive_quality_z, quality, rational_x_d, rational_z_d};
use crate::special::log_grid;

/// Search interval for `ε` and `δ`.
pub const PARAMETER_RANGE: (f64, f64) = (1e-4, 50.0);
/// Search interval for the naive measurement time.
pub const TIME_RANGE: (f64, f64) = (1e-3, 50.0);
pub const PRESCAN_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub argmin: f64,
    pub objective: f64,
    pub d1: f64,
    pub d2: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    X,
    Z,
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]` down to an
/// interval of width `tol`. Returns `(argmin, f(argmin), iterations)`.
pub fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while b - a > tol && iterations < 500 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let x = 0.5 * (a + b);
    (x, f(x), iterations)
}

/// Evaluates `f` on `grid` (in parallel, order preserved) and returns the
/// neighbours of the smallest interior value. Failed evaluations count as
/// `+∞`.
pub fn grid_bracket(f: impl Fn(f64) -> f64 + Sync, grid: &[f64]) -> Result<(f64, f64)> {
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&x| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    if best == 0 || best + 1 >= grid.len() || !values[best].is_finite() {
        return Err(Error::NoBracket {
            lo: grid[0],
            hi: grid[grid.len() - 1],
            trace: grid.iter().copied().zip(values).collect(),
        });
    }
    Ok((grid[best - 1], grid[best + 1]))
}

fn minimize(objective: impl Fn(f64) -> f64 + Sync, range: (f64, f64), tol: f64) -> Result<(f64, usize, (f64, f64))> {
    require_positive("tol", tol)?;
    let grid = log_grid(range.0, range.1, PRESCAN_POINTS);
    let bracket = grid_bracket(&objective, &grid)?;
    let (x, _, iterations) = golden_section(&objective, bracket.0, bracket.1, tol);
    Ok((x, iterations, bracket))
}

fn check_beta(beta: f64) -> Result<()> {
    TimeHorizon::from_beta(beta).map(|_| ())
}

fn max_or_inf(d: Result<(f64, f64)>) -> f64 {
    d.map(|(a, b)| a.max(b)).unwrap_or(f64::INFINITY)
}

/// Minimizes `ε ↦ max{d1(ε), d2(ε)}` for the σx family at `β`.
pub fn optimize_pointer_x(beta: f64, tol: f64) -> Result<OptimizationResult> {
    check_beta(beta)?;
    let (argmin, iterations, bracket) = minimize(|e| max_or_inf(rational_x_d(e, beta)), PARAMETER_RANGE, tol)?;
    let (d1, d2) = rational_x_d(argmin, beta)?;
    Ok(OptimizationResult {
        argmin,
        objective: d1.max(d2),
        d1,
        d2,
        iterations,
        bracket,
    })
}

/// Minimizes `δ ↦ max{d1(δ), d2(δ)}` for the σz family at `β`.
pub fn optimize_pointer_z(beta: f64, tol: f64) -> Result<OptimizationResult> {
    check_beta(beta)?;
    let (argmin, iterations, bracket) = minimize(|d| max_or_inf(rational_z_d(d, beta)), PARAMETER_RANGE, tol)?;
    let (d1, d2) = rational_z_d(argmin, beta)?;
    Ok(OptimizationResult {
        argmin,
        objective: d1.max(d2),
        d1,
        d2,
        iterations,
        bracket,
    })
}

/// Minimizes the naive quality over the measurement time `t`. The argmin
/// comes from the closed form; `d1`, `d2` are then read off the moment
/// matrices of the naive pointer at that time.
pub fn optimize_naive_time(which: Observable) -> Result<OptimizationResult> {
    let closed = |t: f64| match which {
        Observable::X => naive_quality_x(t),
        Observable::Z => naive_quality_z(t),
    };
    let (argmin, iterations, bracket) = minimize(|t| closed(t).unwrap_or(f64::INFINITY), TIME_RANGE, 1e-10)?;
    let (pointer, target) = match which {
        Observable::X => (PointerFunction::NaiveLinear { t: argmin }, Hermitian2::sigma_x()),
        Observable::Z => (PointerFunction::NaiveQuadratic { t: argmin }, Hermitian2::sigma_z()),
    };
    let report = quality(&pointer, &target, &TimeHorizon::finite(argmin)?)?;
    Ok(OptimizationResult {
        argmin,
        objective: report.sigma_sq,
        d1: report.d1,
        d2: report.d2,
        iterations,
        bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_quadratic() {
        let (x, fx, it) = golden_section(|x| (x - 1.3).powi(2) + 2.0, 0.0, 5.0, 1e-10);
        // flat minimum: the argument is only resolvable to ~√ε_mach
        assert!((x - 1.3).abs() < 1e-7 && (fx - 2.0).abs() < 1e-14 && it > 10);
    }

    #[test]
    fn x_optimum() {
        let r = optimize_pointer_x(1.0, 1e-8).unwrap();
        assert!((r.argmin - 0.605).abs() < 5e-3, "{r:?}");
        assert!((r.objective - 0.470).abs() < 2e-3);
        assert!((r.objective.sqrt() - 0.685).abs() < 2e-3);
        assert!((r.d1 - r.d2).abs() < 1e-4);
        assert!(r.bracket.0 < r.argmin && r.argmin < r.bracket.1);
        assert!((r.d1.max(r.d2) - r.objective).abs() <= 1e-10);
        for shift in [-0.05, 0.05] {
            let (a, b) = rational_x_d(r.argmin + shift, 1.0).unwrap();
            assert!(a.max(b) > r.objective);
        }
    }

    #[test]
    fn x_uniqueness_probe() {
        let r = optimize_pointer_x(1.0, 1e-8).unwrap();
        let grid = log_grid(1e-4, 50.0, 1000);
        for e in grid {
            if (e - r.argmin).abs() > 1e-3 {
                let (a, b) = rational_x_d(e, 1.0).unwrap();
                assert!(a.max(b) > r.objective, "runner-up at {e}");
            }
        }
    }

    #[test]
    fn objective_continuity_near_optimum() {
        let mut prev: Option<f64> = None;
        for k in 0..200 {
            let e = 0.505 + k as f64 * 1e-3;
            let v = max_or_inf(rational_x_d(e, 1.0));
            if let Some(p) = prev {
                assert!((v - p).abs() < 0.01);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn z_optimum_and_product() {
        let rz = optimize_pointer_z(1.0, 1e-8).unwrap();
        assert!((rz.argmin - 2.701).abs() < 0.01, "{rz:?}");
        assert!((rz.objective - 2.373).abs() < 0.01);
        assert!((rz.objective.sqrt() - 1.540).abs() < 5e-3);
        let rx = optimize_pointer_x(1.0, 1e-8).unwrap();
        let product = (rx.objective * rz.objective).sqrt();
        assert!((product - 1.056).abs() < 5e-3);
    }

    #[test]
    fn finite_beta_worsens_quality() {
        let full = optimize_pointer_x(1.0, 1e-8).unwrap();
        let part = optimize_pointer_x(0.9, 1e-8).unwrap();
        assert!(part.objective > full.objective);
    }

    #[test]
    fn deterministic() {
        let a = optimize_pointer_z(0.95, 1e-8).unwrap();
        let b = optimize_pointer_z(0.95, 1e-8).unwrap();
        assert_eq!(a.argmin.to_bits(), b.argmin.to_bits());
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn naive_times() {
        let x = optimize_naive_time(Observable::X).unwrap();
        let z = optimize_naive_time(Observable::Z).unwrap();
        assert!((x.argmin - 2.513).abs() < 1e-3 && (z.argmin - 2.513).abs() < 1e-3);
        assert!((x.objective - 2.228).abs() < 1e-3);
        assert!((z.objective - 8.836).abs() < 1e-3);
        assert!((x.argmin - z.argmin).abs() < 1e-3);
        assert!((x.objective - naive_quality_x(x.argmin).unwrap()).abs() < 1e-9);
        assert!((z.objective - naive_quality_z(z.argmin).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn invalid_inputs() {
        assert!(optimize_pointer_x(0.0, 1e-8).is_err());
        assert!(optimize_pointer_z(1.0, 0.0).is_err());
        let err = grid_bracket(|x| x, &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::NoBracket { ref trace, .. } if trace.len() == 3));
    }
}
