//! Oracle suites: every closed form against an independent computation.
//!
//! `fast` runs reduced sweeps of the deterministic checks; `full` runs the
//! complete sweeps plus the Monte Carlo comparisons.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{BlochVector, Hermitian2};
use crate::density::{
    characteristic_matrix, matrix_density_p, ode_oracle_fk, scalar_cdf_q, scalar_density_q, TimeHorizon,
};
use crate::error::Result;
use crate::pointer_density::{optimal_pointer_x, optimal_pointer_z, PushForward};
use crate::pointers::{solve_unbiased_x, solve_unbiased_z};
use crate::quality::{heisenberg_check, rational_x_report, rational_z_report};
use crate::reproduce::constants;
use crate::simulate::{self, stats, SimConfig, SimMethod};
use crate::special::{
    integral_i, integral_i_quadrature, integral_j, integral_j_quadrature, integrals_identity_residual, integrate,
    log_grid, QuadratureOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fast" => Some(Self::Fast),
            "full" => Some(Self::Full),
            _ => None,
        }
    }
}

/// Negative-control hooks; all zero in normal runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Hooks {
    /// Added to every closed-form `I(ε)` the suites evaluate.
    pub perturb_i: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: Level,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// A Bloch vector uniform in the ball, or on the sphere when `pure`.
pub fn random_bloch<R: Rng>(rng: &mut R, pure: bool) -> BlochVector {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-12 {
            continue;
        }
        let r = if pure { 1.0 } else { rng.random::<f64>().cbrt() };
        let s = r / norm;
        // rescaling can round the norm a hair above 1
        let v = [v[0] * s, v[1] * s, v[2] * s];
        let shrink = 1.0 / (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1.0);
        return BlochVector::unchecked(v[0] * shrink, v[1] * shrink, v[2] * shrink);
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn run(name: &str, f: impl FnOnce() -> Result<Outcome>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        name: name.to_owned(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// `max |2εJ + (ε − 1)I − √(2π)|` over `n` log-spaced `ε ∈ [1e−3, 50]`,
/// with `J` from quadrature.
pub fn integrals_identity_max_residual(n: usize, hooks: &Hooks) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for eps in log_grid(1e-3, 50.0, n) {
        let i = integral_i(eps)? + hooks.perturb_i;
        let j = integral_j_quadrature(eps, 1e-13)?.value;
        worst = worst.max(integrals_identity_residual(eps, i, j).abs());
    }
    Ok(worst)
}

/// Largest relative deviation of closed-form `I`, `J` from quadrature.
pub fn integrals_max_relative_error(n: usize, hooks: &Hooks) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for eps in log_grid(1e-3, 50.0, n) {
        let i = integral_i(eps)? + hooks.perturb_i;
        let j = integral_j(eps)?;
        let qi = integral_i_quadrature(eps, 1e-12)?.value;
        let qj = integral_j_quadrature(eps, 1e-12)?.value;
        worst = worst.max((i / qi - 1.0).abs()).max((j / qj - 1.0).abs());
    }
    Ok(worst)
}

/// Largest componentwise gap between `F_k(I)` and its ODE oracle over
/// `k ∈ {0, ±0.5, ±1, ±2, ±5}`, `t ∈ {0.1, 1, 2.513, 8}`.
pub fn characteristic_max_error(steps: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &k in &[0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0] {
        for &t in &[0.1, 1.0, 2.513, 8.0] {
            let ode = ode_oracle_fk(k, t, steps)?;
            let closed = characteristic_matrix(k, &TimeHorizon::finite(t)?);
            worst = worst.max(ode.identity.max_abs_diff(&closed));
        }
    }
    Ok(worst)
}

/// `∫ p(y) dy` by quadrature.
pub fn matrix_density_integral(horizon: &TimeHorizon) -> Result<Hermitian2> {
    let opts = QuadratureOptions::with_tol(1e-12);
    let inf = f64::INFINITY;
    let a = integrate(|y| matrix_density_p(y, horizon).a, -inf, inf, &opts)?.value;
    let b = integrate(|y| matrix_density_p(y, horizon).b_re, -inf, inf, &opts)?.value;
    let d = integrate(|y| matrix_density_p(y, horizon).d, -inf, inf, &opts)?.value;
    Ok(Hermitian2::new(a, Complex64::new(b, 0.0), d))
}

/// Worst deviations over `n_states` random states of: `∫q − 1`, the most
/// negative `q` on `[−8, 8]`, and `q` under a change of `py` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySuite {
    pub p_normalization: f64,
    pub q_normalization: f64,
    pub q_min: f64,
    pub py_dependence: f64,
}

pub fn density_suite(n_states: usize, seed: u64) -> Result<DensitySuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p_norm: f64 = 0.0;
    for k in 0..10 {
        let h = if k == 9 { TimeHorizon::infinite() } else { TimeHorizon::finite(0.1 + k as f64)? };
        p_norm = p_norm.max(matrix_density_integral(&h)?.max_abs_diff(&Hermitian2::identity()));
    }
    let mut q_norm: f64 = 0.0;
    let mut q_min = f64::INFINITY;
    let mut py_dep: f64 = 0.0;
    for s in 0..n_states {
        let rho = random_bloch(&mut rng, s % 2 == 0);
        let h = if s % 3 == 0 { TimeHorizon::infinite() } else { TimeHorizon::finite(0.05 + 10.0 * rng.random::<f64>())? };
        // the exact CDF integrates q over the line in closed form
        q_norm = q_norm.max((scalar_cdf_q(f64::INFINITY, &h, &rho) - scalar_cdf_q(f64::NEG_INFINITY, &h, &rho) - 1.0).abs());
        let limit = (1.0 - rho.px * rho.px - rho.pz * rho.pz).max(0.0).sqrt();
        let other = BlochVector::unchecked(rho.px, limit * (2.0 * rng.random::<f64>() - 1.0), rho.pz);
        for j in 0..=320 {
            let y = -8.0 + 0.05 * j as f64;
            let q = scalar_density_q(y, &h, &rho);
            q_min = q_min.min(q);
            py_dep = py_dep.max((q - scalar_density_q(y, &h, &other)).abs());
        }
    }
    // one quadrature normalization check per sweep on top of the closed form
    let rho = random_bloch(&mut rng, false);
    let q_quad = integrate(
        |y| scalar_density_q(y, &TimeHorizon::infinite(), &rho),
        f64::NEG_INFINITY,
        f64::INFINITY,
        &QuadratureOptions::with_tol(1e-12),
    )?
    .value;
    q_norm = q_norm.max((q_quad - 1.0).abs());
    Ok(DensitySuite {
        p_normalization: p_norm,
        q_normalization: q_norm,
        q_min,
        py_dependence: py_dep,
    })
}

/// Worst errors of the Frobenius–Perron checks over `n_states` random
/// states at `β = 1`: test-function consistency, push-forward means, and
/// grid normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusPerronSuite {
    pub test_function: f64,
    pub mean: f64,
    pub grid_mass: f64,
}

pub fn frobenius_perron_suite(n_states: usize, seed: u64) -> Result<FrobeniusPerronSuite> {
    let horizon = TimeHorizon::infinite();
    let px = optimal_pointer_x(&horizon)?;
    let pz = optimal_pointer_z(&horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = FrobeniusPerronSuite {
        test_function: 0.0,
        mean: 0.0,
        grid_mass: 0.0,
    };
    for s in 0..n_states {
        let rho = random_bloch(&mut rng, s % 2 == 1);
        let c: [f64; 4] = std::array::from_fn(|_| 2.0 * rng.random::<f64>() - 1.0);
        let g = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        for (pointer, target) in [(px, rho.px), (pz, rho.pz)] {
            let push = PushForward::from_pointer(&pointer, horizon, rho)?;
            let lhs = push.expectation(g, 1e-12)?;
            let rhs = push.expectation_in_y(g, 1e-12)?;
            out.test_function = out.test_function.max((lhs - rhs).abs());
            out.mean = out.mean.max((push.expectation(|x| x, 1e-12)? - target).abs());
            let grid = crate::pointer_density::pointer_grid(&pointer, &rho, &horizon, crate::pointer_density::FIGURE_NODES)?;
            out.grid_mass = out.grid_mass.max((grid.mass() - 1.0).abs());
        }
    }
    Ok(out)
}

/// Smallest `σσ̃ − 1` over an `n × n` grid of `(ε, δ) ∈ [0.01, 50]²` at the
/// given `β`, using the closed-form reports.
pub fn heisenberg_sweep(n: usize, beta: f64) -> Result<f64> {
    let grid = log_grid(0.01, 50.0, n);
    let mut worst = f64::INFINITY;
    for &eps in &grid {
        let rx = rational_x_report(eps, beta)?;
        for &delta in &grid {
            let rz = rational_z_report(delta, beta)?;
            let product = heisenberg_check(&rx, &rz)?;
            worst = worst.min(product - 1.0);
        }
    }
    Ok(worst)
}

/// χ² of an exact-endpoint histogram against `q`: 120 bins of width 0.1
/// on `[−6, 6]` plus two tail bins.
pub fn endpoint_chi_square(rho: &BlochVector, horizon: TimeHorizon, n: usize, seed: u64) -> Result<stats::ChiSquareResult> {
    let mut cfg = SimConfig::new(SimMethod::EndpointExact, n, seed)?;
    cfg.horizon = horizon;
    let ys = simulate::endpoints(&simulate::sample_endpoints(rho, &cfg)?);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend((0..=120).map(|k| -6.0 + 0.1 * k as f64));
    edges.push(f64::INFINITY);
    let cdf: Vec<f64> = edges.iter().map(|&y| scalar_cdf_q(y, &horizon, rho)).collect();
    let probs: Vec<f64> = cdf.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(stats::chi_square_test(&stats::histogram(&ys, &edges), &probs, n as u64))
}

/// Two-sample KS between filter-path endpoints and exact draws from `q`.
pub fn filter_vs_exact(rho: &BlochVector, n: usize, dt: f64, t: f64, seed: u64) -> Result<stats::KsResult> {
    let mut paths = SimConfig::new(SimMethod::FilterPaths, n, seed)?;
    paths.dt = dt;
    paths.horizon = TimeHorizon::finite(t)?;
    let mut exact = SimConfig::new(SimMethod::EndpointExact, n, seed.wrapping_add(1))?;
    exact.horizon = TimeHorizon::finite(paths.steps() as f64 * dt)?;
    let a = simulate::endpoints(&simulate::simulate_filter_paths(rho, &paths)?);
    let b = simulate::endpoints(&simulate::sample_endpoints(rho, &exact)?);
    Ok(stats::ks_two_sample(&a, &b))
}

/// `(mean − P)/SE` of the optimal σx and σz pointers on exact draws.
pub fn pointer_mean_z_scores(rho: &BlochVector, horizon: TimeHorizon, n: usize, seed: u64) -> Result<[f64; 2]> {
    let mut cfg = SimConfig::new(SimMethod::EndpointExact, n, seed)?;
    cfg.horizon = horizon;
    let samples = simulate::sample_endpoints(rho, &cfg)?;
    let ex = simulate::empirical_quality(&samples, &optimal_pointer_x(&horizon)?, rho, &Hermitian2::sigma_x())?;
    let ez = simulate::empirical_quality(&samples, &optimal_pointer_z(&horizon)?, rho, &Hermitian2::sigma_z())?;
    Ok([(ex.mean - rho.px) / ex.standard_error, (ez.mean - rho.pz) / ez.standard_error])
}

fn pass_if(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

/// Runs the suite at `level`.
pub fn run_suite(level: Level, hooks: &Hooks) -> VerifyReport {
    let start = Instant::now();
    let full = level == Level::Full;
    let mut checks = Vec::new();

    let n_eps = if full { 100 } else { 25 };
    checks.push(run("lemma_integrals_identity", || {
        let r = integrals_identity_max_residual(n_eps, hooks)?;
        pass_if(r < 1e-9, format!("max |2eJ + (e-1)I - sqrt(2pi)| = {r:.3e} over {n_eps} eps (limit 1e-9)"))
    }));
    checks.push(run("integrals_vs_quadrature", || {
        let r = integrals_max_relative_error(n_eps, hooks)?;
        pass_if(r < 1e-8, format!("max relative error = {r:.3e} (limit 1e-8)"))
    }));
    checks.push(run("characteristic_function_ode", || {
        let r = characteristic_max_error(if full { 20_000 } else { 4_000 })?;
        pass_if(r < 1e-7, format!("max componentwise error = {r:.3e} (limit 1e-7)"))
    }));
    checks.push(run("unbiasedness_constraints", || {
        let mut worst: f64 = 0.0;
        for eps in log_grid(0.05, 20.0, if full { 12 } else { 4 }) {
            worst = worst.max(solve_unbiased_x(eps, 1.0)?.max_residual());
            worst = worst.max(solve_unbiased_z(eps, 1.0)?.max_residual());
            worst = worst.max(solve_unbiased_x(eps, 0.8)?.max_residual());
        }
        pass_if(worst < 1e-9, format!("max constraint residual = {worst:.3e} (limit 1e-9)"))
    }));
    checks.push(run("density_suite", || {
        let s = density_suite(if full { 1000 } else { 100 }, 17)?;
        let ok = s.p_normalization < 1e-9 && s.q_normalization < 1e-9 && s.q_min >= -1e-12 && s.py_dependence == 0.0;
        pass_if(ok, format!("{s:?}"))
    }));
    checks.push(run("frobenius_perron_consistency", || {
        let s = frobenius_perron_suite(if full { 20 } else { 4 }, 23)?;
        let ok = s.test_function < 1e-6 && s.mean < 1e-6 && s.grid_mass < 1e-3;
        pass_if(ok, format!("{s:?}"))
    }));
    checks.push(run("reported_constants", || {
        let rows = constants(1.0)?;
        let failed: Vec<&str> = rows.iter().filter(|r| r.passed != Some(true)).map(|r| r.name).collect();
        pass_if(failed.is_empty(), format!("{} rows, failing: {failed:?}", rows.len()))
    }));
    checks.push(run("heisenberg_sweep", || {
        let n = if full { 20 } else { 6 };
        let worst = heisenberg_sweep(n, 1.0)?.min(heisenberg_sweep(n, 0.7)?);
        pass_if(worst >= -1e-9, format!("min sigma*sigma_tilde - 1 = {worst:.4e} over {n}x{n} grid, beta in {{1, 0.7}}"))
    }));
    if full {
        let rho = BlochVector::unchecked(0.5, 0.2, 0.6);
        checks.push(run("monte_carlo_endpoint", || {
            let h = TimeHorizon::finite(simulate::DEFAULT_T)?;
            let chi = endpoint_chi_square(&rho, h, 1_000_000, 2024)?;
            pass_if(
                chi.p_value > 0.01,
                format!("chi2 vs q at n = 1e6: {:.1} on {} dof, p = {:.3}", chi.statistic, chi.dof, chi.p_value),
            )
        }));
        checks.push(run("pointer_means", || {
            let h = TimeHorizon::finite(simulate::DEFAULT_T)?;
            let z = pointer_mean_z_scores(&rho, h, 1_000_000, 2025)?;
            pass_if(z.iter().all(|z| z.abs() < 4.0), format!("z-scores (x, z) = ({:+.2}, {:+.2})", z[0], z[1]))
        }));
        checks.push(run("filter_vs_exact", || {
            let ks = filter_vs_exact(&rho, 50_000, 5e-4, simulate::DEFAULT_T, 77)?;
            pass_if(ks.p_value > 0.01, format!("two-sample KS at n = 5e4, dt = 5e-4: D = {:.3e}, p = {:.3}", ks.statistic, ks.p_value))
        }));
    }

    let passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        level,
        checks,
        passed,
        seconds: start.elapsed().as_secs_f64(),
    }
}
