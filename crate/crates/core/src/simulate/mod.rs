//! Monte Carlo: exact endpoint sampling from `q`, full homodyne records via
//! the quantum filter, and empirical pointer statistics.
//!
//! Sample `i` always draws from its own ChaCha8 stream `(seed, i)`, so the
//! output does not depend on how samples are spread across threads.

mod filter;
mod sampler;
pub mod stats;

pub use filter::{run_path, FilterPath, FilterState, MAX_HALVINGS, PROJECTION_SLACK};
pub use sampler::{EndpointSampler, Pchip, CDF_NODES, CDF_RANGE};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{expectation, BlochVector, Hermitian2};
use crate::density::TimeHorizon;
use crate::error::{Error, Result};
use crate::pointers::PointerFunction;

/// Default simulation horizon.
pub const DEFAULT_T: f64 = 8.0;
/// Default filter step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Fewest samples accepted by [`empirical_quality`].
pub const MIN_EMPIRICAL_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMethod {
    EndpointExact,
    FilterPaths,
}

impl SimMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::EndpointExact => "endpoint_exact",
            Self::FilterPaths => "filter_paths",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "endpoint_exact" => Some(Self::EndpointExact),
            "filter_paths" => Some(Self::FilterPaths),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: TimeHorizon,
    pub dt: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub method: SimMethod,
    /// Keep the per-step increments of filter paths.
    pub keep_records: bool,
}

impl SimConfig {
    pub fn new(method: SimMethod, n_samples: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            horizon: TimeHorizon::finite(DEFAULT_T)?,
            dt: DEFAULT_DT,
            n_samples,
            seed,
            method,
            keep_records: false,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.method == SimMethod::FilterPaths {
            if self.horizon.is_infinite() || self.horizon.t <= 0.0 {
                return Err(Error::InvalidConfig("filter paths need a finite horizon t > 0".into()));
            }
            if self.dt > self.horizon.t / 100.0 {
                return Err(Error::InvalidConfig(format!(
                    "dt = {} exceeds t/100 = {}",
                    self.dt,
                    self.horizon.t / 100.0
                )));
            }
        }
        Ok(())
    }

    /// Number of filter steps covering `[0, t]`.
    pub fn steps(&self) -> usize {
        (self.horizon.t / self.dt).round() as usize
    }

    fn stream(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointSample {
    pub y: f64,
    pub record: Option<Vec<f64>>,
}

fn require_method(cfg: &SimConfig, method: SimMethod) -> Result<()> {
    cfg.validate()?;
    if cfg.method != method {
        return Err(Error::InvalidConfig(format!(
            "expected method {}, got {}",
            method.name(),
            cfg.method.name()
        )));
    }
    Ok(())
}

/// I.i.d. draws from `q` by inverse-CDF sampling.
pub fn sample_endpoints(rho: &BlochVector, cfg: &SimConfig) -> Result<Vec<EndpointSample>> {
    require_method(cfg, SimMethod::EndpointExact)?;
    let sampler = EndpointSampler::new(cfg.horizon, *rho);
    Ok((0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let u: f64 = cfg.stream(i).random();
            EndpointSample {
                y: sampler.sample(u),
                record: None,
            }
        })
        .collect())
}

/// Full filter paths, one per sample, with their final conditional states.
pub fn simulate_filter_detailed(rho: &BlochVector, cfg: &SimConfig) -> Result<Vec<FilterPath>> {
    require_method(cfg, SimMethod::FilterPaths)?;
    let steps = cfg.steps();
    // normalize by the horizon actually covered by the steps
    let beta = TimeHorizon::finite(steps as f64 * cfg.dt)?.beta;
    (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| run_path(rho, cfg.dt, steps, beta, cfg.keep_records, &mut cfg.stream(i)))
        .collect()
}

/// Endpoints `Y_t` of simulated homodyne records.
pub fn simulate_filter_paths(rho: &BlochVector, cfg: &SimConfig) -> Result<Vec<EndpointSample>> {
    Ok(simulate_filter_detailed(rho, cfg)?
        .into_iter()
        .map(|p| EndpointSample {
            y: p.endpoint,
            record: p.record,
        })
        .collect())
}

/// Dispatches on `cfg.method`.
pub fn simulate(rho: &BlochVector, cfg: &SimConfig) -> Result<Vec<EndpointSample>> {
    match cfg.method {
        SimMethod::EndpointExact => sample_endpoints(rho, cfg),
        SimMethod::FilterPaths => simulate_filter_paths(rho, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalQuality {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `mean`.
    pub standard_error: f64,
    /// `variance − Var_ρ(target)`, the state-dependent added variance.
    pub added_variance: f64,
}

/// Sample mean and variance of `h(y)`.
pub fn empirical_quality(
    samples: &[EndpointSample],
    h: &PointerFunction,
    rho: &BlochVector,
    target: &Hermitian2,
) -> Result<EmpiricalQuality> {
    if samples.len() < MIN_EMPIRICAL_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "empirical quality needs at least {MIN_EMPIRICAL_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if !h.acts_on_normalized_endpoint() {
        return Err(Error::InvalidConfig(format!(
            "pointer {} reads the un-normalized integral, not Y_t",
            h.name()
        )));
    }
    let n = samples.len() as f64;
    let values: Vec<f64> = samples.iter().map(|s| h.evaluate(s.y)).collect();
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let target_mean = expectation(rho, target);
    let target_var = expectation(rho, &target.square()) - target_mean * target_mean;
    Ok(EmpiricalQuality {
        n: samples.len(),
        mean,
        variance,
        standard_error: (variance / n).sqrt(),
        added_variance: variance - target_var,
    })
}

/// Endpoint values of a sample list.
pub fn endpoints(samples: &[EndpointSample]) -> Vec<f64> {
    samples.iter().map(|s| s.y).collect()
}
