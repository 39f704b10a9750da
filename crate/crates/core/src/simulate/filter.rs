//! Diffusive quantum filter for homodyne detection of the decaying atom.
//!
//! With `π = ½(I + xσx + yσy + zσz)` and observed increment
//! `dY = x dt + dW`, the conditional state obeys
//!
//! ```text
//! dx = −x/2 dt + (1 + z − x²) dW
//! dy = −y/2 dt − x y dW
//! dz = −(1 + z) dt − x (1 + z) dW
//! ```
//!
//! Euler–Maruyama in these coordinates keeps the trace at exactly 1. A step
//! that leaves the Bloch ball by a little is projected back onto the sphere;
//! a step that overshoots by more is redone as two half steps whose Wiener
//! increments are split with a Brownian bridge.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{BlochVector, Hermitian2};
use crate::error::{Error, Result};

/// Overshoot of the Bloch norm that is projected away instead of retried.
pub const PROJECTION_SLACK: f64 = 1e-2;
/// Maximum number of nested halvings of a single step.
pub const MAX_HALVINGS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FilterState {
    pub fn from_bloch(rho: &BlochVector) -> Self {
        Self {
            x: rho.px,
            y: rho.py,
            z: rho.pz,
        }
    }

    pub fn bloch_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn density_matrix(&self) -> Hermitian2 {
        BlochVector::unchecked(self.x, self.y, self.z).density_matrix()
    }

    /// `tr((σ− + σ+) π)`.
    pub fn mean_signal(&self) -> f64 {
        self.x
    }

    fn euler_step(&self, dt: f64, dw: f64) -> Self {
        let (x, y, z) = (self.x, self.y, self.z);
        Self {
            x: x - 0.5 * x * dt + (1.0 + z - x * x) * dw,
            y: y - 0.5 * y * dt - x * y * dw,
            z: z - (1.0 + z) * dt - x * (1.0 + z) * dw,
        }
    }

    fn project(mut self) -> Self {
        let norm = self.bloch_norm();
        if norm > 1.0 {
            self.x /= norm;
            self.y /= norm;
            self.z /= norm;
        }
        self
    }

    /// Advances by `dt` with Wiener increment `dw`; returns the new state.
    pub fn step<R: Rng>(&self, dt: f64, dw: f64, rng: &mut R, time: f64) -> Result<Self> {
        self.step_nested(dt, dw, rng, time, 0)
    }

    fn step_nested<R: Rng>(&self, dt: f64, dw: f64, rng: &mut R, time: f64, depth: u32) -> Result<Self> {
        let next = self.euler_step(dt, dw);
        if next.bloch_norm() <= 1.0 + PROJECTION_SLACK {
            return Ok(next.project());
        }
        if depth >= MAX_HALVINGS {
            return Err(Error::PositivityLoss { time, retries: depth });
        }
        let half = 0.5 * dt;
        let xi: f64 = rng.sample(StandardNormal);
        let dw1 = 0.5 * dw + (0.5 * half).sqrt() * xi;
        let mid = self.step_nested(half, dw1, rng, time, depth + 1)?;
        mid.step_nested(half, dw - dw1, rng, time + half, depth + 1)
    }
}

/// One simulated homodyne record.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPath {
    /// Normalized weighted endpoint `Y_t`.
    pub endpoint: f64,
    pub final_state: FilterState,
    pub max_bloch_norm: f64,
    /// Observed increments `dY` per step, if requested.
    pub record: Option<Vec<f64>>,
}

/// Runs the filter from `rho` for `steps` steps of size `dt`.
pub fn run_path<R: Rng>(rho: &BlochVector, dt: f64, steps: usize, beta: f64, keep_record: bool, rng: &mut R) -> Result<FilterPath> {
    let mut state = FilterState::from_bloch(rho);
    let mut weighted = 0.0;
    let mut max_norm = state.bloch_norm();
    let mut record = keep_record.then(|| Vec::with_capacity(steps));
    let sqrt_dt = dt.sqrt();
    let decay = (-0.5 * dt).exp();
    let mut weight = 1.0;
    for k in 0..steps {
        let dw = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        let dy = state.mean_signal() * dt + dw;
        weighted += weight * dy;
        if let Some(r) = record.as_mut() {
            r.push(dy);
        }
        state = state.step(dt, dw, rng, k as f64 * dt)?;
        max_norm = max_norm.max(state.bloch_norm());
        weight *= decay;
    }
    Ok(FilterPath {
        endpoint: weighted / beta,
        final_state: state,
        max_bloch_norm: max_norm,
        record,
    })
}
