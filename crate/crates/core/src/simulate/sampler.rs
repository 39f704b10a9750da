//! Inverse-CDF sampling of `q` on a fixed cumulative grid.

use crate::algebra::BlochVector;
use crate::density::{scalar_cdf_q, scalar_density_q, TimeHorizon};

/// Nodes of the cumulative grid.
pub const CDF_NODES: usize = 4096;
/// The grid covers `[−8, 8]`; the mass outside is below `1e−13`.
pub const CDF_RANGE: (f64, f64) = (-8.0, 8.0);

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    /// `x` strictly increasing, `y` monotone.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let secants: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            if a * b > 0.0 {
                // weighted harmonic mean
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
                slopes[i] = (w1 + w2) / (w1 / a + w2 / b);
            }
        }
        slopes[0] = end_slope(x[1] - x[0], x.get(2).map_or(0.0, |x2| x2 - x[1]), secants[0], secants.get(1).copied());
        slopes[n - 1] = end_slope(
            x[n - 1] - x[n - 2],
            if n > 2 { x[n - 2] - x[n - 3] } else { 0.0 },
            secants[n - 2],
            if n > 2 { Some(secants[n - 3]) } else { None },
        );
        Self { x, y, slopes }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.slopes[i] + h01 * self.y[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: Option<f64>) -> f64 {
    let Some(d1) = d1 else { return d0 };
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// Maps uniform variates to draws from `q`.
#[derive(Debug, Clone)]
pub struct EndpointSampler {
    inverse: Pchip,
    horizon: TimeHorizon,
    rho: BlochVector,
    lo: f64,
    hi: f64,
    polish: bool,
}

impl EndpointSampler {
    pub fn new(horizon: TimeHorizon, rho: BlochVector) -> Self {
        let (lo, hi) = CDF_RANGE;
        let mut ys = Vec::with_capacity(CDF_NODES);
        let mut fs: Vec<f64> = Vec::with_capacity(CDF_NODES);
        for k in 0..CDF_NODES {
            let y = lo + (hi - lo) * k as f64 / (CDF_NODES - 1) as f64;
            let f = scalar_cdf_q(y, &horizon, &rho);
            // keep the interpolation data strictly increasing in F
            if fs.last().is_none_or(|&last| f > last) {
                ys.push(y);
                fs.push(f);
            }
        }
        Self {
            inverse: Pchip::new(fs, ys),
            horizon,
            rho,
            lo,
            hi,
            polish: true,
        }
    }

    /// Disables the Newton refinement against the exact CDF (grid-only).
    pub fn without_polish(mut self) -> Self {
        self.polish = false;
        self
    }

    pub fn sample(&self, u: f64) -> f64 {
        let mut y = self.inverse.evaluate(u);
        if self.polish {
            for _ in 0..3 {
                let q = scalar_density_q(y, &self.horizon, &self.rho);
                if !(q > 1e-12) {
                    break;
                }
                let step = (scalar_cdf_q(y, &self.horizon, &self.rho) - u) / q;
                y = (y - step).clamp(self.lo, self.hi);
                if step.abs() < 1e-13 {
                    break;
                }
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_monotone_and_interpolating() {
        let x: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| if *v < 10.0 { 0.0 } else { v * v }).collect();
        let p = Pchip::new(x.clone(), y.clone());
        for k in 0..20 {
            assert_eq!(p.evaluate(x[k]), y[k]);
        }
        let mut last = f64::NEG_INFINITY;
        for k in 0..=1900 {
            let v = p.evaluate(k as f64 * 0.01);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn inverse_is_accurate() {
        let h = TimeHorizon::infinite();
        let rho = BlochVector::new(0.6, 0.0, 0.8).unwrap();
        let s = EndpointSampler::new(h, rho);
        let grid_only = EndpointSampler::new(h, rho).without_polish();
        for k in 1..200 {
            let u = k as f64 / 200.0;
            assert!((scalar_cdf_q(s.sample(u), &h, &rho) - u).abs() < 1e-12);
            assert!((scalar_cdf_q(grid_only.sample(u), &h, &rho) - u).abs() < 1e-6);
        }
    }

    #[test]
    fn pure_state_with_density_zero() {
        // q vanishes at one point for pure states in the x–z plane
        let h = TimeHorizon::infinite();
        let s = EndpointSampler::new(h, BlochVector::MINUS_X);
        let mut last = f64::NEG_INFINITY;
        for k in 1..1000 {
            let y = s.sample(k as f64 / 1000.0);
            assert!(y.is_finite() && y >= last);
            last = y;
        }
    }
}
