//! Uniform space-time grids shared by the solvers.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::params::MediumParams;
use crate::Result;

/// Uniform time grid: samples at t0 + i·dt for i in 0..n. Times in μs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn span(t_start: f64, t_end: f64, dt: f64) -> Self {
        let n = ((t_end - t_start) / dt).ceil() as usize + 1;
        TimeGrid { t0: t_start, dt, n }
    }

    #[inline]
    pub fn t(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n - 1)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.t(i)).collect()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 - 1e-12 && t <= self.t_end() + 1e-12
    }

    /// Linear interpolation of a sampled array at time t; zero outside the
    /// grid.
    pub fn interp(&self, samples: &[C64], t: f64) -> C64 {
        debug_assert_eq!(samples.len(), self.n);
        let x = (t - self.t0) / self.dt;
        if x < 0.0 || x > (self.n - 1) as f64 {
            return C64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(self.n - 2);
        let a = x - i as f64;
        samples[i] * (1.0 - a) + samples[i + 1] * a
    }
}

/// Space-time grid for the time-domain solvers: nz uniform cells on z ∈ [0,1]
/// (nz + 1 nodes) and a uniform time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nz: usize,
    pub time: TimeGrid,
}

pub const DEFAULT_NZ: usize = 64;

/// Largest allowed dt·(fastest rate) after nondimensionalization.
pub const MAX_RATE_STEP: f64 = 0.1;

impl GridSpec {
    pub fn new(nz: usize, time: TimeGrid) -> Self {
        GridSpec { nz, time }
    }

    pub fn dz(&self) -> f64 {
        1.0 / self.nz as f64
    }

    pub fn z_nodes(&self) -> Vec<f64> {
        (0..=self.nz).map(|k| k as f64 * self.dz()).collect()
    }

    /// Largest dt that satisfies the step-size rule for these parameters.
    pub fn max_dt(params: &MediumParams) -> f64 {
        let d = crate::params::derive(params).expect("valid params");
        let fastest = params
            .gamma
            .max(params.omega)
            .max(d.big_gamma.norm())
            .max(d.big_gamma0.norm());
        MAX_RATE_STEP / fastest
    }

    /// Check the step-size rule dt·max(γ, Ω, |Γ|) < 0.1 and basic sanity.
    pub fn validate(&self, params: &MediumParams) -> Result<()> {
        if self.nz < 2 {
            return Err(Error::invalid("nz", "need at least 2 z cells"));
        }
        if self.time.n < 2 || !(self.time.dt > 0.0) {
            return Err(Error::invalid("time", "need n >= 2 and dt > 0"));
        }
        let limit = Self::max_dt(params);
        if self.time.dt >= limit {
            return Err(Error::StepSize(format!(
                "dt = {} μs does not resolve the fastest rate; need dt < {:.3e} μs",
                self.time.dt, limit
            )));
        }
        Ok(())
    }
}

/// Trapezoidal-rule weight for sample i of an n-point uniform grid.
#[inline]
pub fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Relative L2 distance ‖a − b‖ / ‖b‖ of two equal-length complex traces.
pub fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Relative L2 distance of the moduli of two traces, ‖|a| − |b|‖ / ‖|b|‖.
pub fn rel_l2_abs(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x.norm() - y.norm()).powi(2))
        .sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}
