//! Input signal/Stokes envelope synthesis and the control-field timeline.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::TimeGrid;
use crate::Result;

const FOUR_LN2: f64 = 2.772588722239781;

/// Input pulse envelope. The Stokes boundary field is tied to the signal by
/// `stokes_ratio`: ε′*(0,t) = r·ε(0,t). The envelope is exactly zero outside
/// `window` (hard truncation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub shape: PulseShape,
    /// Full width at half maximum of |ε|, μs.
    pub fwhm: f64,
    /// Time of the envelope peak, μs (t = 0 is the control switch-off).
    pub center: f64,
    pub amplitude: C64,
    pub stokes_ratio: C64,
    /// [t_start, t_end] outside which the envelope is exactly 0.
    pub window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PulseShape {
    TruncatedGaussian,
    /// (t, amplitude) samples; linearly interpolated, zero outside their range.
    CustomSamples(Vec<(f64, C64)>),
}

impl PulseSpec {
    /// Truncated Gaussian with the default ±2·FWHM window around the center.
    pub fn truncated_gaussian(fwhm: f64, center: f64, amplitude: C64, stokes_ratio: C64) -> Self {
        PulseSpec {
            shape: PulseShape::TruncatedGaussian,
            fwhm,
            center,
            amplitude,
            stokes_ratio,
            window: (center - 2.0 * fwhm, center + 2.0 * fwhm),
        }
    }

    pub fn with_window(mut self, t_start: f64, t_end: f64) -> Self {
        self.window = (t_start, t_end);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > 0.0) {
            return Err(Error::invalid("fwhm", "must be > 0"));
        }
        if !(self.window.0 <= self.center && self.center <= self.window.1) {
            return Err(Error::invalid(
                "truncation_window",
                "must contain the pulse center",
            ));
        }
        Ok(())
    }

    /// Signal boundary envelope ε(0,t).
    pub fn signal_at(&self, t: f64) -> C64 {
        if t < self.window.0 || t > self.window.1 {
            return C64::new(0.0, 0.0);
        }
        match &self.shape {
            PulseShape::TruncatedGaussian => {
                let x = (t - self.center) / self.fwhm;
                self.amplitude * (-FOUR_LN2 * x * x).exp()
            }
            PulseShape::CustomSamples(samples) => {
                if samples.is_empty() {
                    return C64::new(0.0, 0.0);
                }
                let first = samples[0];
                let last = samples[samples.len() - 1];
                if t < first.0 || t > last.0 {
                    return C64::new(0.0, 0.0);
                }
                match samples.binary_search_by(|(ts, _)| ts.partial_cmp(&t).unwrap()) {
                    Ok(i) => samples[i].1,
                    Err(i) => {
                        let (t0, v0) = samples[i - 1];
                        let (t1, v1) = samples[i];
                        let a = (t - t0) / (t1 - t0);
                        v0 * (1.0 - a) + v1 * a
                    }
                }
            }
        }
    }

    /// Stokes boundary envelope ε′*(0,t) = r·ε(0,t).
    pub fn stokes_at(&self, t: f64) -> C64 {
        self.stokes_ratio * self.signal_at(t)
    }

    /// Sample both boundary envelopes on a time grid. Errors when fewer than
    /// 16 samples span the FWHM or the grid does not cover the window.
    pub fn sample_inputs(&self, grid: &TimeGrid) -> Result<(Vec<C64>, Vec<C64>)> {
        self.validate()?;
        if grid.dt * 16.0 > self.fwhm {
            return Err(Error::GridTooCoarse(format!(
                "only {:.1} samples per FWHM; need at least 16",
                self.fwhm / grid.dt
            )));
        }
        if !(grid.contains(self.window.0) && grid.contains(self.window.1)) {
            return Err(Error::GridTooCoarse(
                "time grid does not cover the truncation window".into(),
            ));
        }
        let signal: Vec<C64> = (0..grid.n).map(|i| self.signal_at(grid.t(i))).collect();
        let stokes: Vec<C64> = signal.iter().map(|&e| self.stokes_ratio * e).collect();
        Ok((signal, stokes))
    }

    /// Spectral bandwidth Δω = 4·ln2/FWHM (angular FWHM of the Gaussian
    /// spectrum), rad/μs. Only defined for the Gaussian shape.
    pub fn bandwidth(&self) -> Result<f64> {
        match self.shape {
            PulseShape::TruncatedGaussian => Ok(FOUR_LN2 / self.fwhm),
            PulseShape::CustomSamples(_) => Err(Error::Unsupported(
                "bandwidth is only defined for the truncated Gaussian shape".into(),
            )),
        }
    }
}

/// FWHM of a Gaussian pulse whose figure-caption bandwidth is Δω (rad/μs).
/// Caption values quote Δω as an ordinary-frequency width, so the angular
/// bandwidth convention of [`PulseSpec::bandwidth`] picks up a 2π here:
/// fwhm = 4·ln2/(2π·Δω). This reproduces the 6.6 μs pulse quoted for
/// Δω = 0.1·Γ_E at Ω/(2π) = 10 MHz, α₀L = 80.
pub fn fwhm_for_reported_bandwidth(delta_omega: f64) -> f64 {
    FOUR_LN2 / (std::f64::consts::TAU * delta_omega)
}

/// Control-field timeline: constant write level, off during storage,
/// constant read level afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    /// Rabi frequency during writing, rad/μs.
    pub omega_write: f64,
    /// Rabi frequency during retrieval, rad/μs.
    pub omega_read: f64,
    /// Switch-off time, μs.
    pub t_off: f64,
    /// Duration with Ω = 0, μs.
    pub storage_time: f64,
    pub switch_model: SwitchModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SwitchModel {
    Instantaneous,
    /// Linear ramp of the given duration (μs) at each switch.
    LinearRamp(f64),
}

impl ControlSchedule {
    /// Constant control at Ω (slow-light run: storage_time = 0 and equal
    /// write/read levels).
    pub fn constant(omega: f64) -> Self {
        ControlSchedule {
            omega_write: omega,
            omega_read: omega,
            t_off: 0.0,
            storage_time: 0.0,
            switch_model: SwitchModel::Instantaneous,
        }
    }

    pub fn instantaneous(omega_write: f64, omega_read: f64, t_off: f64, storage_time: f64) -> Self {
        ControlSchedule {
            omega_write,
            omega_read,
            t_off,
            storage_time,
            switch_model: SwitchModel::Instantaneous,
        }
    }

    /// Retrieval start time t_off + storage_time.
    pub fn t_on(&self) -> f64 {
        self.t_off + self.storage_time
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        if self.storage_time == 0.0 {
            return if t < self.t_off {
                self.omega_write
            } else {
                self.omega_read
            };
        }
        match self.switch_model {
            SwitchModel::Instantaneous => {
                if t < self.t_off {
                    self.omega_write
                } else if t < self.t_on() {
                    0.0
                } else {
                    self.omega_read
                }
            }
            SwitchModel::LinearRamp(d) => {
                if t < self.t_off {
                    self.omega_write
                } else if t < self.t_off + d {
                    self.omega_write * (1.0 - (t - self.t_off) / d)
                } else if t < self.t_on() {
                    0.0
                } else if t < self.t_on() + d {
                    self.omega_read * (t - self.t_on()) / d
                } else {
                    self.omega_read
                }
            }
        }
    }

    pub fn sample(&self, grid: &TimeGrid) -> Vec<f64> {
        (0..grid.n).map(|i| self.omega_at(grid.t(i))).collect()
    }
}
