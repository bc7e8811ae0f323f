//! Post-processing: energies, efficiencies, storage-decay fits, Stokes-seed
//! sensitivity, and the optical-depth sweep.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Error;
use crate::grid::{trapezoid_weight, GridSpec, TimeGrid};
use crate::mb_solver::{integrate, FwmMode, Solution, SolverOptions};
use crate::params::{breakdown_flag, BreakdownReport, MediumParams};
use crate::pulses::{ControlSchedule, PulseSpec};
use crate::Result;

/// Trapezoidal ∫|trace|² dt over a time window.
pub fn pulse_energy(grid: &TimeGrid, trace: &[C64], window: (f64, f64)) -> Result<f64> {
    if trace.len() != grid.n {
        return Err(Error::GridMismatch(
            "trace must match the time grid".into(),
        ));
    }
    let lo = ((window.0 - grid.t0) / grid.dt).ceil().max(0.0) as usize;
    let hi_f = ((window.1 - grid.t0) / grid.dt).floor();
    if hi_f < 0.0 {
        return Err(Error::EmptyWindow(format!(
            "window [{}, {}] contains no samples",
            window.0, window.1
        )));
    }
    let hi = (hi_f as usize).min(grid.n - 1);
    if hi <= lo {
        return Err(Error::EmptyWindow(format!(
            "window [{}, {}] contains fewer than two samples",
            window.0, window.1
        )));
    }
    let n = hi - lo + 1;
    let sum: f64 = (lo..=hi)
        .map(|k| trapezoid_weight(k - lo, n) * trace[k].norm_sqr())
        .sum();
    Ok(sum * grid.dt)
}

/// Exponential decay fit A·e^{−t/τ} in the log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Decay time τ in μs; infinite when no decay is resolved.
    pub tau: f64,
    pub amplitude: f64,
    /// RMS residual of ln(energy); large values flag a poor fit.
    pub residual: f64,
}

pub fn fit_decay(times: &[f64], energies: &[f64]) -> Result<DecayFit> {
    if times.len() != energies.len() {
        return Err(Error::GridMismatch(
            "times and energies must have equal length".into(),
        ));
    }
    if times.len() < 4 {
        return Err(Error::invalid("storage_times", "need at least 4 points"));
    }
    if energies.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::invalid("energies", "must all be positive"));
    }
    let n = times.len() as f64;
    let logs: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
    let tm = times.iter().sum::<f64>() / n;
    let lm = logs.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (t, l) in times.iter().zip(&logs) {
        cov += (t - tm) * (l - lm);
        var += (t - tm) * (t - tm);
    }
    if var == 0.0 {
        return Err(Error::invalid("storage_times", "must not be identical"));
    }
    let slope = cov / var;
    let intercept = lm - slope * tm;
    let residual = (times
        .iter()
        .zip(&logs)
        .map(|(t, l)| (l - (intercept + slope * t)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let tau = if slope.abs() < 1e-300 || slope >= 0.0 && slope.abs() < 1e-12 {
        f64::INFINITY
    } else {
        -1.0 / slope
    };
    Ok(DecayFit {
        tau,
        amplitude: intercept.exp(),
        residual,
    })
}

/// Energy bookkeeping for one channel of a storage run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub input_energy: f64,
    /// Energy leaving before the control switch-off.
    pub leak_energy: f64,
    /// Energy retrieved after the control is restored.
    pub retrieved_energy: f64,
    /// retrieved_energy / input_energy.
    pub efficiency: f64,
    /// Set when the output exceeds the input (FWM gain).
    pub gain: bool,
}

pub fn efficiency(
    out_grid: &TimeGrid,
    trace: &[C64],
    input_energy: f64,
    t_off: f64,
    t_on: f64,
) -> Result<EfficiencyReport> {
    let leak = pulse_energy(out_grid, trace, (out_grid.t0, t_off))?;
    let retrieved = pulse_energy(out_grid, trace, (t_on, out_grid.t_end()))?;
    if !(input_energy > 0.0) {
        return Err(Error::invalid("input_energy", "must be positive"));
    }
    let eff = retrieved / input_energy;
    Ok(EfficiencyReport {
        input_energy,
        leak_energy: leak,
        retrieved_energy: retrieved,
        efficiency: eff,
        gain: eff + leak / input_energy > 1.0,
    })
}

/// Peak of the normalized cross-correlation of two moduli traces over all
/// integer shifts; 1 means identical shapes up to a delay and scale.
pub fn cross_correlation_peak(a: &[C64], b: &[C64]) -> f64 {
    let am: Vec<f64> = a.iter().map(|v| v.norm()).collect();
    let bm: Vec<f64> = b.iter().map(|v| v.norm()).collect();
    let na = am.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = bm.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let n = am.len() as i64;
    let mut best = 0.0f64;
    for shift in -(n - 1)..n {
        let mut dot = 0.0;
        for i in 0..am.len() as i64 {
            let j = i + shift;
            if j >= 0 && j < bm.len() as i64 {
                dot += am[i as usize] * bm[j as usize];
            }
        }
        best = best.max(dot / (na * nb));
    }
    best
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid("samples", "need at least 2 matched points"));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("samples", "log-log fit needs positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let xm = lx.iter().sum::<f64>() / n;
    let ym = ly.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        cov += (a - xm) * (b - ym);
        var += (a - xm) * (a - xm);
    }
    Ok(cov / var)
}

/// Relative L2 deviation of the moduli of two traces restricted to a window,
/// normalized by the reference restricted to the same window.
fn segment_deviation(
    grid: &TimeGrid,
    trace: &[C64],
    reference: &[C64],
    window: (f64, f64),
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..grid.n {
        let t = grid.t(k);
        if t >= window.0 && t <= window.1 {
            num += (trace[k].norm() - reference[k].norm()).powi(2);
            den += reference[k].norm_sqr();
        }
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

/// Deviations from the reference run, split at the storage window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentDeviation {
    pub leak: f64,
    pub retrieved: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityRow {
    pub stokes_ratio: (f64, f64),
    pub signal: SegmentDeviation,
    pub stokes: SegmentDeviation,
}

/// Storage runs over a set of Stokes seed ratios, comparing each run's
/// output moduli against the first ratio in the list (the reference).
pub fn stokes_sensitivity(
    params: &MediumParams,
    grid: &GridSpec,
    pulse_template: &PulseSpec,
    control: &ControlSchedule,
    r_values: &[C64],
    opts: &SolverOptions,
) -> Result<Vec<SensitivityRow>> {
    if r_values.is_empty() {
        return Err(Error::invalid("r_values", "need at least one seed ratio"));
    }
    let run = |r: C64| -> Result<Solution> {
        let mut pulse = pulse_template.clone();
        pulse.stokes_ratio = r;
        integrate(params, grid, &pulse, control, FwmMode::Full, opts)
    };
    let reference = run(r_values[0])?;
    let og = reference.out_grid;
    let leak_w = (og.t0, control.t_off);
    let ret_w = (control.t_on(), og.t_end());
    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let sol = if r == r_values[0] {
            reference.clone()
        } else {
            run(r)?
        };
        rows.push(SensitivityRow {
            stokes_ratio: (r.re, r.im),
            signal: SegmentDeviation {
                leak: segment_deviation(&og, &sol.signal_out, &reference.signal_out, leak_w),
                retrieved: segment_deviation(&og, &sol.signal_out, &reference.signal_out, ret_w),
            },
            stokes: SegmentDeviation {
                leak: segment_deviation(&og, &sol.stokes_out, &reference.stokes_out, leak_w),
                retrieved: segment_deviation(&og, &sol.stokes_out, &reference.stokes_out, ret_w),
            },
        });
    }
    Ok(rows)
}

/// One point of the optical-depth sweep: depth plus its matched control
/// level and pulse duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdPoint {
    pub alpha0_l: f64,
    pub omega_mhz: f64,
    pub fwhm: f64,
}

#[derive(Debug, Clone)]
pub struct OdResult {
    pub point: OdPoint,
    pub breakdown: BreakdownReport,
    pub signal: EfficiencyReport,
    pub stokes: EfficiencyReport,
    pub solution: Solution,
}

/// Storage pulse used by sweeps: peak one FWHM before the switch-off so the
/// input ends exactly at t_off.
pub fn storage_pulse(fwhm: f64, t_off: f64, stokes_ratio: C64) -> PulseSpec {
    PulseSpec::truncated_gaussian(fwhm, t_off - fwhm, C64::new(1.0, 0.0), stokes_ratio)
        .with_window(t_off - 3.0 * fwhm, t_off)
}

/// Run the storage protocol across optical depths. `base` supplies γ, γ₀,
/// Δ_hf and δ; each point overrides the depth, control level and pulse
/// duration. Runs are ordered as given.
pub fn od_sweep(
    base: &MediumParams,
    points: &[OdPoint],
    storage_time: f64,
    stokes_ratio: C64,
    opts: &SolverOptions,
) -> Result<Vec<OdResult>> {
    let mut out = Vec::with_capacity(points.len());
    for pt in points {
        let mut p = *base;
        p.alpha0_l = pt.alpha0_l;
        p.omega = crate::params::mhz(pt.omega_mhz);
        p.validate()?;
        let d = crate::params::derive(&p)?;
        let pulse = storage_pulse(pt.fwhm, 0.0, stokes_ratio);
        let control = ControlSchedule::instantaneous(p.omega, p.omega, 0.0, storage_time);
        let t_end = storage_time + d.group_delay + 3.0 * pt.fwhm;
        let dt = 0.9 * GridSpec::max_dt(&p);
        let grid = GridSpec::new(
            crate::grid::DEFAULT_NZ,
            TimeGrid::span(-3.0 * pt.fwhm - 1.0, t_end, dt),
        );
        let sol = integrate(&p, &grid, &pulse, &control, FwmMode::Full, opts)?;
        let input_energy = {
            let (sig, _) = pulse.sample_inputs(&grid.time)?;
            pulse_energy(&grid.time, &sig, (grid.time.t0, control.t_off))?
        };
        let signal = efficiency(&sol.out_grid, &sol.signal_out, input_energy, 0.0, storage_time)?;
        let stokes = efficiency(&sol.out_grid, &sol.stokes_out, input_energy, 0.0, storage_time)?;
        out.push(OdResult {
            point: *pt,
            breakdown: breakdown_flag(&p)?,
            signal,
            stokes,
            solution: sol,
        });
    }
    Ok(out)
}
