//! Time-domain integration of the coupled atom-field equations with an
//! arbitrary control timeline, including storage and retrieval.
//!
//! In the co-moving frame the fields are slaved to the atomic variables:
//!
//!   ∂z ε   = i·g√N·P,    ∂z ε′* = −i·g√N·(Ω/Δ_hf)·S,
//!   ∂t S   = −Γ₀(t)·S + iΩ(t)·P + i(Ω(t)/Δ_hf)·g√N·ε′*,
//!   ∂t P   = −Γ(t)·P + iΩ(t)·S + i·g√N·ε,
//!
//! where S and P carry a √(L/c) normalization so that the coupling appears
//! only through g√N·√(L/c) = √(α₀L·γ/2). The light shift entering Γ₀(t) and
//! Γ(t) follows the instantaneous control intensity, so it vanishes while the
//! control is off.
//!
//! The method of lines discretizes z on nz + 1 nodes; the field slaving is a
//! cumulative trapezoid in z evaluated inside every RK4 stage.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::grid::{GridSpec, TimeGrid, MAX_RATE_STEP};
use crate::params::MediumParams;
use crate::pulses::{ControlSchedule, PulseSpec, SwitchModel};
use crate::Result;

/// Whether the Stokes channel participates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwmMode {
    /// Both fields propagate and mix.
    Full,
    /// Plain EIT reference: the Stokes field and its back-action on the spin
    /// wave are removed.
    EitOnly,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Keep every k-th time step in the output traces; 0 picks a stride
    /// giving roughly 0.02 μs output resolution.
    pub output_stride: usize,
    /// Times at which to record full z profiles of the state.
    pub snapshot_times: Vec<f64>,
    /// Abort when any variable exceeds this multiple of the input peak.
    pub blowup_factor: f64,
    /// Replace the dark part of the storage window by the exact analytic
    /// decay (valid for instantaneous switching and zero inputs).
    pub storage_fast_forward: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            output_stride: 0,
            snapshot_times: Vec::new(),
            blowup_factor: 1e6,
            storage_fast_forward: true,
        }
    }
}

/// Full z profile of the state at one instant.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub spin: Vec<C64>,
    pub polarization: Vec<C64>,
    pub signal: Vec<C64>,
    pub stokes: Vec<C64>,
}

/// Result of a time-domain run: output-face traces on a decimated uniform
/// grid plus any requested z snapshots.
#[derive(Debug, Clone)]
pub struct Solution {
    pub out_grid: TimeGrid,
    /// ε(L,t)
    pub signal_out: Vec<C64>,
    /// ε′*(L,t)
    pub stokes_out: Vec<C64>,
    /// Ω(t) at the output sample times.
    pub control: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

struct Stepper<'a> {
    params: &'a MediumParams,
    pulse: &'a PulseSpec,
    control: &'a ControlSchedule,
    mode: FwmMode,
    gn: f64,
    dz: f64,
    nz: usize,
}

impl Stepper<'_> {
    fn relax(&self, omega: f64) -> (C64, C64) {
        let shift = (self.params.clebsch_ratio * omega).powi(2) / self.params.delta_hf;
        let g0 = C64::new(self.params.gamma0, -(self.params.delta - shift));
        let g = C64::new(self.params.gamma, -(self.params.delta - 2.0 * shift));
        (g0, g)
    }

    /// Slave the fields to the state by cumulative trapezoid in z.
    fn fields(&self, t: f64, omega: f64, s: &[C64], p: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let n = self.nz + 1;
        let mut eps = Vec::with_capacity(n);
        let mut epsp = Vec::with_capacity(n);
        let i = C64::new(0.0, 1.0);
        let mut acc_e = self.pulse.signal_at(t);
        let mut acc_s = if self.mode == FwmMode::Full {
            self.pulse.stokes_at(t)
        } else {
            C64::new(0.0, 0.0)
        };
        eps.push(acc_e);
        epsp.push(acc_s);
        let ce = i * self.gn * (0.5 * self.dz);
        let cs = -i * self.gn * omega / self.params.delta_hf * (0.5 * self.dz);
        for k in 1..n {
            acc_e += ce * (p[k - 1] + p[k]);
            eps.push(acc_e);
            if self.mode == FwmMode::Full {
                acc_s += cs * (s[k - 1] + s[k]);
            }
            epsp.push(acc_s);
        }
        (eps, epsp)
    }

    fn rhs(&self, t: f64, s: &[C64], p: &[C64], ds: &mut [C64], dp: &mut [C64]) {
        let omega = self.control.omega_at(t);
        let (g0, g) = self.relax(omega);
        let (eps, epsp) = self.fields(t, omega, s, p);
        let i = C64::new(0.0, 1.0);
        let mix = i * omega / self.params.delta_hf * self.gn;
        for k in 0..=self.nz {
            ds[k] = -g0 * s[k] + i * omega * p[k] + mix * epsp[k];
            dp[k] = -g * p[k] + i * omega * s[k] + i * self.gn * eps[k];
        }
    }
}

fn axpy(out: &mut [C64], base: &[C64], scale: f64, d: &[C64]) {
    for k in 0..out.len() {
        out[k] = base[k] + scale * d[k];
    }
}

/// Integrate the atom-field equations over the grid's time span.
pub fn integrate(
    params: &MediumParams,
    grid: &GridSpec,
    pulse: &PulseSpec,
    control: &ControlSchedule,
    mode: FwmMode,
    opts: &SolverOptions,
) -> Result<Solution> {
    params.validate()?;
    grid.validate(params)?;
    pulse.validate()?;
    let dt = grid.time.dt;
    let max_rabi = control.omega_write.max(control.omega_read);
    if dt * max_rabi >= MAX_RATE_STEP {
        return Err(Error::StepSize(format!(
            "dt = {dt} μs does not resolve the control Rabi frequency"
        )));
    }

    let gn = (params.alpha0_l * params.gamma / 2.0).sqrt();
    let stepper = Stepper {
        params,
        pulse,
        control,
        mode,
        gn,
        dz: grid.dz(),
        nz: grid.nz,
    };

    let nn = grid.nz + 1;
    let mut s = vec![C64::new(0.0, 0.0); nn];
    let mut p = vec![C64::new(0.0, 0.0); nn];
    let mut k1s = vec![C64::new(0.0, 0.0); nn];
    let mut k1p = vec![C64::new(0.0, 0.0); nn];
    let mut k2s = k1s.clone();
    let mut k2p = k1p.clone();
    let mut k3s = k1s.clone();
    let mut k3p = k1p.clone();
    let mut k4s = k1s.clone();
    let mut k4p = k1p.clone();
    let mut tmp_s = k1s.clone();
    let mut tmp_p = k1p.clone();

    let nsteps = grid.time.n - 1;
    let stride = if opts.output_stride == 0 {
        ((0.02 / dt).round() as usize).max(1)
    } else {
        opts.output_stride
    };
    let out_grid = TimeGrid {
        t0: grid.time.t0,
        dt: dt * stride as f64,
        n: nsteps / stride + 1,
    };
    let mut signal_out = Vec::with_capacity(out_grid.n);
    let mut stokes_out = Vec::with_capacity(out_grid.n);
    let mut control_out = Vec::with_capacity(out_grid.n);
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut snap_steps: Vec<(usize, f64)> = opts
        .snapshot_times
        .iter()
        .map(|&ts| {
            let idx = ((ts - grid.time.t0) / dt).round() as i64;
            (idx.clamp(0, nsteps as i64) as usize, ts)
        })
        .collect();
    snap_steps.sort_by_key(|&(i, _)| i);

    let input_peak = pulse.amplitude.norm().max(pulse.amplitude.norm() * pulse.stokes_ratio.norm());
    let limit = opts.blowup_factor * input_peak.max(1e-30) * (1.0 + gn / params.gamma.max(1.0));

    // storage window eligible for the analytic fast-forward
    let can_skip = opts.storage_fast_forward
        && control.storage_time > 0.0
        && matches!(control.switch_model, SwitchModel::Instantaneous)
        && pulse.window.1 <= control.t_off;
    let settle = (20.0 / params.gamma).min(control.storage_time * 0.5);
    let skip_from = control.t_off + settle;
    let (g0_store, g_store) = stepper.relax(0.0);

    let record =
        |step: usize,
         s: &[C64],
         p: &[C64],
         signal_out: &mut Vec<C64>,
         stokes_out: &mut Vec<C64>,
         control_out: &mut Vec<f64>,
         stepper: &Stepper| {
            if step % stride == 0 && signal_out.len() < out_grid.n {
                let t = grid.time.t(step);
                let omega = control.omega_at(t);
                let (eps, epsp) = stepper.fields(t, omega, s, p);
                signal_out.push(eps[grid.nz]);
                stokes_out.push(epsp[grid.nz]);
                control_out.push(omega);
            }
        };

    let take_snapshot = |t: f64, s: &[C64], p: &[C64], stepper: &Stepper| -> Snapshot {
        let omega = control.omega_at(t);
        let (eps, epsp) = stepper.fields(t, omega, s, p);
        Snapshot {
            t,
            spin: s.to_vec(),
            polarization: p.to_vec(),
            signal: eps,
            stokes: epsp,
        }
    };

    let mut snap_cursor = 0usize;
    record(0, &s, &p, &mut signal_out, &mut stokes_out, &mut control_out, &stepper);
    while snap_cursor < snap_steps.len() && snap_steps[snap_cursor].0 == 0 {
        snapshots.push(take_snapshot(grid.time.t0, &s, &p, &stepper));
        snap_cursor += 1;
    }

    let mut step = 0usize;
    while step < nsteps {
        let t = grid.time.t(step);

        if can_skip && t >= skip_from && t < control.t_on() {
            let n_skip = ((control.t_on() - t) / dt).floor() as usize;
            if n_skip > 1 {
                // exact decay while the control is off and the inputs are dark
                let (eps_l, _) = stepper.fields(t, 0.0, &s, &p);
                let eps_l = eps_l[grid.nz];
                for j in 1..=n_skip {
                    let tj = grid.time.t(step + j);
                    let tau = tj - t;
                    if (step + j) % stride == 0 && signal_out.len() < out_grid.n {
                        signal_out.push(eps_l * (-g_store * tau).exp());
                        stokes_out.push(C64::new(0.0, 0.0));
                        control_out.push(0.0);
                    }
                    while snap_cursor < snap_steps.len() && snap_steps[snap_cursor].0 == step + j {
                        let fs = (-g0_store * tau).exp();
                        let fp = (-g_store * tau).exp();
                        let s2: Vec<C64> = s.iter().map(|&v| v * fs).collect();
                        let p2: Vec<C64> = p.iter().map(|&v| v * fp).collect();
                        snapshots.push(take_snapshot(tj, &s2, &p2, &stepper));
                        snap_cursor += 1;
                    }
                }
                let tau = n_skip as f64 * dt;
                let fs = (-g0_store * tau).exp();
                let fp = (-g_store * tau).exp();
                for k in 0..nn {
                    s[k] *= fs;
                    p[k] *= fp;
                }
                step += n_skip;
                continue;
            }
        }

        stepper.rhs(t, &s, &p, &mut k1s, &mut k1p);
        axpy(&mut tmp_s, &s, 0.5 * dt, &k1s);
        axpy(&mut tmp_p, &p, 0.5 * dt, &k1p);
        stepper.rhs(t + 0.5 * dt, &tmp_s, &tmp_p, &mut k2s, &mut k2p);
        axpy(&mut tmp_s, &s, 0.5 * dt, &k2s);
        axpy(&mut tmp_p, &p, 0.5 * dt, &k2p);
        stepper.rhs(t + 0.5 * dt, &tmp_s, &tmp_p, &mut k3s, &mut k3p);
        axpy(&mut tmp_s, &s, dt, &k3s);
        axpy(&mut tmp_p, &p, dt, &k3p);
        stepper.rhs(t + dt, &tmp_s, &tmp_p, &mut k4s, &mut k4p);
        let w = dt / 6.0;
        for k in 0..nn {
            s[k] += w * (k1s[k] + 2.0 * k2s[k] + 2.0 * k3s[k] + k4s[k]);
            p[k] += w * (k1p[k] + 2.0 * k2p[k] + 2.0 * k3p[k] + k4p[k]);
        }
        step += 1;

        record(step, &s, &p, &mut signal_out, &mut stokes_out, &mut control_out, &stepper);
        while snap_cursor < snap_steps.len() && snap_steps[snap_cursor].0 == step {
            snapshots.push(take_snapshot(grid.time.t(step), &s, &p, &stepper));
            snap_cursor += 1;
        }

        if step % 1024 == 0 {
            let worst = s
                .iter()
                .chain(p.iter())
                .map(|v| v.norm_sqr())
                .fold(0.0, f64::max);
            if !worst.is_finite() || worst.sqrt() > limit {
                return Err(Error::Instability(format!(
                    "state magnitude {:.3e} exceeded the blow-up limit at t = {:.3} μs",
                    worst.sqrt(),
                    grid.time.t(step)
                )));
            }
        }
    }

    Ok(Solution {
        out_grid,
        signal_out,
        stokes_out,
        control: control_out,
        snapshots,
    })
}
