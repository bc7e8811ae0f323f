//! The adiabatic-elimination picture: joint field F = ε − i(Γ/Δ_hf)ε′*,
//! its slow propagation, and the spin wave driven by it.
//!
//! With the light shift cancelled (δ = δ_s) and the polarization eliminated,
//! the reduced system is
//!
//!   (∂t + v_g ∂z) F = i·Δ_R·ε′*,
//!   ∂t S  = −(Γ₀ + Ω²/Γ)·S − g√N·(Ω/Γ)·F,
//!   ∂z ε′* = −i·g√N·(Ω/Δ_hf)·S,
//!
//! where v_g = 2Ω²/(α₀γ). The homogeneous variant zeroes the right side of
//! the F equation, which then propagates without distortion at v_g.
//!
//! The advection is solved along characteristics with the time step locked
//! to one z cell (dt = dz/v_g), so a constant-control homogeneous run shifts
//! F by exactly one node per step and shape preservation is exact.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::grid::TimeGrid;
use crate::params::{derive, DerivedRates, MediumParams};
use crate::pulses::{ControlSchedule, PulseSpec};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointMode {
    /// Keep the Stokes source term i·Δ_R·ε′*.
    Full,
    /// Pure slow-light propagation of F.
    Homogeneous,
}

/// z profiles of the reduced state at one instant.
#[derive(Debug, Clone)]
pub struct JointSnapshot {
    pub t: f64,
    pub f: Vec<C64>,
    pub spin: Vec<C64>,
    pub stokes: Vec<C64>,
}

/// Output-face traces of a joint-mode run. The two stored components sum to
/// F exactly: `signal_component[k] + stokes_component[k] == f_out[k]`.
#[derive(Debug, Clone)]
pub struct JointModeRecord {
    pub out_grid: TimeGrid,
    /// F(L,t)
    pub f_out: Vec<C64>,
    /// ε(L,t) = F + i(Γ/Δ_hf)ε′*
    pub signal_component: Vec<C64>,
    /// −i(Γ/Δ_hf)·ε′*(L,t)
    pub stokes_component: Vec<C64>,
    /// ε′*(L,t)
    pub stokes_out: Vec<C64>,
    pub snapshots: Vec<JointSnapshot>,
}

/// Adiabatic polarization P ≈ i(Ω/Γ)S + i(g√N/Γ)ε, elementwise.
pub fn adiabatic_p(
    spin: &[C64],
    signal: &[C64],
    params: &MediumParams,
    d: &DerivedRates,
) -> Vec<C64> {
    let i = C64::new(0.0, 1.0);
    spin.iter()
        .zip(signal)
        .map(|(&s, &e)| i * params.omega / d.big_gamma * s + i * d.gn / d.big_gamma * e)
        .collect()
}

/// Advance one spin sample by dt with RK4, interpolating the drive F
/// linearly between its endpoint values.
fn spin_step(s: C64, f0: C64, f1: C64, rate: C64, drive: C64, dt: f64, substeps: usize) -> C64 {
    let h = dt / substeps as f64;
    let mut s = s;
    for m in 0..substeps {
        let a0 = m as f64 / substeps as f64;
        let f_at = |frac: f64| {
            let a = a0 + frac / substeps as f64;
            f0 * (1.0 - a) + f1 * a
        };
        let rhs = |s: C64, f: C64| -rate * s + drive * f;
        let k1 = rhs(s, f_at(0.0));
        let k2 = rhs(s + 0.5 * h * k1, f_at(0.5));
        let k3 = rhs(s + 0.5 * h * k2, f_at(0.5));
        let k4 = rhs(s + h * k3, f_at(1.0));
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    s
}

/// Integrate ∂t S = −(Γ₀ + Ω²/Γ)S − g√N(Ω/Γ)F for one z location, given the
/// sampled drive F(t) and an initial spin value.
pub fn spinwave_from_joint(
    grid: &TimeGrid,
    f: &[C64],
    s0: C64,
    params: &MediumParams,
    d: &DerivedRates,
) -> Result<Vec<C64>> {
    if f.len() != grid.n {
        return Err(Error::GridMismatch(
            "drive trace must match the time grid".into(),
        ));
    }
    let rate = d.big_gamma0 + params.omega * params.omega / d.big_gamma;
    let drive = -d.gn * params.omega / d.big_gamma;
    let substeps = ((grid.dt * rate.norm() / 0.05).ceil() as usize).max(1);
    let mut out = Vec::with_capacity(grid.n);
    let mut s = s0;
    out.push(s);
    for k in 1..grid.n {
        s = spin_step(s, f[k - 1], f[k], rate, drive, grid.dt, substeps);
        out.push(s);
    }
    Ok(out)
}

/// Integrate the reduced joint-mode system over `t_span` with `nz` z cells.
/// Requires a constant control (slow-light schedule) and δ = δ_s.
pub fn evolve_joint(
    params: &MediumParams,
    pulse: &PulseSpec,
    control: &ControlSchedule,
    nz: usize,
    t_span: (f64, f64),
    mode: JointMode,
    snapshot_times: &[f64],
) -> Result<JointModeRecord> {
    params.validate()?;
    pulse.validate()?;
    if nz < 2 {
        return Err(Error::invalid("nz", "need at least 2 z cells"));
    }
    if control.storage_time != 0.0 || control.omega_write != control.omega_read {
        return Err(Error::Unsupported(
            "the joint-mode picture is implemented for a constant control".into(),
        ));
    }
    if (control.omega_write - params.omega).abs() > 1e-9 * params.omega.max(1.0) {
        return Err(Error::GridMismatch(
            "the control level must equal the reference Rabi frequency".into(),
        ));
    }
    let d = derive(params)?;
    if d.degenerate {
        return Err(Error::Unsupported(
            "the joint-mode picture requires a nonzero control".into(),
        ));
    }
    let shift_residual = (params.delta - d.light_shift).abs();
    if shift_residual > 1e-6 * params.gamma {
        return Err(Error::invalid(
            "delta",
            "the joint-mode equations assume the light shift is cancelled (delta = delta_s)",
        ));
    }

    let dz = 1.0 / nz as f64;
    let dt = dz / d.v_g;
    let n_steps = ((t_span.1 - t_span.0) / dt).ceil() as usize;
    let out_grid = TimeGrid {
        t0: t_span.0,
        dt,
        n: n_steps + 1,
    };

    let i = C64::new(0.0, 1.0);
    let gamma_ratio = i * d.big_gamma / params.delta_hf;
    let f_in = |t: f64| pulse.signal_at(t) - gamma_ratio * pulse.stokes_at(t);
    let rate = d.big_gamma0 + params.omega * params.omega / d.big_gamma;
    let drive = -d.gn * params.omega / d.big_gamma;
    let substeps = ((dt * rate.norm() / 0.05).ceil() as usize).max(1);
    let slave = -i * d.gn * params.omega / params.delta_hf * (0.5 * dz);

    let epsp_of = |t: f64, s: &[C64]| -> Vec<C64> {
        let mut out = Vec::with_capacity(nz + 1);
        let mut acc = pulse.stokes_at(t);
        out.push(acc);
        for k in 1..=nz {
            acc += slave * (s[k - 1] + s[k]);
            out.push(acc);
        }
        out
    };

    let mut f = vec![C64::new(0.0, 0.0); nz + 1];
    let mut s = vec![C64::new(0.0, 0.0); nz + 1];
    f[0] = f_in(t_span.0);

    let mut record = JointModeRecord {
        out_grid,
        f_out: Vec::with_capacity(out_grid.n),
        signal_component: Vec::with_capacity(out_grid.n),
        stokes_component: Vec::with_capacity(out_grid.n),
        stokes_out: Vec::with_capacity(out_grid.n),
        snapshots: Vec::new(),
    };
    let mut snap_steps: Vec<(usize, f64)> = snapshot_times
        .iter()
        .map(|&ts| {
            let idx = ((ts - t_span.0) / dt).round() as i64;
            (idx.clamp(0, n_steps as i64) as usize, ts)
        })
        .collect();
    snap_steps.sort_by_key(|&(k, _)| k);
    let mut snap_cursor = 0usize;

    let push_output = |step: usize, f: &[C64], s: &[C64], record: &mut JointModeRecord,
                           snap_cursor: &mut usize| {
        let t = out_grid.t(step);
        let epsp = epsp_of(t, s);
        let stokes_part = -gamma_ratio * epsp[nz];
        record.f_out.push(f[nz]);
        record.stokes_component.push(stokes_part);
        record.signal_component.push(f[nz] - stokes_part);
        record.stokes_out.push(epsp[nz]);
        while *snap_cursor < snap_steps.len() && snap_steps[*snap_cursor].0 == step {
            record.snapshots.push(JointSnapshot {
                t,
                f: f.to_vec(),
                spin: s.to_vec(),
                stokes: epsp,
            });
            *snap_cursor += 1;
            break;
        }
    };
    push_output(0, &f, &s, &mut record, &mut snap_cursor);

    let mut s_new = vec![C64::new(0.0, 0.0); nz + 1];
    let mut f_new = vec![C64::new(0.0, 0.0); nz + 1];
    for step in 1..=n_steps {
        let t0 = out_grid.t(step - 1);
        let t1 = out_grid.t(step);
        let epsp_old = epsp_of(t0, &s);

        // characteristic shift by one cell plus an explicit source predictor
        f_new[0] = f_in(t1);
        for k in 1..=nz {
            f_new[k] = f[k - 1]
                + if mode == JointMode::Full {
                    dt * i * d.delta_r * epsp_old[k - 1]
                } else {
                    C64::new(0.0, 0.0)
                };
        }

        // spin advance sampling F along each node's characteristic endpoint
        for k in 0..=nz {
            let f0k = f[k];
            let f1k = f_new[k];
            s_new[k] = spin_step(s[k], f0k, f1k, rate, drive, dt, substeps);
        }

        if mode == JointMode::Full {
            // trapezoid correction of the source along the characteristic
            let epsp_new = epsp_of(t1, &s_new);
            for k in 1..=nz {
                f_new[k] = f[k - 1]
                    + 0.5 * dt * i * d.delta_r * (epsp_old[k - 1] + epsp_new[k]);
            }
        }

        std::mem::swap(&mut f, &mut f_new);
        std::mem::swap(&mut s, &mut s_new);
        push_output(step, &f, &s, &mut record, &mut snap_cursor);

        if step % 256 == 0 {
            let worst = f.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
            if !worst.is_finite() || worst.sqrt() > 1e6 * pulse.amplitude.norm().max(1e-30) {
                return Err(Error::Instability(format!(
                    "joint field magnitude {:.3e} exceeded the blow-up limit at t = {:.3} μs",
                    worst.sqrt(),
                    out_grid.t(step)
                )));
            }
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{rel_l2, GridSpec};
    use crate::mb_solver::{integrate, FwmMode, SolverOptions};

    fn params(alpha0_l: f64, gamma_mhz: f64, omega_mhz: f64, delta_hf_mhz: f64) -> MediumParams {
        MediumParams::from_mhz(alpha0_l, gamma_mhz, 270e-6, delta_hf_mhz, 0.0, omega_mhz)
            .unwrap()
            .with_light_shift_cancelled()
    }

    #[test]
    fn adiabatic_p_limits() {
        let p = params(20.0, 150.0, 10.0, 6835.0);
        let d = derive(&p).unwrap();
        let zero = vec![C64::new(0.0, 0.0); 3];
        assert!(adiabatic_p(&zero, &zero, &p, &d)
            .iter()
            .all(|v| *v == C64::new(0.0, 0.0)));

        let mut dark = p;
        dark.omega = 0.0;
        dark.delta = 0.0;
        let dd = derive(&dark).unwrap();
        let e = vec![C64::new(1.0, 0.0)];
        let out = adiabatic_p(&zero[..1], &e, &dark, &dd);
        let expect = C64::new(0.0, 1.0) * dd.gn / dd.big_gamma;
        assert!((out[0] - expect).norm() < 1e-14);
    }

    #[test]
    fn homogeneous_mode_is_an_exact_delay() {
        let p = params(25.0, 150.0, 8.0, 6835.0);
        let d = derive(&p).unwrap();
        let pulse =
            PulseSpec::truncated_gaussian(10.0, -15.0, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let rec = evolve_joint(
            &p,
            &pulse,
            &ControlSchedule::constant(p.omega),
            64,
            (-40.0, 30.0),
            JointMode::Homogeneous,
            &[],
        )
        .unwrap();
        let i = C64::new(0.0, 1.0);
        let gamma_ratio = i * d.big_gamma / p.delta_hf;
        for k in 0..rec.out_grid.n {
            let t = rec.out_grid.t(k);
            let expect = pulse.signal_at(t - d.group_delay)
                - gamma_ratio * pulse.stokes_at(t - d.group_delay);
            assert!(
                (rec.f_out[k] - expect).norm() < 1e-12,
                "t = {t}: {} vs {expect}",
                rec.f_out[k]
            );
        }
    }

    #[test]
    fn components_sum_to_the_joint_field() {
        let p = params(25.0, 150.0, 8.0, 6835.0);
        let pulse =
            PulseSpec::truncated_gaussian(10.0, -15.0, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let rec = evolve_joint(
            &p,
            &pulse,
            &ControlSchedule::constant(p.omega),
            48,
            (-40.0, 30.0),
            JointMode::Full,
            &[],
        )
        .unwrap();
        for k in 0..rec.out_grid.n {
            let sum = rec.signal_component[k] + rec.stokes_component[k];
            assert!((sum - rec.f_out[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn vanishing_fwm_coupling_makes_modes_agree() {
        let p = params(25.0, 150.0, 8.0, 1e9);
        let pulse =
            PulseSpec::truncated_gaussian(10.0, -15.0, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let ctl = ControlSchedule::constant(p.omega);
        let full = evolve_joint(&p, &pulse, &ctl, 48, (-40.0, 30.0), JointMode::Full, &[]).unwrap();
        let hom =
            evolve_joint(&p, &pulse, &ctl, 48, (-40.0, 30.0), JointMode::Homogeneous, &[]).unwrap();
        assert!(rel_l2(&full.f_out, &hom.f_out) < 1e-4);
    }

    #[test]
    fn free_spin_decays_at_the_dressed_rate() {
        let p = params(25.0, 150.0, 8.0, 6835.0);
        let d = derive(&p).unwrap();
        let grid = TimeGrid::span(0.0, 2.0, 0.01);
        let f = vec![C64::new(0.0, 0.0); grid.n];
        let s0 = C64::new(1.0, 0.0);
        let s = spinwave_from_joint(&grid, &f, s0, &p, &d).unwrap();
        let rate = d.big_gamma0 + p.omega * p.omega / d.big_gamma;
        let expect = s0 * (-rate * 2.0).exp();
        assert!((s[grid.n - 1] - expect).norm() < 1e-6 * expect.norm());
    }

    #[test]
    fn light_shift_must_be_cancelled() {
        let mut p = params(25.0, 150.0, 8.0, 6835.0);
        p.delta = 0.0;
        let pulse =
            PulseSpec::truncated_gaussian(10.0, -15.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let err = evolve_joint(
            &p,
            &pulse,
            &ControlSchedule::constant(p.omega),
            32,
            (-40.0, 30.0),
            JointMode::Full,
            &[],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }));
    }

    #[test]
    fn joint_picture_matches_the_time_domain_solver() {
        // moderate depth so both solvers are quick; compare ε(L,t). The joint
        // picture drops the finite EIT linewidth, so the pulse bandwidth has
        // to sit well inside the transparency window for the two to agree.
        let p = params(20.0, 50.0, 5.0, 6835.0);
        let pulse =
            PulseSpec::truncated_gaussian(16.0, -20.0, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let ctl = ControlSchedule::constant(p.omega);
        let rec =
            evolve_joint(&p, &pulse, &ctl, 64, (-55.0, 25.0), JointMode::Full, &[]).unwrap();

        let grid = GridSpec::new(48, TimeGrid::span(-55.0, 25.0, 2.5e-4));
        let mb = integrate(&p, &grid, &pulse, &ctl, FwmMode::Full, &SolverOptions::default())
            .unwrap();
        let mb_on_joint: Vec<C64> = rec
            .out_grid
            .times()
            .iter()
            .map(|&t| mb.out_grid.interp(&mb.signal_out, t))
            .collect();
        let err = rel_l2(&rec.signal_component, &mb_on_joint);
        assert!(err < 0.05, "relative error {err}");
    }
}
