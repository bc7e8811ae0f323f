//! Experiment runner: executes a validated [`ExperimentSpec`] and persists
//! CSV traces plus JSON summaries under one output directory. Outputs are
//! deterministic for a given spec; a manifest lists every file.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::analysis::{
    efficiency, fit_decay, od_sweep, pulse_energy, stokes_sensitivity, storage_pulse,
    EfficiencyReport,
};
use crate::config::{ExperimentKind, ExperimentSpec, Solver};
use crate::grid::{rel_l2, GridSpec, TimeGrid};
use crate::jointmode::{evolve_joint, JointMode, JointModeRecord};
use crate::kernels::{io_relation, kernels_box_limit, kernels_closed_form, kernels_numeric, Kernel, KernelSet};
use crate::mb_solver::{integrate, FwmMode, Snapshot, Solution, SolverOptions};
use crate::output::OutputWriter;
use crate::params::{breakdown_flag, derive, to_mhz};
use crate::pulses::{fwhm_for_reported_bandwidth, ControlSchedule, PulseSpec};
use crate::freq_solver::propagate_spectral;
use crate::{Error, Result};

/// Execute the experiment and return the artifact directory.
pub fn run(spec: &ExperimentSpec, out_dir: &Path, dump: bool, quiet: bool) -> Result<PathBuf> {
    let mut w = OutputWriter::new(out_dir, quiet)?;
    match spec.kind {
        ExperimentKind::SlowLight => slow_light(spec, dump, &mut w)?,
        ExperimentKind::StoredLight => stored_light(spec, dump, &mut w)?,
        ExperimentKind::KernelStudy => kernel_study(spec, &mut w)?,
        ExperimentKind::JointModeStudy => joint_mode_study(spec, &mut w)?,
        ExperimentKind::OdSweep => od_sweep_run(spec, &mut w)?,
        ExperimentKind::DecaySweep => decay_sweep(spec, &mut w)?,
        ExperimentKind::SensitivityStudy => sensitivity_study(spec, &mut w)?,
    }
    w.finish(echo(spec))
}

/// Spec echo for the manifest, with frequencies converted back to MHz.
fn echo(spec: &ExperimentSpec) -> serde_json::Value {
    serde_json::json!({
        "kind": spec.kind.name(),
        "medium": {
            "alpha0_l": spec.medium.alpha0_l,
            "gamma_mhz": to_mhz(spec.medium.gamma),
            "gamma0_mhz": to_mhz(spec.medium.gamma0),
            "delta_hf_mhz": to_mhz(spec.medium.delta_hf),
            "delta_mhz": to_mhz(spec.medium.delta),
            "omega_mhz": to_mhz(spec.medium.omega),
            "clebsch_ratio": spec.medium.clebsch_ratio,
        },
        "pulse": spec.pulse.as_ref().map(|p| serde_json::json!({
            "fwhm": p.fwhm,
            "center": p.center,
            "stokes_ratio": [p.stokes_ratio.re, p.stokes_ratio.im],
            "window": [p.window.0, p.window.1],
        })),
        "control": {
            "omega_write_mhz": to_mhz(spec.control.omega_write),
            "omega_read_mhz": to_mhz(spec.control.omega_read),
            "t_off": spec.control.t_off,
            "storage_time": spec.control.storage_time,
        },
        "grid": {
            "nz": spec.grid.nz,
            "t_start": spec.grid.time.t0,
            "t_end": spec.grid.time.t_end(),
            "dt": spec.grid.time.dt,
        },
    })
}

fn options(spec: &ExperimentSpec, dump: bool) -> SolverOptions {
    let mut opts = SolverOptions::default();
    opts.snapshot_times = spec.snapshot_times.clone();
    if dump {
        // dense z profiles across the whole run
        let g = &spec.grid.time;
        let n = 41;
        for k in 0..n {
            opts.snapshot_times
                .push(g.t0 + (g.t_end() - g.t0) * k as f64 / (n - 1) as f64);
        }
        opts.snapshot_times
            .sort_by(|a, b| a.partial_cmp(b).unwrap());
        opts.snapshot_times.dedup();
    }
    opts
}

fn emit_snapshots(w: &mut OutputWriter, label: &str, snaps: &[Snapshot]) -> Result<()> {
    for (i, s) in snaps.iter().enumerate() {
        let nz = s.spin.len() - 1;
        let z: Vec<f64> = (0..=nz).map(|k| k as f64 / nz as f64).collect();
        w.trace_csv(
            &format!("{label}_profile_{i:03}.csv"),
            &format!("z profiles of the state at t = {} (first column is z)", s.t),
            &z,
            &[
                ("spin", &s.spin),
                ("polarization", &s.polarization),
                ("signal", &s.signal),
                ("stokes", &s.stokes),
            ],
        )?;
    }
    Ok(())
}

fn emit_solution(w: &mut OutputWriter, label: &str, desc: &str, sol: &Solution) -> Result<()> {
    let times = sol.out_grid.times();
    let control: Vec<C64> = sol.control.iter().map(|&v| C64::new(v, 0.0)).collect();
    w.trace_csv(
        &format!("{label}.csv"),
        desc,
        &times,
        &[
            ("signal", &sol.signal_out),
            ("stokes", &sol.stokes_out),
            ("control", &control),
        ],
    )?;
    emit_snapshots(w, label, &sol.snapshots)
}

fn emit_inputs(w: &mut OutputWriter, grid: &TimeGrid, pulse: &PulseSpec) -> Result<()> {
    let (sig, stk) = pulse.sample_inputs(grid)?;
    w.trace_csv(
        "input.csv",
        "input envelopes at z = 0",
        &grid.times(),
        &[("signal", &sig), ("stokes", &stk)],
    )
}

/// Coarse grid for kernel-based overlays: convolution cost scales with the
/// square of the sample count, so these do not run on the solver step.
fn coarse_grid(grid: &TimeGrid) -> TimeGrid {
    let dt = ((grid.t_end() - grid.t0) / 2048.0).max(grid.dt);
    TimeGrid::span(grid.t0, grid.t_end(), dt)
}

fn slow_light(spec: &ExperimentSpec, dump: bool, w: &mut OutputWriter) -> Result<()> {
    let pulse = spec.pulse.as_ref().unwrap();
    emit_inputs(w, &spec.grid.time, pulse)?;
    match spec.solver {
        Solver::TimeDomain => {
            let opts = options(spec, dump);
            let sol = integrate(
                &spec.medium,
                &spec.grid,
                pulse,
                &spec.control,
                FwmMode::Full,
                &opts,
            )?;
            emit_solution(w, "output", "output-face traces, time-domain solver", &sol)?;
            if spec.eit_only_overlay {
                let eit = integrate(
                    &spec.medium,
                    &spec.grid,
                    pulse,
                    &spec.control,
                    FwmMode::EitOnly,
                    &opts,
                )?;
                emit_solution(w, "output_eit_only", "same run with the Stokes channel removed", &eit)?;
            }
        }
        Solver::Spectral => {
            let (sig, stk) = pulse.sample_inputs(&spec.grid.time)?;
            let out = propagate_spectral(&spec.medium, &spec.grid.time, &sig, &stk, 1.0, true)?;
            w.trace_csv(
                "output.csv",
                "output-face traces, transfer-matrix solver",
                &spec.grid.time.times(),
                &[("signal", &out.signal), ("stokes", &out.stokes)],
            )?;
            w.json(
                "summary.json",
                "spectral diagnostics",
                &serde_json::json!({ "edge_energy_fraction": out.edge_energy }),
            )?;
        }
        Solver::Kernels => {
            let g = coarse_grid(&spec.grid.time);
            let (sig, stk) = pulse.sample_inputs(&g)?;
            let set = kernels_numeric(&spec.medium, spec.kernel_z, &g, &spec.quadrature)?;
            let (so, ko) = io_relation(&set, &g, &sig, &stk)?;
            w.trace_csv(
                "output.csv",
                "output traces from the response-kernel convolutions",
                &g.times(),
                &[("signal", &so), ("stokes", &ko)],
            )?;
        }
        Solver::Joint => {
            let rec = evolve_joint(
                &spec.medium,
                pulse,
                &spec.control,
                spec.grid.nz,
                (spec.grid.time.t0, spec.grid.time.t_end()),
                JointMode::Full,
                &spec.snapshot_times,
            )?;
            emit_joint(w, "output", &rec)?;
        }
    }
    if spec.kernel_overlays {
        let g = coarse_grid(&spec.grid.time);
        let (sig, stk) = pulse.sample_inputs(&g)?;
        let numeric = kernels_numeric(&spec.medium, 1.0, &g, &spec.quadrature)?;
        let (ns, nk) = io_relation(&numeric, &g, &sig, &stk)?;
        w.trace_csv(
            "output_kernels.csv",
            "kernel-convolution prediction (exact quadrature)",
            &g.times(),
            &[("signal", &ns), ("stokes", &nk)],
        )?;
        let boxed = kernels_box_limit(&spec.medium, 1.0, &g)?;
        let (bs, bk) = io_relation(&boxed, &g, &sig, &stk)?;
        w.trace_csv(
            "output_box.csv",
            "kernel-convolution prediction in the wide-transparency (box) limit",
            &g.times(),
            &[("signal", &bs), ("stokes", &bk)],
        )?;
        // spin-wave profile predictions at the requested snapshot times
        for (i, &ts) in spec.snapshot_times.iter().enumerate() {
            let nz = spec.grid.nz;
            let mut closed = Vec::with_capacity(nz + 1);
            let mut boxed_s = Vec::with_capacity(nz + 1);
            for k in 0..=nz {
                let z = (k as f64 / nz as f64).max(1e-3);
                let cf = kernels_closed_form(&spec.medium, z, &g)?;
                closed.push(crate::kernels::spinwave_io(&cf, &g, &sig, &stk, &[ts])?[0]);
                let bx = kernels_box_limit(&spec.medium, z, &g)?;
                boxed_s.push(crate::kernels::spinwave_io(&bx, &g, &sig, &stk, &[ts])?[0]);
            }
            let z: Vec<f64> = (0..=nz).map(|k| k as f64 / nz as f64).collect();
            w.trace_csv(
                &format!("spinwave_prediction_{i:03}.csv"),
                &format!("kernel predictions of the spin-wave profile at t = {ts} (first column is z)"),
                &z,
                &[("closed_form", &closed), ("box_limit", &boxed_s)],
            )?;
        }
    }
    Ok(())
}

fn stored_light(spec: &ExperimentSpec, dump: bool, w: &mut OutputWriter) -> Result<()> {
    let pulse = spec.pulse.as_ref().unwrap();
    emit_inputs(w, &spec.grid.time, pulse)?;
    let opts = options(spec, dump);
    let sol = integrate(
        &spec.medium,
        &spec.grid,
        pulse,
        &spec.control,
        FwmMode::Full,
        &opts,
    )?;
    emit_solution(w, "output", "storage run, time-domain solver", &sol)?;

    let (sig_in, _) = pulse.sample_inputs(&spec.grid.time)?;
    let input_energy = pulse_energy(&spec.grid.time, &sig_in, (spec.grid.time.t0, spec.control.t_off))?;
    let report = |sol: &Solution, trace: &[C64]| -> Result<EfficiencyReport> {
        efficiency(
            &sol.out_grid,
            trace,
            input_energy,
            spec.control.t_off,
            spec.control.t_on(),
        )
    };
    let mut summary = serde_json::json!({
        "signal": report(&sol, &sol.signal_out)?,
        "stokes": report(&sol, &sol.stokes_out)?,
        "breakdown": breakdown_flag(&spec.medium)?,
    });
    if spec.eit_only_overlay {
        let eit = integrate(
            &spec.medium,
            &spec.grid,
            pulse,
            &spec.control,
            FwmMode::EitOnly,
            &opts,
        )?;
        emit_solution(w, "output_eit_only", "same run with the Stokes channel removed", &eit)?;
        summary["signal_eit_only"] = serde_json::to_value(report(&eit, &eit.signal_out)?)
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    w.json("summary.json", "per-channel energies and efficiencies", &summary)
}

fn emit_kernel(
    w: &mut OutputWriter,
    name: &str,
    grid: &TimeGrid,
    numeric: &Kernel,
    closed: &Kernel,
    boxed: &Kernel,
) -> Result<()> {
    w.trace_csv(
        &format!("kernel_{name}.csv"),
        &format!("{name}(z, t') response kernel: exact quadrature vs closed form vs box limit"),
        &grid.times(),
        &[
            ("numeric", &numeric.values),
            ("closed_form", &closed.values),
            ("box_limit", &boxed.values),
        ],
    )
}

#[derive(Serialize)]
struct ImpulseRow {
    kernel: String,
    variant: &'static str,
    location: f64,
    weight: (f64, f64),
}

fn kernel_study(spec: &ExperimentSpec, w: &mut OutputWriter) -> Result<()> {
    let g = &spec.grid.time;
    let z = spec.kernel_z;
    let numeric = kernels_numeric(&spec.medium, z, g, &spec.quadrature)?;
    let closed = kernels_closed_form(&spec.medium, z, g)?;
    let boxed = kernels_box_limit(&spec.medium, z, g)?;

    let pick = |s: &KernelSet, name: &str| -> Kernel {
        match name {
            "f1" => s.f1.clone(),
            "f2" => s.f2.clone(),
            "f3" => s.f3.clone(),
            "g2" => s.g2.clone(),
            "g3" => s.g3.clone(),
            "h1" => s.h1.clone(),
            "h2" => s.h2.clone(),
            "h3" => s.h3.clone(),
            _ => unreachable!(),
        }
    };
    let mut impulses = Vec::new();
    for name in ["f1", "f2", "f3", "g2", "g3", "h1", "h2", "h3"] {
        let (n, c, b) = (pick(&numeric, name), pick(&closed, name), pick(&boxed, name));
        for (variant, k) in [("numeric", &n), ("closed_form", &c), ("box_limit", &b)] {
            for &(location, weight) in &k.impulses {
                impulses.push(ImpulseRow {
                    kernel: name.to_string(),
                    variant,
                    location,
                    weight: (weight.re, weight.im),
                });
            }
        }
        emit_kernel(w, name, g, &n, &c, &b)?;
    }
    let d = derive(&spec.medium)?;
    w.json(
        "summary.json",
        "delta impulses carried by the kernels plus derived rates",
        &serde_json::json!({
            "z": z,
            "group_delay": d.group_delay * z,
            "delta_r": d.delta_r,
            "gamma_e": d.gamma_e,
            "impulses": impulses,
        }),
    )
}

fn emit_joint(w: &mut OutputWriter, label: &str, rec: &JointModeRecord) -> Result<()> {
    w.trace_csv(
        &format!("{label}.csv"),
        "joint-mode output: F and its signal/Stokes components",
        &rec.out_grid.times(),
        &[
            ("f", &rec.f_out),
            ("signal_component", &rec.signal_component),
            ("stokes_component", &rec.stokes_component),
            ("stokes", &rec.stokes_out),
        ],
    )
}

fn joint_mode_study(spec: &ExperimentSpec, w: &mut OutputWriter) -> Result<()> {
    let template = spec.pulse.as_ref().unwrap();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, &a) in spec.alpha0_l_values.iter().enumerate() {
        let mut p = spec.medium;
        p.alpha0_l = a;
        p = p.with_light_shift_cancelled();
        p.validate()?;
        let d = derive(&p)?;
        let fwhm = match spec.bandwidth_fraction {
            Some(frac) => fwhm_for_reported_bandwidth(frac * d.gamma_e),
            None => template.fwhm,
        };
        let pulse = PulseSpec::truncated_gaussian(
            fwhm,
            0.0,
            C64::new(1.0, 0.0),
            template.stokes_ratio,
        );
        let span = (-2.0 * fwhm - 1.0, d.group_delay + 3.0 * fwhm);
        let control = ControlSchedule::constant(p.omega);
        let full = evolve_joint(&p, &pulse, &control, spec.grid.nz, span, JointMode::Full, &[])?;
        let mut row = vec![a, fwhm, d.group_delay];
        if spec.homogeneous_overlay {
            let hom = evolve_joint(
                &p,
                &pulse,
                &control,
                spec.grid.nz,
                span,
                JointMode::Homogeneous,
                &[],
            )?;
            row.push(rel_l2(&full.f_out, &hom.f_out));
            w.trace_csv(
                &format!("joint_{i:02}.csv"),
                &format!("joint-mode F at the output face for alpha0L = {a}: full vs homogeneous"),
                &full.out_grid.times(),
                &[
                    ("f_full", &full.f_out),
                    ("f_homogeneous", &hom.f_out),
                    ("signal_component", &full.signal_component),
                    ("stokes_component", &full.stokes_component),
                ],
            )?;
        } else {
            row.push(f64::NAN);
            emit_joint(w, &format!("joint_{i:02}"), &full)?;
        }
        rows.push(row);
    }
    w.table_csv(
        "summary.csv",
        "per-depth joint-mode divergence between the full and homogeneous forms",
        &["alpha0_l", "fwhm", "group_delay", "divergence"],
        &rows,
    )
}

fn od_sweep_run(spec: &ExperimentSpec, w: &mut OutputWriter) -> Result<()> {
    let r = spec.stokes_ratios.first().copied().unwrap_or(C64::new(1.0, 0.0));
    let results = od_sweep(
        &spec.medium,
        &spec.od_points,
        spec.control.storage_time,
        r,
        &SolverOptions::default(),
    )?;
    let mut rows = Vec::new();
    for res in &results {
        w.trace_csv(
            &format!("od_{}.csv", res.point.alpha0_l),
            &format!(
                "storage traces at alpha0L = {} (Omega/(2pi) = {} MHz, {} us pulse)",
                res.point.alpha0_l, res.point.omega_mhz, res.point.fwhm
            ),
            &res.solution.out_grid.times(),
            &[
                ("signal", &res.solution.signal_out),
                ("stokes", &res.solution.stokes_out),
            ],
        )?;
        rows.push(vec![
            res.point.alpha0_l,
            res.point.omega_mhz,
            res.point.fwhm,
            res.signal.leak_energy,
            res.signal.retrieved_energy,
            res.signal.efficiency,
            res.stokes.leak_energy,
            res.stokes.retrieved_energy,
            res.stokes.efficiency,
            if res.breakdown.perturbation_valid { 0.0 } else { 1.0 },
        ]);
    }
    w.table_csv(
        "summary.csv",
        "per-depth energies: Stokes leakage gain and retrieval vs optical depth",
        &[
            "alpha0_l",
            "omega_mhz",
            "fwhm",
            "signal_leak",
            "signal_retrieved",
            "signal_efficiency",
            "stokes_leak",
            "stokes_retrieved",
            "stokes_efficiency",
            "breakdown",
        ],
        &rows,
    )
}

fn decay_sweep(spec: &ExperimentSpec, w: &mut OutputWriter) -> Result<()> {
    let template = spec.pulse.as_ref().unwrap();
    let d = derive(&spec.medium)?;
    let fwhm = template.fwhm;
    let pulse = storage_pulse(fwhm, 0.0, template.stokes_ratio);
    let dt = 0.9 * GridSpec::max_dt(&spec.medium);

    // the zero-storage run normalizes the sweep
    let mut times: Vec<f64> = spec.storage_times.clone();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if times[0] > 0.0 {
        times.insert(0, 0.0);
    }

    let mut rows = Vec::new();
    let mut energies: Vec<(f64, f64, f64)> = Vec::new();
    for &st in &times {
        let control = ControlSchedule::instantaneous(spec.medium.omega, spec.medium.omega, 0.0, st);
        let grid = GridSpec::new(
            spec.grid.nz,
            TimeGrid::span(-3.0 * fwhm - 1.0, st + d.group_delay + 3.0 * fwhm, dt),
        );
        let sol = integrate(
            &spec.medium,
            &grid,
            &pulse,
            &control,
            FwmMode::Full,
            &SolverOptions::default(),
        )?;
        let sig = pulse_energy(&sol.out_grid, &sol.signal_out, (control.t_on(), sol.out_grid.t_end()))?;
        let stk = pulse_energy(&sol.out_grid, &sol.stokes_out, (control.t_on(), sol.out_grid.t_end()))?;
        energies.push((st, sig, stk));
    }
    let (_, sig0, stk0) = energies[0];
    for &(st, sig, stk) in &energies {
        rows.push(vec![st, sig, stk, sig / sig0, stk / stk0]);
    }
    w.table_csv(
        "decay.csv",
        "retrieved energies vs storage time, normalized to the zero-storage run",
        &[
            "storage_time",
            "signal_energy",
            "stokes_energy",
            "signal_normalized",
            "stokes_normalized",
        ],
        &rows,
    )?;

    let fit_channel = |pickk: fn(&(f64, f64, f64)) -> f64| -> Result<crate::analysis::DecayFit> {
        let ts: Vec<f64> = energies.iter().map(|e| e.0).collect();
        let es: Vec<f64> = energies.iter().map(pickk).collect();
        fit_decay(&ts, &es)
    };
    w.json(
        "summary.json",
        "exponential decay fits of the retrieved energies",
        &serde_json::json!({
            "signal_fit": fit_channel(|e| e.1)?,
            "stokes_fit": fit_channel(|e| e.2)?,
            "expected_tau": 0.5 / spec.medium.gamma0,
        }),
    )
}

fn sensitivity_study(spec: &ExperimentSpec, w: &mut OutputWriter) -> Result<()> {
    let pulse = spec.pulse.as_ref().unwrap();
    let opts = SolverOptions::default();
    let table = stokes_sensitivity(
        &spec.medium,
        &spec.grid,
        pulse,
        &spec.control,
        &spec.stokes_ratios,
        &opts,
    )?;
    let rows: Vec<Vec<f64>> = table
        .iter()
        .map(|r| {
            vec![
                r.stokes_ratio.0,
                r.stokes_ratio.1,
                r.signal.leak,
                r.signal.retrieved,
                r.stokes.leak,
                r.stokes.retrieved,
            ]
        })
        .collect();
    w.table_csv(
        "sensitivity.csv",
        "per-seed deviations from the reference run, split at the storage window",
        &[
            "r_re",
            "r_im",
            "signal_leak_dev",
            "signal_retrieved_dev",
            "stokes_leak_dev",
            "stokes_retrieved_dev",
        ],
        &rows,
    )?;
    // traces for each seed so the overlays can be plotted directly
    for (i, &r) in spec.stokes_ratios.iter().enumerate() {
        let mut p = pulse.clone();
        p.stokes_ratio = r;
        let sol = integrate(&spec.medium, &spec.grid, &p, &spec.control, FwmMode::Full, &opts)?;
        emit_solution(
            w,
            &format!("output_r{i:02}"),
            &format!("storage run with Stokes seed ratio {r}"),
            &sol,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentSpec;
    use tempfile::tempdir;

    // soft parameters keep the time-domain runs fast in unit tests
    fn soft_medium() -> &'static str {
        r#"
[medium]
alpha0_l = 20.0
gamma_mhz = 20.0
gamma0_mhz = 1e-3
delta_hf_mhz = 6834.7
omega_mhz = 5.0
"#
    }

    fn run_spec(text: &str) -> Vec<String> {
        let spec = ExperimentSpec::from_toml(text).unwrap();
        let dir = tempdir().unwrap();
        let out = run(&spec, dir.path(), false, true).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
                .unwrap();
        let names: Vec<String> = manifest["files"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["name"].as_str().unwrap().to_string())
            .collect();
        // the manifest must cover exactly what exists on disk
        let mut on_disk: Vec<String> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        on_disk.sort();
        let mut listed = names.clone();
        listed.sort();
        assert_eq!(on_disk, listed);
        names
    }

    #[test]
    fn stored_light_emits_traces_and_summary() {
        let text = format!(
            r#"
[experiment]
kind = "stored_light"
{}
[pulse]
fwhm = 6.0

[control]
storage_time = 10.0
"#,
            soft_medium()
        );
        let names = run_spec(&text);
        for f in ["input.csv", "output.csv", "summary.json"] {
            assert!(names.iter().any(|n| n == f), "{names:?}");
        }
    }

    #[test]
    fn decay_sweep_normalizes_to_zero_storage() {
        let text = format!(
            r#"
[experiment]
kind = "decay_sweep"
storage_times = [5.0, 10.0, 15.0, 20.0]
{}
[pulse]
fwhm = 6.0
"#,
            soft_medium()
        );
        let spec = ExperimentSpec::from_toml(&text).unwrap();
        let dir = tempdir().unwrap();
        let out = run(&spec, dir.path(), false, true).unwrap();
        let decay = std::fs::read_to_string(out.join("decay.csv")).unwrap();
        let first_row = decay.lines().nth(1).unwrap();
        let cells: Vec<f64> = first_row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cells[0], 0.0);
        assert_eq!(cells[3], 1.0);
        assert_eq!(cells[4], 1.0);
    }

    #[test]
    fn kernel_study_emits_every_kernel() {
        let text = format!(
            r#"
[experiment]
kind = "kernel_study"
quadrature_bandwidth_mhz = 40.0
quadrature_points = 16385
{}
[grid]
t_start = -2.0
t_end = 15.0
dt = 0.05
"#,
            soft_medium()
        );
        let names = run_spec(&text);
        for k in ["f1", "f2", "f3", "g2", "g3", "h1", "h2", "h3"] {
            assert!(names.iter().any(|n| n == &format!("kernel_{k}.csv")), "{names:?}");
        }
    }

    #[test]
    fn joint_study_divergence_grows_with_depth() {
        let text = r#"
[experiment]
kind = "joint_mode_study"
homogeneous_overlay = true
alpha0_l_values = [10.0, 50.0]
bandwidth_fraction = 0.05

[medium]
alpha0_l = 10.0
gamma_mhz = 30.0
delta_hf_mhz = 6834.7
omega_mhz = 8.0

[pulse]
fwhm = 10.0
stokes_ratio = [0.0, 0.0]
"#;
        let spec = ExperimentSpec::from_toml(text).unwrap();
        let dir = tempdir().unwrap();
        let out = run(&spec, dir.path(), false, true).unwrap();
        let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
        let div: Vec<f64> = summary
            .lines()
            .skip(1)
            .map(|l| l.split(',').last().unwrap().parse().unwrap())
            .collect();
        assert_eq!(div.len(), 2);
        assert!(div[1] > div[0], "divergence {div:?}");
    }
}
