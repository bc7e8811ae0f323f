//! TOML experiment specifications.
//!
//! All frequencies in the file are ordinary frequencies in MHz; times are in
//! μs; amplitudes are dimensionless. Sections: `[medium]`, `[pulse]`,
//! `[control]`, `[grid]`, `[experiment]`. The experiment kind decides which
//! sections are required; anything optional falls back to documented
//! defaults derived from the physics (grid step from the fastest rate, time
//! span from the pulse and the storage window).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analysis::OdPoint;
use crate::grid::{GridSpec, TimeGrid, DEFAULT_NZ};
use crate::kernels::QuadratureSpec;
use crate::params::{derive, mhz, MediumParams, DEFAULT_CLEBSCH_RATIO};
use crate::pulses::{ControlSchedule, PulseSpec, SwitchModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SlowLight,
    StoredLight,
    KernelStudy,
    JointModeStudy,
    OdSweep,
    DecaySweep,
    SensitivityStudy,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SlowLight => "slow_light",
            ExperimentKind::StoredLight => "stored_light",
            ExperimentKind::KernelStudy => "kernel_study",
            ExperimentKind::JointModeStudy => "joint_mode_study",
            ExperimentKind::OdSweep => "od_sweep",
            ExperimentKind::DecaySweep => "decay_sweep",
            ExperimentKind::SensitivityStudy => "sensitivity_study",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    TimeDomain,
    Spectral,
    Kernels,
    Joint,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    experiment: ExperimentSection,
    medium: Option<MediumSection>,
    pulse: Option<PulseSection>,
    control: Option<ControlSection>,
    grid: Option<GridSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    kind: ExperimentKind,
    solver: Option<Solver>,
    #[serde(default)]
    eit_only_overlay: bool,
    #[serde(default)]
    homogeneous_overlay: bool,
    /// decay_sweep: dark intervals to scan, μs.
    storage_times: Option<Vec<f64>>,
    /// od_sweep: (alpha0_l, omega_mhz, fwhm) rows.
    od_points: Option<Vec<OdPointRow>>,
    /// sensitivity_study: Stokes seed ratios as [re, im]; first is reference.
    stokes_ratios: Option<Vec<[f64; 2]>>,
    /// kernel_study: propagation distance in units of L.
    kernel_z: Option<f64>,
    quadrature_bandwidth_mhz: Option<f64>,
    quadrature_points: Option<usize>,
    /// slow_light: also emit kernel-based predictions of the same run.
    #[serde(default)]
    kernel_overlays: bool,
    /// Times at which to record full z profiles.
    snapshot_times: Option<Vec<f64>>,
    /// joint_mode_study: optical depths to scan (default: the medium's).
    alpha0_l_values: Option<Vec<f64>>,
    /// joint_mode_study: pulse bandwidth as a fraction of the EIT linewidth;
    /// overrides the pulse FWHM per depth.
    bandwidth_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct OdPointRow {
    alpha0_l: f64,
    omega_mhz: f64,
    fwhm: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediumSection {
    alpha0_l: f64,
    gamma_mhz: f64,
    #[serde(default)]
    gamma0_mhz: f64,
    delta_hf_mhz: f64,
    omega_mhz: f64,
    /// Explicit two-photon detuning; omitted means δ = δ_s (light shift
    /// cancelled), which is how the storage experiments are tuned.
    delta_mhz: Option<f64>,
    clebsch_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct PulseSection {
    fwhm: f64,
    /// Peak time; omitted means one FWHM before the control switch-off.
    center: Option<f64>,
    #[serde(default = "one")]
    amplitude: f64,
    /// Seed ratio ε′*(0,t)/ε(0,t) as [re, im].
    stokes_ratio: Option<[f64; 2]>,
    /// Truncation window; omitted means ±2 FWHM around the peak, cut at the
    /// switch-off when the run stores.
    window: Option<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlSection {
    /// Write-stage Rabi frequency; omitted means the medium's Ω.
    omega_write_mhz: Option<f64>,
    omega_read_mhz: Option<f64>,
    #[serde(default)]
    t_off: f64,
    #[serde(default)]
    storage_time: f64,
    /// Linear switch ramp duration, μs; omitted means instantaneous.
    ramp: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    nz: Option<usize>,
    t_start: Option<f64>,
    t_end: Option<f64>,
    dt: Option<f64>,
}

/// A validated experiment: physical parameters in internal units plus the
/// run plan. Constructed only through [`ExperimentSpec::from_toml`] or the
/// preset table.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub solver: Solver,
    pub eit_only_overlay: bool,
    pub homogeneous_overlay: bool,
    pub medium: MediumParams,
    pub pulse: Option<PulseSpec>,
    pub control: ControlSchedule,
    pub grid: GridSpec,
    pub storage_times: Vec<f64>,
    pub od_points: Vec<OdPoint>,
    pub stokes_ratios: Vec<C64>,
    pub kernel_z: f64,
    pub quadrature: QuadratureSpec,
    pub kernel_overlays: bool,
    pub snapshot_times: Vec<f64>,
    pub alpha0_l_values: Vec<f64>,
    pub bandwidth_fraction: Option<f64>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text)
            .map_err(|e| Error::Validation(format!("spec parse error: {e}")))?;
        build(raw)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }
}

/// Sections/fields each kind needs beyond [medium].
fn required_fields(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::SlowLight | ExperimentKind::JointModeStudy => &["pulse"],
        ExperimentKind::StoredLight => &["pulse", "control"],
        ExperimentKind::KernelStudy => &[],
        ExperimentKind::OdSweep => &["experiment.od_points"],
        ExperimentKind::DecaySweep => &["pulse", "experiment.storage_times"],
        ExperimentKind::SensitivityStudy => &["pulse", "control", "experiment.stokes_ratios"],
    }
}

fn build(raw: RawSpec) -> Result<ExperimentSpec> {
    let kind = raw.experiment.kind;

    // collect every missing requirement so one round trip fixes the spec
    let mut missing: Vec<&str> = Vec::new();
    if raw.medium.is_none() {
        missing.push("medium");
    }
    for &req in required_fields(kind) {
        let present = match req {
            "pulse" => raw.pulse.is_some(),
            "control" => raw.control.is_some(),
            "experiment.od_points" => raw.experiment.od_points.is_some(),
            "experiment.storage_times" => raw.experiment.storage_times.is_some(),
            "experiment.stokes_ratios" => raw.experiment.stokes_ratios.is_some(),
            _ => unreachable!(),
        };
        if !present {
            missing.push(req);
        }
    }
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "{} spec is missing: {}",
            kind.name(),
            missing.join(", ")
        )));
    }

    let m = raw.medium.unwrap();
    let mut medium = MediumParams::from_mhz(
        m.alpha0_l,
        m.gamma_mhz,
        m.gamma0_mhz,
        m.delta_hf_mhz,
        m.delta_mhz.unwrap_or(0.0),
        m.omega_mhz,
    )?;
    medium.clebsch_ratio = m.clebsch_ratio.unwrap_or(DEFAULT_CLEBSCH_RATIO);
    if m.delta_mhz.is_none() {
        medium = medium.with_light_shift_cancelled();
    }
    medium.validate()?;
    let d = derive(&medium)?;

    let control = match raw.control {
        Some(c) => {
            if c.storage_time < 0.0 {
                return Err(Error::Validation(
                    "control.storage_time must be >= 0".into(),
                ));
            }
            ControlSchedule {
                omega_write: c.omega_write_mhz.map(mhz).unwrap_or(medium.omega),
                omega_read: c.omega_read_mhz.map(mhz).unwrap_or(medium.omega),
                t_off: c.t_off,
                storage_time: c.storage_time,
                switch_model: match c.ramp {
                    Some(r) if r > 0.0 => SwitchModel::LinearRamp(r),
                    Some(_) | None => SwitchModel::Instantaneous,
                },
            }
        }
        None => ControlSchedule::constant(medium.omega),
    };
    let stores = control.storage_time > 0.0;

    let pulse = match raw.pulse {
        Some(p) => {
            if !(p.fwhm > 0.0) {
                return Err(Error::Validation("pulse.fwhm must be > 0".into()));
            }
            let r = p.stokes_ratio.unwrap_or([1.0, 0.0]);
            let center = p.center.unwrap_or(control.t_off - p.fwhm);
            let mut spec = PulseSpec::truncated_gaussian(
                p.fwhm,
                center,
                C64::new(p.amplitude, 0.0),
                C64::new(r[0], r[1]),
            );
            if let Some([a, b]) = p.window {
                spec = spec.with_window(a, b);
            } else if stores {
                // the input must be dark once the control switches off
                spec = spec.with_window(center - 2.0 * p.fwhm, control.t_off.min(center + 2.0 * p.fwhm));
            }
            spec.validate()?;
            Some(spec)
        }
        None => None,
    };

    // default time span: from well before the input to after the retrieved
    // (or just delayed) pulse has left the medium
    let g = raw.grid;
    let (t_start, t_end) = {
        let (ps, pe) = pulse.as_ref().map(|p| p.window).unwrap_or((-1.0, 1.0));
        let start = g.and_then(|g| g.t_start).unwrap_or(ps - 1.0);
        let end = g
            .and_then(|g| g.t_end)
            .unwrap_or(control.t_on() + d.group_delay + (pe - ps) + 1.0);
        if !(end > start) {
            return Err(Error::Validation("grid.t_end must exceed grid.t_start".into()));
        }
        (start, end)
    };
    let dt = g.and_then(|g| g.dt).unwrap_or(0.9 * GridSpec::max_dt(&medium));
    if !(dt > 0.0) {
        return Err(Error::Validation("grid.dt must be > 0".into()));
    }
    let nz = g.and_then(|g| g.nz).unwrap_or(DEFAULT_NZ);
    let grid = GridSpec::new(nz, TimeGrid::span(t_start, t_end, dt));

    let storage_times = raw.experiment.storage_times.unwrap_or_default();
    if kind == ExperimentKind::DecaySweep {
        if storage_times.len() < 4 {
            return Err(Error::Validation(
                "decay_sweep needs at least 4 storage_times".into(),
            ));
        }
        if storage_times.iter().any(|&t| t < 0.0) {
            return Err(Error::Validation("storage_times must be >= 0".into()));
        }
    }

    let od_points: Vec<OdPoint> = raw
        .experiment
        .od_points
        .unwrap_or_default()
        .iter()
        .map(|r| OdPoint {
            alpha0_l: r.alpha0_l,
            omega_mhz: r.omega_mhz,
            fwhm: r.fwhm,
        })
        .collect();
    if kind == ExperimentKind::OdSweep && od_points.is_empty() {
        return Err(Error::Validation("od_sweep needs at least one od_point".into()));
    }

    let stokes_ratios: Vec<C64> = raw
        .experiment
        .stokes_ratios
        .unwrap_or_default()
        .iter()
        .map(|r| C64::new(r[0], r[1]))
        .collect();
    if kind == ExperimentKind::SensitivityStudy && stokes_ratios.len() < 2 {
        return Err(Error::Validation(
            "sensitivity_study needs a reference ratio plus at least one other".into(),
        ));
    }

    let kernel_z = raw.experiment.kernel_z.unwrap_or(1.0);
    if !(kernel_z > 0.0 && kernel_z <= 1.0) {
        return Err(Error::Validation("kernel_z must lie in (0, 1]".into()));
    }

    let mut quadrature = QuadratureSpec::default();
    if let Some(b) = raw.experiment.quadrature_bandwidth_mhz {
        if !(b > 0.0) {
            return Err(Error::Validation("quadrature_bandwidth_mhz must be > 0".into()));
        }
        quadrature.bandwidth = mhz(b);
    }
    if let Some(n) = raw.experiment.quadrature_points {
        if n < 3 {
            return Err(Error::Validation("quadrature_points must be >= 3".into()));
        }
        quadrature.n = n;
    }

    let solver = raw.experiment.solver.unwrap_or(match kind {
        ExperimentKind::JointModeStudy => Solver::Joint,
        ExperimentKind::KernelStudy => Solver::Kernels,
        _ => Solver::TimeDomain,
    });
    match kind {
        ExperimentKind::JointModeStudy if solver != Solver::Joint => {
            return Err(Error::Validation(
                "joint_mode_study runs only with solver = \"joint\"".into(),
            ));
        }
        ExperimentKind::KernelStudy if solver != Solver::Kernels => {
            return Err(Error::Validation(
                "kernel_study runs only with solver = \"kernels\"".into(),
            ));
        }
        ExperimentKind::StoredLight
        | ExperimentKind::OdSweep
        | ExperimentKind::DecaySweep
        | ExperimentKind::SensitivityStudy
            if solver != Solver::TimeDomain =>
        {
            return Err(Error::Validation(
                "storage protocols need the time-domain solver".into(),
            ));
        }
        _ => {}
    }
    // only the time-domain solver steps on this grid; the spectral, kernel
    // and joint solvers treat it as an output sampling grid
    if solver == Solver::TimeDomain {
        grid.validate(&medium)?;
    }

    let alpha0_l_values = raw
        .experiment
        .alpha0_l_values
        .unwrap_or_else(|| vec![medium.alpha0_l]);
    if alpha0_l_values.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::Validation("alpha0_l_values must be > 0".into()));
    }
    if let Some(f) = raw.experiment.bandwidth_fraction {
        if !(f > 0.0) {
            return Err(Error::Validation("bandwidth_fraction must be > 0".into()));
        }
    }

    Ok(ExperimentSpec {
        kind,
        solver,
        eit_only_overlay: raw.experiment.eit_only_overlay,
        homogeneous_overlay: raw.experiment.homogeneous_overlay,
        medium,
        pulse,
        control,
        grid,
        storage_times,
        od_points,
        stokes_ratios,
        kernel_z,
        quadrature,
        kernel_overlays: raw.experiment.kernel_overlays,
        snapshot_times: raw.experiment.snapshot_times.unwrap_or_default(),
        alpha0_l_values,
        bandwidth_fraction: raw.experiment.bandwidth_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::to_mhz;

    const STORED: &str = r#"
        [experiment]
        kind = "stored_light"

        [medium]
        alpha0_l = 52.0
        gamma_mhz = 145.0
        gamma0_mhz = 270e-6
        delta_hf_mhz = 6834.7
        omega_mhz = 9.6

        [pulse]
        fwhm = 16.0

        [control]
        storage_time = 60.0
    "#;

    #[test]
    fn stored_light_spec_round_trips_units() {
        let spec = ExperimentSpec::from_toml(STORED).unwrap();
        assert_eq!(spec.kind, ExperimentKind::StoredLight);
        assert!((to_mhz(spec.medium.gamma) - 145.0).abs() < 1e-12 * 145.0);
        assert!((to_mhz(spec.medium.omega) - 9.6).abs() < 1e-12 * 9.6);
        // δ omitted means the light shift is cancelled
        assert_eq!(spec.medium.delta, spec.medium.light_shift());
        assert_eq!(spec.control.storage_time, 60.0);
        assert_eq!(spec.control.omega_write, spec.medium.omega);
        // pulse defaults: peak one FWHM before switch-off, dark after t_off
        let p = spec.pulse.as_ref().unwrap();
        assert_eq!(p.window.1, 0.0);
        assert_eq!(p.signal_at(1.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn empty_spec_lists_missing_sections() {
        let err = ExperimentSpec::from_toml("[experiment]\nkind = \"stored_light\"\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("medium"), "{msg}");
        assert!(msg.contains("pulse"), "{msg}");
        assert!(msg.contains("control"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = STORED.replace("storage_time", "storage_tim");
        assert!(ExperimentSpec::from_toml(&text).is_err());
    }

    #[test]
    fn sweep_kinds_demand_their_lists() {
        let text = STORED.replace("kind = \"stored_light\"", "kind = \"decay_sweep\"");
        let msg = ExperimentSpec::from_toml(&text).unwrap_err().to_string();
        assert!(msg.contains("storage_times"), "{msg}");

        let ok = format!("{text}\n"); // storage_times live under [experiment]
        let ok = ok.replace(
            "kind = \"decay_sweep\"",
            "kind = \"decay_sweep\"\nstorage_times = [0.0, 20.0, 60.0, 100.0]",
        );
        let spec = ExperimentSpec::from_toml(&ok).unwrap();
        assert_eq!(spec.storage_times.len(), 4);
    }

    #[test]
    fn explicit_delta_is_kept() {
        let text = STORED.replace("omega_mhz = 9.6", "omega_mhz = 9.6\ndelta_mhz = 0.0");
        let spec = ExperimentSpec::from_toml(&text).unwrap();
        assert_eq!(spec.medium.delta, 0.0);
    }

    #[test]
    fn solver_kind_mismatch_is_rejected() {
        let text = STORED.replace(
            "kind = \"stored_light\"",
            "kind = \"stored_light\"\nsolver = \"spectral\"",
        );
        assert!(ExperimentSpec::from_toml(&text).is_err());
    }
}
