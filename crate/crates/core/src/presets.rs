//! Ready-made experiment specs covering the scenarios the tool was built
//! around: warm-vapor storage at α₀L ≈ 10..110, Ω/(2π) ≈ 7..13 MHz,
//! γ/(2π) ≈ 145..150 MHz, Δ_hf/(2π) = 6834.7 MHz.
//!
//! Presets are plain TOML strings fed through the same parser as user specs,
//! so `eitfwm --preset fig4 --dump` and a hand-written file behave
//! identically.

use crate::config::ExperimentSpec;
use crate::params::{derive, MediumParams};
use crate::pulses::fwhm_for_reported_bandwidth;
use crate::{Error, Result};

pub const PRESETS: &[(&str, &str)] = &[
    (
        "fig3",
        "storage-time decay sweep at alpha0L = 52; retrieved energies on both channels vs dark time",
    ),
    (
        "fig4",
        "slow light at alpha0L = 80 with kernel-prediction overlays and a mid-propagation spin-wave profile",
    ),
    (
        "fig5",
        "joint-mode propagation vs its homogeneous form across alpha0L in {10, 25, 50, 100}",
    ),
    (
        "fig6",
        "storage across optical depths 10..110 with matched control levels and pulse durations",
    ),
    (
        "fig7",
        "Stokes-seed sensitivity at alpha0L = 52: full seed vs reduced seed r = -0.55",
    ),
    (
        "fig8",
        "response kernels at alpha0L = 80: exact quadrature vs closed forms vs box limit",
    ),
];

pub fn list() -> &'static [(&'static str, &'static str)] {
    PRESETS
}

/// EIT linewidth Γ_E for the quoted MHz parameters, used to pick pulse
/// durations as a bandwidth fraction.
fn gamma_e(alpha0_l: f64, gamma_mhz: f64, omega_mhz: f64) -> f64 {
    let p = MediumParams::from_mhz(alpha0_l, gamma_mhz, 0.0, 6834.7, 0.0, omega_mhz).unwrap();
    derive(&p).unwrap().gamma_e
}

pub fn preset_toml(name: &str) -> Option<String> {
    match name {
        "fig3" => Some(
            r#"
[experiment]
kind = "decay_sweep"
storage_times = [20.0, 60.0, 100.0, 140.0]

[medium]
alpha0_l = 52.0
gamma_mhz = 145.0
gamma0_mhz = 270e-6
delta_hf_mhz = 6834.7
omega_mhz = 9.6

[pulse]
fwhm = 16.0
"#
            .to_string(),
        ),
        "fig4" => {
            // pulse bandwidth 0.1 Γ_E, reported as an ordinary frequency
            let fwhm = fwhm_for_reported_bandwidth(0.1 * gamma_e(80.0, 150.0, 10.0));
            Some(format!(
                r#"
[experiment]
kind = "slow_light"
kernel_overlays = true
snapshot_times = [5.0]

[medium]
alpha0_l = 80.0
gamma_mhz = 150.0
gamma0_mhz = 270e-6
delta_hf_mhz = 6834.7
omega_mhz = 10.0

[pulse]
fwhm = {fwhm:.6}
center = 0.0
stokes_ratio = [1.0, 0.0]

[grid]
t_start = -15.0
t_end = 30.0
"#
            ))
        }
        "fig5" => Some(
            r#"
[experiment]
kind = "joint_mode_study"
homogeneous_overlay = true
alpha0_l_values = [10.0, 25.0, 50.0, 100.0]
bandwidth_fraction = 0.05

[medium]
alpha0_l = 10.0
gamma_mhz = 150.0
delta_hf_mhz = 6834.7
omega_mhz = 8.0

[pulse]
fwhm = 10.0
stokes_ratio = [0.0, 0.0]
"#
            .to_string(),
        ),
        "fig6" => Some(
            r#"
[experiment]
kind = "od_sweep"
od_points = [
    { alpha0_l = 10.0, omega_mhz = 8.3, fwhm = 6.0 },
    { alpha0_l = 41.0, omega_mhz = 7.1, fwhm = 6.0 },
    { alpha0_l = 82.0, omega_mhz = 12.7, fwhm = 20.0 },
    { alpha0_l = 110.0, omega_mhz = 7.8, fwhm = 20.0 },
]
stokes_ratios = [[1.0, 0.0]]

[medium]
alpha0_l = 10.0
gamma_mhz = 145.0
gamma0_mhz = 270e-6
delta_hf_mhz = 6834.7
omega_mhz = 8.3
delta_mhz = 0.0

[control]
storage_time = 100.0
"#
            .to_string(),
        ),
        "fig7" => Some(
            r#"
[experiment]
kind = "sensitivity_study"
stokes_ratios = [[1.0, 0.0], [-0.55, 0.0]]

[medium]
alpha0_l = 52.0
gamma_mhz = 145.0
gamma0_mhz = 270e-6
delta_hf_mhz = 6834.7
omega_mhz = 9.6

[pulse]
fwhm = 15.0

[control]
storage_time = 100.0
"#
            .to_string(),
        ),
        "fig8" => Some(
            r#"
[experiment]
kind = "kernel_study"
kernel_z = 1.0

[medium]
alpha0_l = 80.0
gamma_mhz = 150.0
gamma0_mhz = 270e-6
delta_hf_mhz = 6834.7
omega_mhz = 10.0

[grid]
t_start = -5.0
t_end = 30.0
dt = 0.02
"#
            .to_string(),
        ),
        _ => None,
    }
}

pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let text = preset_toml(name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        Error::Validation(format!(
            "unknown preset `{name}`; available: {}",
            names.join(", ")
        ))
    })?;
    ExperimentSpec::from_toml(&text)
}
