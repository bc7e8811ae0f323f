//! Physical parameters of the double-Λ medium and the rates derived from
//! them. Every solver consumes a validated [`MediumParams`] together with a
//! [`DerivedRates`] produced by [`derive`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

pub const TAU: f64 = std::f64::consts::TAU;

/// Ordinary frequency in MHz -> angular frequency in rad/μs.
#[inline]
pub fn mhz(f: f64) -> f64 {
    TAU * f
}

/// Angular frequency in rad/μs -> ordinary frequency in MHz.
#[inline]
pub fn to_mhz(w: f64) -> f64 {
    w / TAU
}

/// Physical constants of the medium. All rates are angular frequencies in
/// rad/μs; use [`MediumParams::from_mhz`] to configure in ordinary-frequency
/// MHz. The medium length is normalized to 1, so z is dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Resonant optical depth α₀L (dimensionless).
    pub alpha0_l: f64,
    /// Optical polarization decay rate γ.
    pub gamma: f64,
    /// Spin coherence decay rate γ₀.
    pub gamma0: f64,
    /// Ground-state hyperfine splitting Δ_hf.
    pub delta_hf: f64,
    /// Two-photon detuning δ.
    pub delta: f64,
    /// Control Rabi frequency Ω (reference constant value).
    pub omega: f64,
    /// Ratio Ω′/Ω of the two control couplings. Defaults to −√3.
    pub clebsch_ratio: f64,
}

pub const DEFAULT_CLEBSCH_RATIO: f64 = -1.732050807568877293527446341505872367_f64;

impl MediumParams {
    /// Build from ordinary frequencies in MHz (converted by 2π internally).
    pub fn from_mhz(
        alpha0_l: f64,
        gamma_mhz: f64,
        gamma0_mhz: f64,
        delta_hf_mhz: f64,
        delta_mhz: f64,
        omega_mhz: f64,
    ) -> Result<Self> {
        let p = MediumParams {
            alpha0_l,
            gamma: mhz(gamma_mhz),
            gamma0: mhz(gamma0_mhz),
            delta_hf: mhz(delta_hf_mhz),
            delta: mhz(delta_mhz),
            omega: mhz(omega_mhz),
            clebsch_ratio: DEFAULT_CLEBSCH_RATIO,
        };
        p.validate()?;
        Ok(p)
    }

    /// Replace the two-photon detuning with the value that cancels the
    /// control light shift, δ = δ_s = |Ω′/Ω|²·Ω²/Δ_hf.
    pub fn with_light_shift_cancelled(mut self) -> Self {
        self.delta = self.light_shift();
        self
    }

    /// Light shift δ_s = |Ω′|²/Δ_hf induced by the off-resonant control
    /// coupling.
    pub fn light_shift(&self) -> f64 {
        (self.clebsch_ratio * self.omega).powi(2) / self.delta_hf
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0_l > 0.0) || !self.alpha0_l.is_finite() {
            return Err(Error::invalid("alpha0_l", "optical depth must be > 0"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::invalid("gamma", "polarization decay must be > 0"));
        }
        if !(self.gamma0 >= 0.0) || !self.gamma0.is_finite() {
            return Err(Error::invalid("gamma0", "spin decay must be >= 0"));
        }
        if self.gamma0 >= self.gamma {
            return Err(Error::invalid(
                "gamma0",
                "spin coherence must outlive optical polarization (gamma0 < gamma)",
            ));
        }
        if !(self.delta_hf > 0.0) || !self.delta_hf.is_finite() {
            return Err(Error::invalid("delta_hf", "hyperfine splitting must be > 0"));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(Error::invalid("omega", "control Rabi frequency must be >= 0"));
        }
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", "two-photon detuning must be finite"));
        }
        if !self.clebsch_ratio.is_finite() || self.clebsch_ratio == 0.0 {
            return Err(Error::invalid("clebsch_ratio", "must be finite and nonzero"));
        }
        Ok(())
    }
}

/// Rates derived from [`MediumParams`]. All combinations involving the speed
/// of light are stored in absorbed-c form: `gn` is g√N·√(L/c) = √(α₀L·γ/2)
/// (so g²N·L/c = α₀L·γ/2), and `group_delay` stands in for tan²θ = g²N/Ω²
/// through tan²θ = (c/L)·group_delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    /// Light shift δ_s = |Ω′|²/Δ_hf.
    pub light_shift: f64,
    /// FWM coupling rate Δ_R = −Ω²/Δ_hf (negative whenever Ω > 0).
    pub delta_r: f64,
    /// EIT group velocity v_g = 2Ω²/(α₀γ), in L/μs. Zero when Ω = 0.
    pub v_g: f64,
    /// EIT transparency window width Γ_E = Ω²/(γ√(α₀L/2)).
    pub gamma_e: f64,
    /// Normalized coupling g√N·√(L/c) = √(α₀L·γ/2), in (rad/μs)·(slots of √z).
    pub gn: f64,
    /// Complex spin relaxation Γ₀ = γ₀ − i(δ − δ_s).
    pub big_gamma0: C64,
    /// Complex optical relaxation Γ = γ − i(δ − 2δ_s).
    pub big_gamma: C64,
    /// Group delay L/v_g = α₀L·γ/(2Ω²), in μs; infinite when Ω = 0.
    pub group_delay: f64,
    /// True when Ω = 0: no EIT, v_g = 0, group delay infinite.
    pub degenerate: bool,
}

/// Compute all derived rates. Pure and deterministic: equal inputs give
/// bit-identical outputs.
pub fn derive(params: &MediumParams) -> Result<DerivedRates> {
    params.validate()?;
    let light_shift = params.light_shift();
    let omega2 = params.omega * params.omega;
    let delta_r = -omega2 / params.delta_hf;
    let degenerate = params.omega == 0.0;
    let v_g = 2.0 * omega2 / (params.alpha0_l * params.gamma);
    let gamma_e = omega2 / (params.gamma * (params.alpha0_l / 2.0).sqrt());
    let gn = (params.alpha0_l * params.gamma / 2.0).sqrt();
    let group_delay = if degenerate {
        f64::INFINITY
    } else {
        params.alpha0_l * params.gamma / (2.0 * omega2)
    };
    Ok(DerivedRates {
        light_shift,
        delta_r,
        v_g,
        gamma_e,
        gn,
        big_gamma0: C64::new(params.gamma0, -(params.delta - light_shift)),
        big_gamma: C64::new(params.gamma, -(params.delta - 2.0 * light_shift)),
        group_delay,
        degenerate,
    })
}

/// Validity indicator for the perturbative treatment of FWM, which fails
/// once |Δ_R|·L/v_g = α₀L·γ/(2Δ_hf) approaches unity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakdownReport {
    /// |Δ_R|·L/v_g = α₀L·γ/(2Δ_hf).
    pub delta_r_delay_product: f64,
    /// True while the product is below 1.
    pub perturbation_valid: bool,
    /// Equivalent optical-depth threshold 2Δ_hf/γ.
    pub threshold_alpha0_l: f64,
}

pub fn breakdown_flag(params: &MediumParams) -> Result<BreakdownReport> {
    params.validate()?;
    let product = params.alpha0_l * params.gamma / (2.0 * params.delta_hf);
    Ok(BreakdownReport {
        delta_r_delay_product: product,
        perturbation_valid: product < 1.0,
        threshold_alpha0_l: 2.0 * params.delta_hf / params.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn base() -> MediumParams {
        MediumParams::from_mhz(80.0, 150.0, 270e-6, 6835.0, 0.0, 10.0).unwrap()
    }

    #[test]
    fn delta_r_matches_reported_value() {
        let d = derive(&base()).unwrap();
        // Ω/(2π)=10 MHz, Δ_hf/(2π)=6835 MHz -> Δ_R/(2π) = -14.63 kHz.
        assert_relative_eq!(to_mhz(d.delta_r), -100.0 / 6835.0, max_relative = 1e-12);
        assert_relative_eq!(to_mhz(d.delta_r) * 1e3, -14.63, max_relative = 2e-3);
    }

    #[test]
    fn eit_window_and_group_velocity() {
        let d = derive(&base()).unwrap();
        assert_relative_eq!(to_mhz(d.gamma_e) * 1e3, 105.4, max_relative = 1e-3);
        // v_g/(2πL) = 16.67 kHz
        assert_relative_eq!(to_mhz(d.v_g) * 1e3, 16.67, max_relative = 1e-3);
        assert_relative_eq!(d.gamma_e * (80.0f64 / 2.0).sqrt(), mhz(10.0).powi(2) / mhz(150.0));
    }

    #[test]
    fn zero_control_is_degenerate() {
        let p = MediumParams::from_mhz(80.0, 150.0, 270e-6, 6835.0, 0.0, 0.0).unwrap();
        let d = derive(&p).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.delta_r, 0.0);
        assert_eq!(d.light_shift, 0.0);
        assert_eq!(d.v_g, 0.0);
        assert!(d.group_delay.is_infinite());
    }

    #[test]
    fn light_shift_uses_clebsch_ratio() {
        let p = MediumParams::from_mhz(80.0, 150.0, 270e-6, 6835.0, 0.0, 9.6).unwrap();
        let d = derive(&p).unwrap();
        // 3Ω²/Δ_hf for Ω/(2π)=9.6 MHz -> about 40 kHz, not the reported 17 kHz.
        assert_relative_eq!(to_mhz(d.light_shift) * 1e3, 3.0 * 9.6 * 9.6 / 6.835, max_relative = 1e-12);
    }

    #[test]
    fn breakdown_threshold() {
        let p = MediumParams::from_mhz(94.0, 145.0, 270e-6, 6835.0, 0.0, 10.0).unwrap();
        let r = breakdown_flag(&p).unwrap();
        assert!(r.perturbation_valid, "alpha0L=94 is just below threshold");
        assert_relative_eq!(r.threshold_alpha0_l, 2.0 * 6835.0 / 145.0, max_relative = 1e-12);
        assert!((94.0..100.0).contains(&r.threshold_alpha0_l));

        let low = MediumParams::from_mhz(10.0, 145.0, 270e-6, 6835.0, 0.0, 10.0).unwrap();
        assert!(breakdown_flag(&low).unwrap().perturbation_valid);
        let high = MediumParams::from_mhz(110.0, 145.0, 270e-6, 6835.0, 0.0, 10.0).unwrap();
        assert!(!breakdown_flag(&high).unwrap().perturbation_valid);
    }

    #[test]
    fn invalid_params_name_the_field() {
        let mut p = base();
        p.gamma0 = p.gamma * 2.0;
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("gamma0"));
        let mut p = base();
        p.alpha0_l = -1.0;
        assert!(p.validate().unwrap_err().to_string().contains("alpha0_l"));
    }

    #[test]
    fn derive_is_deterministic() {
        let a = derive(&base()).unwrap();
        let b = derive(&base()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_round_trip() {
        let f = 149.37;
        assert_relative_eq!(to_mhz(mhz(f)), f, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn delay_product_identity(
            alpha0_l in 1.0f64..200.0,
            gamma_mhz in 1.0f64..500.0,
            omega_mhz in 0.1f64..50.0,
            delta_hf_mhz in 100.0f64..10000.0,
        ) {
            let p = MediumParams::from_mhz(alpha0_l, gamma_mhz, 0.0, delta_hf_mhz, 0.0, omega_mhz).unwrap();
            let d = derive(&p).unwrap();
            let lhs = d.delta_r.abs() * d.group_delay;
            let rhs = p.alpha0_l * p.gamma / (2.0 * p.delta_hf);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        }
    }
}
