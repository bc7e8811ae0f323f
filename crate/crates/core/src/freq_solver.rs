//! Frequency-domain propagation of the coupled signal/Stokes pair for a
//! constant control field.
//!
//! In the co-moving frame with ∂t → −iω the fields obey ∂z (ε, ε′*)ᵀ =
//! M(ω)(ε, ε′*)ᵀ. With the small M₂₂ entry dropped the solution is the
//! analytic transfer matrix
//!
//!   T(z,ω) = e^{iσz} [[cosh ξz + i(σ/ξ) sinh ξz,  i(2Δ_R/β) sinh ξz],
//!                     [−i(2Δ_R/β) sinh ξz,        cosh ξz − i(σ/ξ) sinh ξz]]
//!
//! with F = Ω² + (Γ − iω)(Γ₀ − iω), σ = α₀γ(iΓ₀ + ω)/(4F),
//! β = √((Γ₀ − iω)² + 4Δ_R²) and ξ = α₀γβ/(4F). The matrix is branch
//! independent because β only enters through sinh(ξz)/β and cosh(ξz).
//!
//! Fourier convention: ε(ω) = ∫ ε(t) e^{+iωt} dt, so the forward transform is
//! the DFT with a positive exponent and ω_k = 2πk/(N·dt) wrapped to negative
//! frequencies for k > N/2.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::error::Error;
use crate::grid::TimeGrid;
use crate::params::{derive, DerivedRates, MediumParams};
use crate::Result;

/// Frequency-dependent coefficients of the transfer matrix at one ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCoeffs {
    pub f: C64,
    pub sigma: C64,
    pub beta: C64,
    pub xi: C64,
    /// α₀γ/(4F) = ξ/β, branch independent.
    pub pre: C64,
}

pub fn spectral_coeffs(
    params: &MediumParams,
    d: &DerivedRates,
    omega: f64,
) -> Result<SpectralCoeffs> {
    let iw = C64::new(0.0, omega);
    let g0 = d.big_gamma0 - iw;
    let g = d.big_gamma - iw;
    let f = params.omega * params.omega + g * g0;
    let scale = params.omega * params.omega + g.norm() * g0.norm();
    if f.norm() <= 1e-14 * scale {
        return Err(Error::SingularResponse(format!(
            "F(ω) vanishes at ω = {omega} rad/μs"
        )));
    }
    let pre = params.alpha0_l * params.gamma / (4.0 * f);
    let beta = (g0 * g0 + 4.0 * d.delta_r * d.delta_r).sqrt();
    Ok(SpectralCoeffs {
        f,
        sigma: pre * (omega + C64::new(0.0, 1.0) * d.big_gamma0),
        beta,
        xi: pre * beta,
        pre,
    })
}

/// sinh(x)/x, stable near x = 0.
fn sinhc(x: C64) -> C64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        C64::new(1.0, 0.0) + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// Transfer matrix T(z,ω) from precomputed coefficients, row major.
pub fn transfer_from_coeffs(c: &SpectralCoeffs, delta_r: f64, z: f64) -> [[C64; 2]; 2] {
    let i = C64::new(0.0, 1.0);
    let arg = c.xi * z;
    let csh = arg.cosh();
    // sinh(ξz)/ξ; sinh(ξz)/β = (ξ/β)(sinh(ξz)/ξ) stays finite at β = 0
    let snh_over_xi = z * sinhc(arg);
    let snh_over_beta = c.pre * snh_over_xi;
    let phase = (i * c.sigma * z).exp();
    let diag = i * c.sigma * snh_over_xi;
    let off = i * 2.0 * delta_r * snh_over_beta;
    [
        [phase * (csh + diag), phase * off],
        [phase * (-off), phase * (csh - diag)],
    ]
}

/// Transfer matrix T(z,ω) for the medium described by `params`.
pub fn transfer_matrix(
    params: &MediumParams,
    d: &DerivedRates,
    z: f64,
    omega: f64,
) -> Result<[[C64; 2]; 2]> {
    let c = spectral_coeffs(params, d, omega)?;
    Ok(transfer_from_coeffs(&c, d.delta_r, z))
}

/// The full propagation matrix M(ω), optionally keeping the small M₂₂ entry
/// of order Ω²(ω + iΓ)/Δ_hf² that the analytic transfer matrix drops.
pub fn coupling_matrix(
    params: &MediumParams,
    d: &DerivedRates,
    omega: f64,
    keep_m22: bool,
) -> Result<[[C64; 2]; 2]> {
    let c = spectral_coeffs(params, d, omega)?;
    let i = C64::new(0.0, 1.0);
    let pre = i * params.alpha0_l * params.gamma / (2.0 * c.f);
    let o2_hf = params.omega * params.omega / params.delta_hf;
    let m22 = if keep_m22 {
        pre * (-o2_hf / params.delta_hf) * (omega + i * d.big_gamma)
    } else {
        C64::new(0.0, 0.0)
    };
    Ok([
        [pre * (omega + i * d.big_gamma0), pre * (-o2_hf)],
        [pre * o2_hf, m22],
    ])
}

fn matvec(m: &[[C64; 2]; 2], v: [C64; 2]) -> [C64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Solve ∂z v = M v from 0 to z with RK4 (M is z-independent). Used to keep
/// the M₂₂ entry and to cross-check the analytic transfer matrix.
pub fn propagate_ode(
    params: &MediumParams,
    d: &DerivedRates,
    z: f64,
    omega: f64,
    keep_m22: bool,
    nsteps: usize,
    v0: [C64; 2],
) -> Result<[C64; 2]> {
    let m = coupling_matrix(params, d, omega, keep_m22)?;
    let h = z / nsteps as f64;
    let mut v = v0;
    for _ in 0..nsteps {
        let k1 = matvec(&m, v);
        let k2 = matvec(&m, [v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]]);
        let k3 = matvec(&m, [v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]]);
        let k4 = matvec(&m, [v[0] + h * k3[0], v[1] + h * k3[1]]);
        v = [
            v[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            v[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    Ok(v)
}

/// Angular frequencies of the DFT bins of a time grid, in rad/μs, in FFT
/// order (bin k > n/2 wrapped to negative frequency).
pub fn angular_frequencies(grid: &TimeGrid) -> Vec<f64> {
    let n = grid.n;
    let dw = std::f64::consts::TAU / (n as f64 * grid.dt);
    (0..n)
        .map(|k| {
            let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            k * dw
        })
        .collect()
}

/// DFT matching ε(ω) = ∫ ε(t) e^{+iωt} dt (up to dt and a boundary phase that
/// cancel in transfer-function use).
pub fn fft_time_to_freq(samples: &[C64]) -> Vec<C64> {
    let mut buf = samples.to_vec();
    FftPlanner::new()
        .plan_fft_inverse(buf.len())
        .process(&mut buf);
    buf
}

/// Inverse of [`fft_time_to_freq`].
pub fn fft_freq_to_time(spectrum: &[C64]) -> Vec<C64> {
    let mut buf = spectrum.to_vec();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Fraction of spectral energy in the outer 10% of the frequency bins. Large
/// values indicate that the time grid does not resolve the pulse bandwidth.
pub fn edge_energy_fraction(spectrum: &[C64]) -> f64 {
    let n = spectrum.len();
    let total: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let half = n / 2;
    let edge = (n as f64 * 0.05).ceil() as usize;
    let lo = half.saturating_sub(edge);
    let hi = (half + edge).min(n - 1);
    let edge_sum: f64 = (lo..=hi).map(|k| spectrum[k].norm_sqr()).sum();
    edge_sum / total
}

/// Result of a spectral propagation: output traces on the input time grid,
/// plus the edge-energy diagnostic of the input spectra.
#[derive(Debug, Clone)]
pub struct SpectralOutput {
    pub signal: Vec<C64>,
    pub stokes: Vec<C64>,
    pub edge_energy: f64,
}

/// Propagate sampled boundary fields ε(0,t), ε′*(0,t) to depth z with a
/// constant control. Periodic wrap-around of the DFT means the grid must be
/// long enough that the delayed output fits inside it.
pub fn propagate_spectral(
    params: &MediumParams,
    grid: &TimeGrid,
    signal_in: &[C64],
    stokes_in: &[C64],
    z: f64,
    keep_m22: bool,
) -> Result<SpectralOutput> {
    if signal_in.len() != grid.n || stokes_in.len() != grid.n {
        return Err(Error::GridMismatch(
            "input traces must match the time grid length".into(),
        ));
    }
    let d = derive(params)?;
    let sig_w = fft_time_to_freq(signal_in);
    let stk_w = fft_time_to_freq(stokes_in);
    let edge_energy =
        edge_energy_fraction(&sig_w).max(edge_energy_fraction(&stk_w));
    let omegas = angular_frequencies(grid);
    let mut out_sig = Vec::with_capacity(grid.n);
    let mut out_stk = Vec::with_capacity(grid.n);
    for (k, &w) in omegas.iter().enumerate() {
        let v = [sig_w[k], stk_w[k]];
        let out = if keep_m22 {
            propagate_ode(params, &d, z, w, true, 64, v)?
        } else {
            matvec(&transfer_matrix(params, &d, z, w)?, v)
        };
        out_sig.push(out[0]);
        out_stk.push(out[1]);
    }
    Ok(SpectralOutput {
        signal: fft_freq_to_time(&out_sig),
        stokes: fft_freq_to_time(&out_stk),
        edge_energy,
    })
}

/// Spin wave S(z,t) (normalized by √(L/c)) driven by the propagated fields:
/// S(z,ω) = −(g√N·Ω/F)[ε(z,ω) − i(Γ − iω)/Δ_hf · ε′*(z,ω)].
pub fn spinwave_spectral(
    params: &MediumParams,
    grid: &TimeGrid,
    signal_in: &[C64],
    stokes_in: &[C64],
    z: f64,
) -> Result<Vec<C64>> {
    if signal_in.len() != grid.n || stokes_in.len() != grid.n {
        return Err(Error::GridMismatch(
            "input traces must match the time grid length".into(),
        ));
    }
    let d = derive(params)?;
    let sig_w = fft_time_to_freq(signal_in);
    let stk_w = fft_time_to_freq(stokes_in);
    let omegas = angular_frequencies(grid);
    let i = C64::new(0.0, 1.0);
    let mut s_w = Vec::with_capacity(grid.n);
    for (k, &w) in omegas.iter().enumerate() {
        let c = spectral_coeffs(params, &d, w)?;
        let t = transfer_from_coeffs(&c, d.delta_r, z);
        let v = matvec(&t, [sig_w[k], stk_w[k]]);
        let g_iw = d.big_gamma - i * w;
        s_w.push(-d.gn * params.omega / c.f * (v[0] - i * g_iw / params.delta_hf * v[1]));
    }
    Ok(fft_freq_to_time(&s_w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::PulseSpec;
    use approx::assert_relative_eq;

    fn base() -> MediumParams {
        MediumParams::from_mhz(80.0, 150.0, 270e-6, 6835.0, 0.0, 10.0)
            .unwrap()
            .with_light_shift_cancelled()
    }

    fn mat_close(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2], tol: f64) {
        for r in 0..2 {
            for c in 0..2 {
                assert!(
                    (a[r][c] - b[r][c]).norm() <= tol * (1.0 + b[r][c].norm()),
                    "entry ({r},{c}): {} vs {}",
                    a[r][c],
                    b[r][c]
                );
            }
        }
    }

    #[test]
    fn identity_at_zero_depth() {
        let p = base();
        let d = derive(&p).unwrap();
        for w in [-5.0, 0.0, 0.3, 40.0] {
            let t = transfer_matrix(&p, &d, 0.0, w).unwrap();
            mat_close(
                &t,
                &[
                    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                ],
                1e-14,
            );
        }
    }

    #[test]
    fn determinant_identity() {
        // det T = e^{2iσz} for all ω, z
        let p = base();
        let d = derive(&p).unwrap();
        for &w in &[-30.0, -0.1, 0.0, 2.0 * d.delta_r.abs(), 1.0, 25.0] {
            for &z in &[0.1, 0.5, 1.0] {
                let c = spectral_coeffs(&p, &d, w).unwrap();
                let t = transfer_from_coeffs(&c, d.delta_r, z);
                let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
                let expect = (C64::new(0.0, 2.0) * c.sigma * z).exp();
                // cosh − sinh cancels by up to cosh(ξz) in each entry, so the
                // achievable accuracy scales with (cosh·|e^{iσz}|)²
                let scale = ((c.xi * z).cosh().norm()
                    * (C64::new(0.0, 1.0) * c.sigma * z).exp().norm())
                .powi(2);
                assert!(
                    (det - expect).norm() <= 1e-12 * scale.max(expect.norm()),
                    "ω={w}, z={z}: det={det}, expect={expect}",
                );
            }
        }
    }

    #[test]
    fn branch_flip_leaves_matrix_unchanged() {
        let p = base();
        let d = derive(&p).unwrap();
        let c = spectral_coeffs(&p, &d, 0.7).unwrap();
        let flipped = SpectralCoeffs {
            beta: -c.beta,
            xi: -c.xi,
            ..c
        };
        let a = transfer_from_coeffs(&c, d.delta_r, 0.8);
        let b = transfer_from_coeffs(&flipped, d.delta_r, 0.8);
        mat_close(&a, &b, 1e-12);
    }

    #[test]
    fn decouples_without_hyperfine_mixing() {
        // Δ_hf → ∞ kills FWM: off-diagonals vanish, T11 = e^{2iσz}
        let p = MediumParams::from_mhz(80.0, 150.0, 270e-6, 1e9, 0.0, 10.0).unwrap();
        let d = derive(&p).unwrap();
        let c = spectral_coeffs(&p, &d, 0.4).unwrap();
        let t = transfer_from_coeffs(&c, d.delta_r, 1.0);
        // off-diagonals scale as Δ_R ~ 1/Δ_hf
        assert!(t[0][1].norm() < 1e-4);
        assert!(t[1][0].norm() < 1e-4);
        let pure = (C64::new(0.0, 2.0) * c.sigma).exp();
        assert!((t[0][0] - pure).norm() <= 1e-6 * pure.norm());
    }

    #[test]
    fn analytic_matrix_matches_ode_integration() {
        let p = base();
        let d = derive(&p).unwrap();
        for &w in &[-2.0, 0.05, 0.9] {
            let t = transfer_matrix(&p, &d, 1.0, w).unwrap();
            for v0 in [
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                [C64::new(0.3, -0.2), C64::new(0.5, 0.1)],
            ] {
                let ode = propagate_ode(&p, &d, 1.0, w, false, 400, v0).unwrap();
                let direct = matvec(&t, v0);
                for j in 0..2 {
                    assert!(
                        (ode[j] - direct[j]).norm() <= 1e-8 * (1.0 + direct[j].norm()),
                        "ω={w}: {} vs {}",
                        ode[j],
                        direct[j]
                    );
                }
            }
        }
    }

    #[test]
    fn m22_correction_is_small() {
        let p = base();
        let d = derive(&p).unwrap();
        let v0 = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let a = propagate_ode(&p, &d, 1.0, 0.1, false, 400, v0).unwrap();
        let b = propagate_ode(&p, &d, 1.0, 0.1, true, 400, v0).unwrap();
        // the dropped entry contributes at relative order 1/(α₀L)
        let rel = ((a[0] - b[0]).norm() + (a[1] - b[1]).norm())
            / (b[0].norm() + b[1].norm());
        assert!(rel < 3.0 / 80.0, "rel = {rel}");
        assert!(rel > 1e-4);
    }

    #[test]
    fn fft_round_trip() {
        let g = TimeGrid::span(-10.0, 10.0, 0.1);
        let p = PulseSpec::truncated_gaussian(3.0, 0.0, C64::new(1.0, 0.5), C64::new(0.0, 0.0));
        let (sig, _) = p.sample_inputs(&g).unwrap();
        let back = fft_freq_to_time(&fft_time_to_freq(&sig));
        for (a, b) in back.iter().zip(&sig) {
            assert!((a - b).norm() < 1e-12);
        }
        // Parseval: Σ|x|² = (1/N)Σ|X|²
        let et: f64 = sig.iter().map(|v| v.norm_sqr()).sum();
        let ew: f64 =
            fft_time_to_freq(&sig).iter().map(|v| v.norm_sqr()).sum::<f64>() / g.n as f64;
        assert_relative_eq!(et, ew, max_relative = 1e-12);
    }

    #[test]
    fn zero_depth_round_trip() {
        let p = base();
        let g = TimeGrid::span(-30.0, 30.0, 0.05);
        let pulse =
            PulseSpec::truncated_gaussian(6.0, 0.0, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        let (sig, stk) = pulse.sample_inputs(&g).unwrap();
        let out = propagate_spectral(&p, &g, &sig, &stk, 0.0, false).unwrap();
        for i in 0..g.n {
            assert!((out.signal[i] - sig[i]).norm() < 1e-10);
            assert!((out.stokes[i] - stk[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn pulse_is_delayed_by_the_group_delay() {
        // modest optical depth and a pulse much longer than 1/Γ_E
        let p = MediumParams::from_mhz(20.0, 150.0, 270e-6, 6835.0, 0.0, 10.0)
            .unwrap()
            .with_light_shift_cancelled();
        let d = derive(&p).unwrap();
        let g = TimeGrid::span(-120.0, 200.0, 0.05);
        let pulse =
            PulseSpec::truncated_gaussian(25.0, -40.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let (sig, stk) = pulse.sample_inputs(&g).unwrap();
        let out = propagate_spectral(&p, &g, &sig, &stk, 1.0, false).unwrap();
        let peak_i = (0..g.n)
            .max_by(|&a, &b| {
                out.signal[a]
                    .norm()
                    .partial_cmp(&out.signal[b].norm())
                    .unwrap()
            })
            .unwrap();
        let delay = g.t(peak_i) - pulse.center;
        assert_relative_eq!(delay, d.group_delay, max_relative = 0.05);
        assert!(out.edge_energy < 1e-9);
    }

    #[test]
    fn stokes_seed_feeds_the_signal() {
        let p = base();
        let d = derive(&p).unwrap();
        let t = transfer_matrix(&p, &d, 1.0, 0.0).unwrap();
        assert!(t[0][1].norm() > 1e-3);
        assert!(t[1][0].norm() > 1e-3);
    }

    #[test]
    fn mismatched_traces_are_rejected() {
        let p = base();
        let g = TimeGrid::span(0.0, 1.0, 0.1);
        let err =
            propagate_spectral(&p, &g, &[C64::new(0.0, 0.0)], &[C64::new(0.0, 0.0)], 1.0, false)
                .unwrap_err();
        assert!(matches!(err, Error::GridMismatch(_)));
    }
}
