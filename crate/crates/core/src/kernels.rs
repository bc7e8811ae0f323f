//! Convolution kernels linking the boundary fields to the output fields and
//! the spin wave for a constant control.
//!
//! The input-output relations are
//!
//!   ε(z,t)   = ∫dt′ ε(0,t−t′)·(f1+f2) + ∫dt′ ε′*(0,t−t′)·f3,
//!   ε′*(z,t) = ε′*(0,t) + ∫dt′ ε′*(0,t−t′)·g2 + ∫dt′ ε(0,t−t′)·g3,
//!   S(z,t)   = ∫dt′ ε(0,t−t′)·(h1+h2) + ∫dt′ ε′*(0,t−t′)·h3,
//!
//! with f1 the pure-EIT response and the remaining kernels the four-wave
//! mixing corrections (g3 = −f3). Three constructions are provided: direct
//! numeric inverse Fourier transforms of the spectral expressions, the
//! perturbative closed forms (valid for δ = δ_s, γ₀ = 0, kernels expanded to
//! second order in 1/Δ_hf), and the infinitely-wide-EIT-window limit where
//! every kernel collapses to boxes and delta functions on [0, z/v_g].
//!
//! Delta-function parts are never sampled; they are kept as explicit
//! impulses and applied as interpolated shifts during convolution.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::freq_solver::spectral_coeffs;
use crate::grid::{trapezoid_weight, TimeGrid};
use crate::params::{derive, mhz, MediumParams};
use crate::Result;

/// One response kernel: regular part sampled on a t′ grid plus delta
/// impulses (location, complex weight).
#[derive(Debug, Clone)]
pub struct Kernel {
    pub values: Vec<C64>,
    pub impulses: Vec<(f64, C64)>,
}

impl Kernel {
    fn regular(values: Vec<C64>) -> Self {
        Kernel {
            values,
            impulses: Vec::new(),
        }
    }

    fn zeros(n: usize) -> Self {
        Kernel::regular(vec![C64::new(0.0, 0.0); n])
    }
}

/// The full kernel family at one depth z, on a shared t′ grid.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub grid: TimeGrid,
    pub z: f64,
    pub f1: Kernel,
    pub f2: Kernel,
    pub f3: Kernel,
    pub g2: Kernel,
    pub g3: Kernel,
    pub h1: Kernel,
    pub h2: Kernel,
    pub h3: Kernel,
}

/// Frequency quadrature for the numeric kernels: uniform trapezoid over
/// ω ∈ [−bandwidth/2, bandwidth/2] with n points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub bandwidth: f64,
    pub n: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        // wide enough that a larger range does not change the results
        QuadratureSpec {
            bandwidth: mhz(160.0),
            n: (1 << 17) + 1,
        }
    }
}

/// Numeric kernels: trapezoid evaluation of the inverse Fourier transforms
/// of the exact spectral expressions.
pub fn kernels_numeric(
    params: &MediumParams,
    z: f64,
    grid: &TimeGrid,
    quad: &QuadratureSpec,
) -> Result<KernelSet> {
    params.validate()?;
    if quad.n < 3 || !(quad.bandwidth > 0.0) {
        return Err(Error::invalid("quadrature", "need n >= 3 and bandwidth > 0"));
    }
    let d = derive(params)?;
    if d.degenerate {
        return Err(Error::Unsupported(
            "kernels require a nonzero control field".into(),
        ));
    }
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let nq = quad.n;
    let dw = quad.bandwidth / (nq - 1) as f64;
    let w0 = -0.5 * quad.bandwidth;

    // spectral integrands, one row per kernel expression
    let mut sp_f1 = Vec::with_capacity(nq);
    let mut sp_f12 = Vec::with_capacity(nq);
    let mut sp_f3 = Vec::with_capacity(nq);
    let mut sp_g2 = Vec::with_capacity(nq); // delta already removed
    let mut sp_h1 = Vec::with_capacity(nq);
    let mut sp_h12 = Vec::with_capacity(nq);
    let mut sp_h3 = Vec::with_capacity(nq);
    for j in 0..nq {
        let w = w0 + dw * j as f64;
        let c = spectral_coeffs(params, &d, w)?;
        let arg = c.xi * z;
        let csh = arg.cosh();
        let snh = arg.sinh();
        let sig_ratio = if arg.norm() < 1e-4 {
            // σ/ξ·sinh(ξz) without the β branch ambiguity
            c.sigma * z * (one + arg * arg / 6.0)
        } else {
            c.sigma / c.xi * snh
        };
        let snh_over_beta = c.pre
            * if arg.norm() < 1e-4 {
                z * (one + arg * arg / 6.0)
            } else {
                snh / c.xi
            };
        let phase = (i * c.sigma * z).exp();
        let e2 = (2.0 * i * c.sigma * z).exp();
        let g_iw = d.big_gamma - i * w;
        sp_f1.push(e2);
        sp_f12.push(phase * (csh + i * sig_ratio));
        sp_f3.push(phase * i * 2.0 * d.delta_r * snh_over_beta);
        sp_g2.push(phase * (csh - i * sig_ratio) - one);
        let pre_h = -d.gn * params.omega / c.f;
        sp_h1.push(pre_h * e2);
        sp_h12.push(
            pre_h
                * phase
                * (csh + i * sig_ratio
                    - 2.0 * d.delta_r * g_iw / params.delta_hf * snh_over_beta),
        );
        sp_h3.push(
            -pre_h
                * phase
                * (i * g_iw / params.delta_hf * (csh + i * sig_ratio)
                    - i * 2.0 * d.delta_r * snh_over_beta),
        );
    }

    let nt = grid.n;
    let mut rows: [Vec<C64>; 7] = Default::default();
    for r in &mut rows {
        *r = Vec::with_capacity(nt);
    }
    let norm = dw / std::f64::consts::TAU;
    for k in 0..nt {
        let t = grid.t(k);
        // e^{-iω_j t} = e^{-iω₀t}·r^j with r = e^{-i·dω·t}
        let mut ph = (-i * w0 * t).exp();
        let step = (-i * dw * t).exp();
        let mut acc = [C64::new(0.0, 0.0); 7];
        for j in 0..nq {
            let w = trapezoid_weight(j, nq);
            let pw = if w == 1.0 { ph } else { ph * w };
            acc[0] += sp_f1[j] * pw;
            acc[1] += sp_f12[j] * pw;
            acc[2] += sp_f3[j] * pw;
            acc[3] += sp_g2[j] * pw;
            acc[4] += sp_h1[j] * pw;
            acc[5] += sp_h12[j] * pw;
            acc[6] += sp_h3[j] * pw;
            ph *= step;
        }
        for (r, a) in rows.iter_mut().zip(acc) {
            r.push(a * norm);
        }
    }
    let [v_f1, v_f12, v_f3, v_g2, v_h1, v_h12, v_h3] = rows;
    let v_f2: Vec<C64> = v_f12.iter().zip(&v_f1).map(|(a, b)| a - b).collect();
    let v_h2: Vec<C64> = v_h12.iter().zip(&v_h1).map(|(a, b)| a - b).collect();
    let v_g3: Vec<C64> = v_f3.iter().map(|v| -v).collect();
    Ok(KernelSet {
        grid: *grid,
        z,
        f1: Kernel::regular(v_f1),
        f2: Kernel::regular(v_f2),
        f3: Kernel::regular(v_f3),
        g2: Kernel::regular(v_g2),
        g3: Kernel::regular(v_g3),
        h1: Kernel::regular(v_h1),
        h2: Kernel::regular(v_h2),
        h3: Kernel::regular(v_h3),
    })
}

/// Perturbative closed forms (δ = δ_s, γ₀ = 0, finite EIT window). The
/// delta part of g2 is kept as an impulse at t′ = 0; the spin-wave kernels
/// use h_j = −(g√N/Ω)·f_j.
pub fn kernels_closed_form(params: &MediumParams, z: f64, grid: &TimeGrid) -> Result<KernelSet> {
    params.validate()?;
    let d = derive(params)?;
    if d.degenerate {
        return Err(Error::Unsupported(
            "kernels require a nonzero control field".into(),
        ));
    }
    if !(z > 0.0) {
        return Err(Error::invalid("z", "closed-form kernels need z > 0"));
    }
    let ge = d.gamma_e;
    let zvg = z / d.v_g;
    let sqz = z.sqrt();
    let dr = d.delta_r;
    let n = grid.n;
    let mut f1 = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    let mut f3 = Vec::with_capacity(n);
    let mut g2 = Vec::with_capacity(n);
    for k in 0..n {
        let t = grid.t(k);
        let gauss = (-ge * ge / (4.0 * z) * (t - zvg) * (t - zvg)).exp();
        let erf = libm::erf(ge * (zvg - t) / (2.0 * sqz));
        let sign = if t >= 0.0 { 1.0 } else { -1.0 };
        f1.push(C64::new(
            ge * gauss / (2.0 * (std::f64::consts::PI * z).sqrt()),
            0.0,
        ));
        f2.push(C64::new(
            dr * dr
                * (-gauss * sqz / (2.0 * ge * std::f64::consts::PI.sqrt())
                    + 0.5 * t.abs()
                    + 0.5 * t * erf),
            0.0,
        ));
        f3.push(C64::new(0.0, 0.5 * dr * (sign + erf)));
        g2.push(C64::new(
            dr * dr
                * (gauss * sqz / (ge * std::f64::consts::PI.sqrt())
                    + 0.5 * (zvg - t) * (erf + sign)),
            0.0,
        ));
    }
    let scale = -d.gn / params.omega;
    let mk_h = |src: &[C64], impulses: &[(f64, C64)]| Kernel {
        values: src.iter().map(|v| scale * v).collect(),
        impulses: impulses.iter().map(|&(t, w)| (t, scale * w)).collect(),
    };
    let g3: Vec<C64> = f3.iter().map(|v| -v).collect();
    let h1 = mk_h(&f1, &[]);
    let h2 = mk_h(&f2, &[]);
    let h3k = Kernel {
        values: f3.iter().map(|v| scale * v).collect(),
        impulses: Vec::new(),
    };
    let mut g2k = Kernel::regular(g2);
    g2k.impulses.push((0.0, C64::new(-dr * dr * z / (ge * ge), 0.0)));
    Ok(KernelSet {
        grid: *grid,
        z,
        f1: Kernel::regular(f1),
        f2: Kernel::regular(f2),
        f3: Kernel::regular(f3),
        g2: g2k,
        g3: Kernel::regular(g3),
        h1,
        h2,
        h3: h3k,
    })
}

/// The infinitely wide EIT window limit: f1 becomes a pure delay δ(t′−z/v_g)
/// and the corrections become boxes on [0, z/v_g].
pub fn kernels_box_limit(params: &MediumParams, z: f64, grid: &TimeGrid) -> Result<KernelSet> {
    params.validate()?;
    let d = derive(params)?;
    if d.degenerate {
        return Err(Error::Unsupported(
            "kernels require a nonzero control field".into(),
        ));
    }
    let zvg = z / d.v_g;
    let dr = d.delta_r;
    let n = grid.n;
    let in_box = |t: f64| t > 0.0 && t < zvg;
    let mut f2 = Vec::with_capacity(n);
    let mut f3 = Vec::with_capacity(n);
    let mut g2 = Vec::with_capacity(n);
    for k in 0..n {
        let t = grid.t(k);
        if in_box(t) {
            f2.push(C64::new(dr * dr * t, 0.0));
            f3.push(C64::new(0.0, dr));
            g2.push(C64::new(dr * dr * (zvg - t), 0.0));
        } else {
            f2.push(C64::new(0.0, 0.0));
            f3.push(C64::new(0.0, 0.0));
            g2.push(C64::new(0.0, 0.0));
        }
    }
    let scale = -d.gn / params.omega;
    let g3: Vec<C64> = f3.iter().map(|v| -v).collect();
    let mut f1 = Kernel::zeros(n);
    f1.impulses.push((zvg, C64::new(1.0, 0.0)));
    let mut h1 = Kernel::zeros(n);
    h1.impulses.push((zvg, C64::new(scale, 0.0)));
    let h2 = Kernel::regular(f2.iter().map(|v| scale * v).collect());
    let h3 = Kernel::regular(f3.iter().map(|v| scale * v).collect());
    Ok(KernelSet {
        grid: *grid,
        z,
        f1,
        f2: Kernel::regular(f2),
        f3: Kernel::regular(f3),
        g2: Kernel::regular(g2),
        g3: Kernel::regular(g3),
        h1,
        h2,
        h3,
    })
}

/// out(t) = ∫dt′ k(t′)·input(t−t′) over the kernel grid, plus the impulse
/// shifts. The input is linearly interpolated and zero outside its grid.
pub fn convolve(
    kernel: &Kernel,
    kgrid: &TimeGrid,
    input: &[C64],
    igrid: &TimeGrid,
    out_times: &[f64],
) -> Vec<C64> {
    let n = kgrid.n;
    out_times
        .iter()
        .map(|&t| {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let k = kernel.values[j];
                if k != C64::new(0.0, 0.0) {
                    acc += trapezoid_weight(j, n) * k * igrid.interp(input, t - kgrid.t(j));
                }
            }
            acc *= kgrid.dt;
            for &(t0, w) in &kernel.impulses {
                acc += w * igrid.interp(input, t - t0);
            }
            acc
        })
        .collect()
}

/// Apply the field input-output relations at the kernel set's depth,
/// evaluating the outputs at the input grid times.
pub fn io_relation(
    set: &KernelSet,
    igrid: &TimeGrid,
    signal_in: &[C64],
    stokes_in: &[C64],
) -> Result<(Vec<C64>, Vec<C64>)> {
    if signal_in.len() != igrid.n || stokes_in.len() != igrid.n {
        return Err(Error::GridMismatch(
            "input traces must match the input time grid".into(),
        ));
    }
    let times = igrid.times();
    let a = convolve(&set.f1, &set.grid, signal_in, igrid, &times);
    let b = convolve(&set.f2, &set.grid, signal_in, igrid, &times);
    let c = convolve(&set.f3, &set.grid, stokes_in, igrid, &times);
    let signal: Vec<C64> = (0..igrid.n).map(|k| a[k] + b[k] + c[k]).collect();
    let d = convolve(&set.g2, &set.grid, stokes_in, igrid, &times);
    let e = convolve(&set.g3, &set.grid, signal_in, igrid, &times);
    let stokes: Vec<C64> = (0..igrid.n)
        .map(|k| stokes_in[k] + d[k] + e[k])
        .collect();
    Ok((signal, stokes))
}

/// Spin wave S(z,t) from the boundary fields through the h kernels.
pub fn spinwave_io(
    set: &KernelSet,
    igrid: &TimeGrid,
    signal_in: &[C64],
    stokes_in: &[C64],
    out_times: &[f64],
) -> Result<Vec<C64>> {
    if signal_in.len() != igrid.n || stokes_in.len() != igrid.n {
        return Err(Error::GridMismatch(
            "input traces must match the input time grid".into(),
        ));
    }
    let a = convolve(&set.h1, &set.grid, signal_in, igrid, out_times);
    let b = convolve(&set.h2, &set.grid, signal_in, igrid, out_times);
    let c = convolve(&set.h3, &set.grid, stokes_in, igrid, out_times);
    Ok((0..out_times.len()).map(|k| a[k] + b[k] + c[k]).collect())
}
