//! Simulation of weak signal/Stokes pulse propagation and storage in a
//! double-Λ atomic medium where electromagnetically induced transparency
//! (EIT) and resonant four-wave mixing (FWM) act simultaneously.
//!
//! Conventions used throughout:
//! - all rates and detunings are angular frequencies in rad/μs; configuration
//!   I/O uses ordinary frequency in MHz with an explicit 2π at the boundary;
//! - time is in μs, with t = 0 at the control switch-off instant;
//! - the medium occupies z ∈ [0, 1] (length normalized to L = 1) and fields
//!   are treated in the co-moving frame, so field propagation is an ODE in z
//!   slaved to the atomic coherences.

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod freq_solver;
pub mod grid;
pub mod jointmode;
pub mod kernels;
pub mod mb_solver;
pub mod output;
pub mod params;
pub mod presets;
pub mod pulses;

pub use error::Error;
pub use params::{BreakdownReport, DerivedRates, MediumParams};

/// Result alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;
