//! Dynamic hysteresis of driven-dissipative Kerr resonators.
//!
//! The crate integrates the Lindblad master equation of one or two coupled Kerr
//! resonators under triangular drive sweeps, computes exact steady states and
//! Liouvillian spectra, and fits the hysteresis-area scaling laws.
//!
//! Units: every frequency is measured in the dissipation rate `γ`, every time in
//! `1/γ`.

pub mod analysis;
pub mod banded;
pub mod cli;
pub mod config;
pub mod dimer;
pub mod error;
pub mod fock;
pub mod generator;
pub mod io;
pub mod lindblad;
pub mod mean_field;
pub mod ode;
pub mod quasi_adiabatic;
pub mod scan;
pub mod spectral;
pub mod steady_state;

pub use error::{Error, Result};
