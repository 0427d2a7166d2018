//! Simulator and analysis toolkit for a superconducting qubit exchanging
//! energy with a finite ensemble of long-lived two-level systems (TLSs)
//! under active feedback.
//!
//! The crate is organized around the measurement workflow:
//!
//! - [`model`] — physical parameters, the Lorentzian coupling ladder and
//!   thermal-population utilities, plus the protocol description
//!   ([`model::Experiment`]).
//! - [`dynamics`] — exact deterministic propagation of the coupled rate
//!   equations, clamped (stabilized) evolution, protocol simulation and the
//!   reservoir heat-extraction curve.
//! - [`trajectory`] — stochastic quantum-jump simulation: a continuous-time
//!   Markov chain over the qubit and TLS bits, stroboscopic readout with IQ
//!   sampling, misassignment and per-measurement demolition, and
//!   active-feedback pi-pulses.
//! - [`estimator`] — recovery of transition rates, equilibrium population and
//!   T1 estimates from ensembles of jump traces.
//! - [`fitting`] — simultaneous least-squares recovery of model parameters
//!   from population curves.
//! - [`thermo`] — Szilard-engine bookkeeping: internal energy, entropy
//!   decomposition, measurement entropy reduction and coefficient of
//!   performance.
//! - [`device`] — SQUID flux algebra: effective Josephson energy, flux
//!   partition and the quasiparticle destructive-interference condition.
//!
//! All rates are plain `1/s` (not angular frequencies), frequencies are `Hz`,
//! times are seconds and temperatures Kelvin. Conversion to the `2*pi*kHz`
//! convention happens only in reporting layers.

pub mod constants;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod estimator;
pub mod fitting;
pub mod model;
pub mod thermo;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{
    Experiment, InitialState, LadderParams, PopulationState, QubitLevel, QubitParams, Step,
    SystemParams,
};
