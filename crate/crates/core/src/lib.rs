//! Error performance of on-off frequency-shift keying (OOFSK) received on
//! `L` antennas over Rician fading.
//!
//! Two independent routes are provided and meant to be checked against each
//! other:
//!
//! - [`analytic`]: MAP-detector error probabilities in closed form (with
//!   one-dimensional quadrature for the fading average), for coherent and
//!   noncoherent receivers on independent antennas.
//! - [`channel`]: a Monte Carlo simulation of the correlator outputs,
//!   including correlated fading, with the same MAP detector.
//!
//! [`detector`] holds the decision rule shared by both, and [`specfun`] the
//! log-domain special functions underneath.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytic;
pub mod channel;
pub mod detector;
mod error;
pub mod quad;
pub mod specfun;

pub use analytic::{pe_average_coherent, pe_conditional_coherent, pe_noncoherent, ChannelEnergy};
pub use channel::{
    run_monte_carlo, AntennaChannelSpec, Correlation, CorrelatorMatrix, EnergyVector, ErrorStats,
    ModulationSpec, MonteCarlo,
};
pub use detector::{detect, DetectionParams, Scenario};
pub use error::{Error, Result};
