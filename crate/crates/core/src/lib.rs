//! System-level simulator and analytic toolkit for uplink SBS-to-UAV mmWave
//! fronthaul channels.
//!
//! The crate models a sectorized network of ground small-cell base stations
//! (SBS) fronthauled to hovering UAV hubs over directional 60 GHz links, and
//! computes the end-to-end SINR distribution of one reference uplink under
//! random UAV orientation fluctuations:
//!
//! - [`antenna`]: square-array radiation patterns (3GPP element pattern,
//!   array factor, total-power normalization) and the closed-form main-lobe
//!   approximation used by the analysis.
//! - [`geometry`]: topology generation and per-link direction angles.
//! - [`propagation`]: path loss, LoS probability, thermal noise.
//! - [`network`]: frequency-reuse band assignment and instantaneous SINR
//!   assembly (desired signal, intra- and inter-sector interference).
//! - [`analytic`]: Marcum Q, the Rician tilt-angle law, and the discrete
//!   Dirac-atom SINR distribution with outage and ergodic capacity.
//! - [`montecarlo`]: the empirical oracle with reproducible per-trial RNG
//!   substreams.
//! - [`experiment`]: config-driven sweeps, named figure/table recipes, CSV
//!   output.

pub mod analytic;
pub mod antenna;
pub mod experiment;
pub mod geometry;
pub mod montecarlo;
pub mod network;
pub mod propagation;

mod error;

pub use error::{Error, Result};
