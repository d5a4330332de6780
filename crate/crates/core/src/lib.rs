//! Simulation and analysis of stochastic resonance in a two-well potential
//! with two transition pathways.
//!
//! The pipeline follows the data:
//!
//! - [`potential`]: the Mexican Hat potential, its critical points and critical forcing.
//! - [`kramers`]: static and frozen-phase escape rates.
//! - [`ctmc`]: the two-state Markov chain with periodic rates and its invariant measure.
//! - [`sde`]: Euler-Maruyama paths and deterministic parallel ensembles.
//! - [`reduction`]: symbolic two-state paths and entrance/exit records.
//! - [`escape`]: conditional escape-time distributions and histograms.
//! - [`measures`]: the six resonance measures.
//! - [`stats`]: Kolmogorov-Smirnov machinery and the conditional KS test.
//! - [`sweep`]: parameter sweeps, manifests and plot data.
//!
//! [`periodic`] holds the shared periodic interpolation tables and [`io`] the
//! CSV and binary file formats.

pub mod ctmc;
pub mod error;
pub mod escape;
pub mod io;
pub mod kramers;
pub mod measures;
pub mod periodic;
pub mod potential;
pub mod reduction;
pub mod sde;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
