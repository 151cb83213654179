//! Planning calculations for recirculation flushing of subsea production
//! systems.
//!
//! The crate is organised around the stages of a flushing study:
//!
//! * [`model`]: perfectly mixed tank decay of the leftover hydrocarbon fraction.
//! * [`hydraulics`]: steady-state pressure marching around the flushing loop.
//! * [`equipment`]: conduit catalog, reel drum capacity and stored mass.
//! * [`emissions`]: deck-pump CO2 accounting and the single-pass breakeven.
//! * [`scenario`]: flow-split sweeps, method comparison and curve fitting.
//! * [`config`] / [`cli`]: the run configuration file and command handlers.

pub mod cli;
pub mod config;
pub mod emissions;
pub mod equipment;
pub mod error;
pub mod hydraulics;
pub mod model;
pub mod scenario;
pub mod units;

pub use error::{FlushError, Result};
