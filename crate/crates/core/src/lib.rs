//! Superheterodyne Rydberg atomic receiver model.
//!
//! The crate follows the signal from the four-level atomic response through
//! the probe optics and photodetector to sampled baseband models, noise, SNR
//! and sensitivity, plus the parameter optimizer and scenario runner used by
//! the `raqr` binary.

pub mod baseband;
pub mod chain;
pub mod config;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod optical;
pub mod optimizer;
pub mod performance;
pub mod photodetection;
pub mod quantum;
pub mod signal;
pub mod validation;

pub use error::{Error, Result};
