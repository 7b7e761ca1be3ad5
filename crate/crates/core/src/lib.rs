//! Core library for classifier-score calibration studies: score
//! distributions with known posteriors, calibration fits, evaluation
//! metrics, and the simulation machinery connecting them.

pub mod calibrators;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod num;
pub mod rng;

pub use error::{CalibError, Result};
