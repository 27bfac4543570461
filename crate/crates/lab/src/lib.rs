//! Scenario files, CSV ingestion and emission, presets and parallel sweeps
//! around [`rtp_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod io;
pub mod presets;
pub mod report;
pub mod sweep;
pub mod synthetic;

pub use error::{LabError, Result};
