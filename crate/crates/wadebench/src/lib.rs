//! File formats, experiment harness and the human-evaluation service built
//! on `wadebench-core`.

pub mod checkpoint;
pub mod config;
pub mod dataset;
mod error;
pub mod evalserve;
pub mod harness;
pub mod model;

pub use error::{Error, Result};
