//! Core algorithms for measuring how quickly sequence models learn.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! - [`corpus`]: the ten progressive synthetic sequence tasks, with masks
//!   marking the tokens that can be predicted.
//! - [`metric`]: time-to-threshold and the Weighted Average Data Efficiency
//!   (WADE) score computed from test-accuracy curves.
//! - [`reservoir`]: echo-state networks and reservoir cellular automata.
//! - [`readout`]: the linear softmax decoder trained online by SGD.
//! - [`baseline`]: Elman RNN and LSTM trained with BPTT and Adam.
//! - [`protocol`]: the training/evaluation loops producing accuracy curves.
//!
//! IO, experiment orchestration and the CLI live in the `wadebench` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod corpus;
mod error;
pub mod metric;
pub mod protocol;
pub mod readout;
pub mod reservoir;
pub mod seed;

pub use error::{Error, Result};
