//! Five-class ECG beat classification on the MIT-BIH arrhythmia database.
//!
//! The crate is organised as a pipeline:
//!
//! - [`wfdb`] reads PhysioNet record headers, format-212 signal files and
//!   MIT annotation files.
//! - [`dataset`] removes baseline wander, cuts fixed-length beat windows
//!   around annotated R-peaks, normalizes them and splits them into
//!   train/validation/test buckets.
//! - [`nn`] holds the dense-tensor layer primitives (1-D convolution, ReLU,
//!   max-pool, global average pool, dense, softmax cross-entropy) together
//!   with a finite-difference gradient checker.
//! - [`model`] composes those primitives into the six-layer residual CNN and
//!   trains it with Adam.
//! - [`metrics`] turns predictions into a confusion matrix and the
//!   accuracy/sensitivity/specificity report.
//! - [`cli`] wires everything behind the `ecg-beatnet` binary.
//!
//! [`synth`] generates labelled synthetic recordings so every stage can be
//! exercised without downloading the database.

mod atomic;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod nn;
mod rng;
pub mod synth;
pub mod wfdb;

pub use error::{Error, Result};
pub use wfdb::BeatClass;
