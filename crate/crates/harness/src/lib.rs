//! Experiment harness for the KdV schemes: configuration files, named
//! experiment presets, runs with CSV reports and the `kdv-bench` CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod report;
pub mod solitons;

pub use error::HarnessError;
pub use experiment::{run, Domain, Experiment, ExperimentReport, InitialData, Reference};
pub use solitons::{soliton_count, soliton_count_periodic};
