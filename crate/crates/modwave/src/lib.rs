//! Experiment runner for the final-state problem of the 1D cubic NLS.
//!
//! Each subcommand is a [`campaign::Campaign`] that reads an
//! [`config::ExperimentConfig`], records named checks in a
//! [`report::Report`] and writes CSV series next to `results.json`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod config;
pub mod error;
pub mod report;

pub use campaign::{campaigns, lookup, run_campaign, Campaign};
pub use config::{parse_config, ExperimentConfig};
pub use error::{Error, Result};
pub use report::{Report, Status};
