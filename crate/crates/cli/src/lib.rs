#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Driver for the hybrid linear sampling pipeline: configuration, the
//! `hlsm` verbs and reconstruction metrics.

pub mod commands;
pub mod config;
pub mod metrics;

pub use config::RunConfig;
