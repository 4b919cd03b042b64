//! Federated transfer learning simulator.
//!
//! Small MLP classifiers are trained across simulated clients and merged with
//! FedAvg; the resulting global models are fused per sample with Dempster's
//! rule of combination and a max-belief decision. The crate also provides the
//! classification metric suite and an analytical response-time model for
//! edge/cloud microservice pipelines.

pub mod cli;
pub mod data;
pub mod error;
pub mod federation;
pub mod fusion;
pub mod latency;
pub mod metrics;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
