//! Detection of partners at sea from vessel trajectory logs.
//!
//! Raw fixes are regularised into trip tracks ([`ingest`]), paired into
//! dyads ([`dyads`]), summarised by three joint-movement metrics
//! ([`metrics`]) and clustered with a three-component Gaussian mixture
//! ([`mixture`]). Cluster-1 dyads form per-fleet partner networks
//! ([`network`]). [`synth`] plants known behaviour for validation and
//! [`pipeline`] drives everything from one configuration file.

pub mod dyads;
mod error;
pub mod geo;
pub mod ingest;
pub mod metrics;
pub mod mixture;
pub mod network;
pub mod pipeline;
pub mod synth;
pub mod util;

pub use error::{Error, Result, Stage};
