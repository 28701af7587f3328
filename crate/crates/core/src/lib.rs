//! Monte-Carlo simulator and numerical library for the scalable cell-free
//! massive MIMO uplink.
//!
//! The pipeline drops APs and users on a wrap-around square, builds
//! large-scale channel and MMSE-estimation statistics, forms candidate
//! virtual clusters from AP neighborhoods, associates users to clusters by
//! solving the sum-rate matching problem exactly with the Hungarian method,
//! and evaluates closed-form achievable rates under maximum-ratio combining
//! against full-cell-free, user-centric and LSF-decoding baselines.
//!
//! Modules follow the pipeline order:
//!
//! * [`config`]: tunables, defaults and the `key = value` file format
//! * [`geometry`]: network drops, toroidal distances, cell-centric clusters
//! * [`channel`]: pathloss, correlated shadowing, pilots, MMSE quality, FPC
//! * [`clustering`]: virtual clusters, baseline serving sets, CPU bookkeeping
//! * [`sinr`]: closed-form and LSF-weighted SINR, rates, Monte-Carlo oracle
//! * [`assignment`]: weight matrix and the exact Hungarian matching
//! * [`harness`]: Monte-Carlo experiments, aggregation and file outputs

pub mod assignment;
pub mod channel;
pub mod clustering;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod sinr;

pub use error::{Error, Result};
