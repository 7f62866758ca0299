//! Estimation of very small probabilities of multivariate extreme events
//! from moderate samples, by exploiting homogeneity of a large-deviation
//! rate function on exponential marginal scale.
//!
//! The pipeline: fit marginal tails from order statistics ([`marginal`]),
//! move the sample to exponential-scale pseudo-observations ([`transform`]),
//! describe the target event as a predicate in data space ([`events`]),
//! and stretch the pseudo-sample along rays until enough points enter the
//! event ([`estimators`]). Analytic rate functions for the normal reference
//! model ([`ratefn`]), seeded synthetic data with exact probability oracles
//! ([`simulate`]) and config-driven studies ([`experiments`]) support
//! verification and benchmarking.

pub mod error;
pub mod estimators;
pub mod events;
pub mod experiments;
pub mod marginal;
pub mod ratefn;
pub mod simulate;
pub mod special;
pub mod transform;

pub use error::{Error, Result};
