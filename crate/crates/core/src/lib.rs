//! Search-based generation of waypoint perturbations that drive a
//! waypoint-following vessel into unstable or incomplete paths.
//!
//! The crate bundles a reduced-order vessel simulator with line-of-sight
//! guidance, the two competing objectives (waypoint deviation and path
//! instability), NSGA-II with three seeding strategies plus a random-search
//! baseline, and the evaluation tooling: hypervolume, Mann-Whitney U,
//! Vargha-Delaney A12, and autocorrelation-based path classification.

pub mod classify;
pub mod domain;
pub mod error;
pub mod fitness;
pub mod harness;
pub mod search;
pub mod simulator;
pub mod stats;
pub mod vessels;

pub use error::{Error, Result};
