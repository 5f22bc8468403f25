//! Loss landscapes, loss entropy and MD stability for compact neural
//! interatomic potentials.

pub mod analysis;
pub mod dataset;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod landscape;
pub mod md;
pub mod potential;
pub mod rng;
pub mod training;
pub mod units;

pub use error::{Error, Result};
