//! Proximity worm spread among mobile short-range wireless devices.
//!
//! - [`kinetics`]: contact and transmission rates from the mobility model.
//! - [`ode`]: the mass-action SIR system, its threshold and final size.
//! - [`abm`]: the moving-agent simulator those formulas are checked against.
//! - [`experiments`]: ensembles and simulation-versus-theory comparisons.

pub mod abm;
pub mod error;
pub mod experiments;
pub mod files;
pub mod kinetics;
pub mod ode;
pub mod quadrature;
pub mod rng;
pub mod units;

pub use error::{Error, Result};
