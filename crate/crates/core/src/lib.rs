//! Numerical toolkit for moment-map estimation on compact Lie groups:
//! group/algebra arithmetic, representation actions, rate functions of the
//! associated large-deviation principle, and a Monte Carlo simulator of the
//! tensor-power measurement.

pub mod config;
pub mod error;
pub mod lie;
pub mod moment;
pub mod rate;
pub mod repr;
pub mod sim;

pub use error::{Error, Result};
