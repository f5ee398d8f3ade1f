pub mod config;
pub mod error;
pub mod oct;
pub mod propagator;
pub mod quadrature;
pub mod rotor;
pub mod runner;
pub mod spectral;
pub mod thermal;
mod tridiag;
pub mod units;

pub use error::{Error, Result};
