pub mod airy;
pub mod cli;
pub mod diagnostics;
pub mod equilibrium;
pub mod error;
pub mod fredholm;
pub mod numeric;
pub mod orthopoly;
pub mod potential;
pub mod quadrature;

pub use error::{Error, Result};
