pub mod cli;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod operator;
pub mod oracle;
pub mod potentials;
pub mod thermo;
mod quadrature;

pub use error::{Error, Result};
