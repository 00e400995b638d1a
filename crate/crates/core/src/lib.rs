//! Spectral zeta functions of Laplacians on self-similar sets.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod special;
pub mod spectrum;
pub mod zeta;

pub use error::{Error, Result};
pub use model::FractalModel;
