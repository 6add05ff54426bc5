//! Entanglement transfer from a two-mode squeezed field to two two-level
//! atoms through local Jaynes-Cummings interactions in two cavities.

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod fieldprep;
pub mod jcdynamics;
pub mod numerics;
pub mod sweep;
pub mod tensorops;

pub use error::{Error, Result};
