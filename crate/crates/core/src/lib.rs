//! Numerical laboratory for classical dynamics emerging from unitary
//! Schrödinger evolution restricted to manifolds of localized states.
//!
//! Units: ħ = c = 1.

pub mod environment;
pub mod error;
pub mod hilbert;
pub mod manifolds;
pub mod oracle;
pub mod potential;
pub mod projection;
pub mod systems;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
