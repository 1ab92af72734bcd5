//! Truncated quantum systems on tensor-product configuration grids.

mod evolve;
mod grid;
mod operator;
mod state;
mod stencil;

pub use evolve::{evolve, evolve_with, CrankNicolson, SolverOptions, SpectralPropagator, DENSE_LIMIT};
pub use grid::{ConfigGrid, GridAxis, DEFAULT_POINT_BUDGET};
pub use operator::{apply_observable, expectation, Derivatives, DrivenTerm, HamiltonianSpec, Observable, TimeFn};
pub use state::{fubini_study, inner, QuantumState, TAIL_TOLERANCE};
pub use stencil::Stencil;

