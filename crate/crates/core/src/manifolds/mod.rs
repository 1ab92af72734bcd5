//! Gaussian localized-state manifolds: particle wave packets, lattice field
//! functionals, their product, and a particle coupled to transverse modes.
//!
//! Every chart state is a product of single-factor Gaussians on a
//! [`ConfigGrid`] whose axes are ordered particle first, then field sites or
//! modes. Tangent vectors are coordinate derivatives ∂Ψ/∂c_j, all of the form
//! m_j(q)·Ψ(q) for an explicit multiplier m_j.

mod em;
mod field;
mod gram;
mod particle;
mod product;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{expectation, fubini_study, ConfigGrid, Derivatives, Observable, QuantumState, TAIL_TOLERANCE};

pub use em::{EMModeChart, Mode};
pub use field::FieldChart;
pub use gram::{gram, horizontal_basis, horizontal_gram, Gram};
pub use particle::{rho_sigma, ParticleChart};
pub use product::ProductChart;

/// Widths and kernel eigenvalues below this are rejected as degenerate.
pub const WIDTH_FLOOR: f64 = 1e-6;

/// A finite-parameter family of normalized states.
pub trait Chart: Clone + fmt::Debug + Send + Sync {
    /// Number of real coordinates.
    fn dim(&self) -> usize;
    /// Number of grid axes the state lives on.
    fn n_axes(&self) -> usize;
    fn coords(&self) -> Vec<f64>;
    /// Same family (widths, kernels, masses) at new coordinates.
    fn with_coords(&self, coords: &[f64]) -> Self;
    fn coord_names(&self) -> Vec<String>;
    fn validate(&self) -> Result<()>;

    /// Log-amplitude ln Ψ(q) at grid point `q`, writing the tangent
    /// multipliers (∂Ψ/∂c_j)/Ψ into `mult`.
    fn eval_point(&self, q: &[f64], mult: &mut [C64]) -> C64;

    /// Observables whose expectation values, times the given scale, are the
    /// chart coordinates (moment matching).
    fn moment_observables(&self) -> Vec<(Observable, f64)>;

    /// The chart state on `grid`, rejecting clipped tails.
    fn state(&self, grid: &Arc<ConfigGrid>) -> Result<QuantumState> {
        Ok(self.state_and_tangents(grid)?.0)
    }

    /// ∂Ψ/∂c_j in coordinate order.
    fn tangent_basis(&self, grid: &Arc<ConfigGrid>) -> Result<Vec<QuantumState>> {
        Ok(self.state_and_tangents(grid)?.1)
    }

    fn state_and_tangents(&self, grid: &Arc<ConfigGrid>) -> Result<(QuantumState, Vec<QuantumState>)> {
        self.validate()?;
        if grid.ndim() != self.n_axes() {
            return Err(Error::Dimension { expected: self.n_axes(), got: grid.ndim() });
        }
        let n = grid.total_points();
        let d = self.dim();
        let mut amps = vec![C64::new(0.0, 0.0); n];
        let mut tangents = vec![vec![C64::new(0.0, 0.0); n]; d];
        let mut q = vec![0.0; grid.ndim()];
        let mut mult = vec![C64::new(0.0, 0.0); d];
        for (i, amp) in amps.iter_mut().enumerate() {
            grid.coords(i, &mut q);
            let psi = self.eval_point(&q, &mut mult).exp();
            *amp = psi;
            for (t, m) in tangents.iter_mut().zip(&mult) {
                t[i] = m * psi;
            }
        }
        let state = QuantumState::new(grid.clone(), amps)?;
        state.check_tails(TAIL_TOLERANCE)?;
        let tangents = tangents.into_iter().map(|t| QuantumState::new(grid.clone(), t)).collect::<Result<Vec<_>>>()?;
        Ok((state, tangents))
    }

    /// Moment-matching fit with this chart's widths and kernels held fixed.
    fn retract(&self, psi: &QuantumState, derivs: &Derivatives) -> Result<Retraction<Self>> {
        let coords: Vec<f64> =
            self.moment_observables().iter().map(|(op, scale)| scale * expectation(op, psi, derivs)).collect();
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        let chart = self.with_coords(&coords);
        let fitted = chart.state(psi.grid())?;
        let residual = fubini_study(psi, &fitted)?;
        Ok(Retraction { chart, residual })
    }
}

/// Result of [`Chart::retract`]: the fitted chart and the Fubini–Study
/// distance from the input state to the fitted chart state.
#[derive(Debug, Clone)]
pub struct Retraction<C> {
    pub chart: C,
    pub residual: f64,
}

pub(crate) fn check_width(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < WIDTH_FLOOR {
        return Err(Error::DegenerateChart(format!("{name} = {value} is below the floor {WIDTH_FLOOR}")));
    }
    Ok(())
}
