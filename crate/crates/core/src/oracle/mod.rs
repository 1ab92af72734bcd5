//! Classical reference integrators: sourced lattice Klein–Gordon, a particle
//! coupled to the lattice field through a smeared source, and a charged
//! particle coupled to transverse modes.

mod coupled;
mod em;
mod kg;
mod newton;

use serde::{Deserialize, Serialize};

use crate::projection::TrajectoryRecord;

pub use coupled::{
    coupled_energy, coupled_step, field_momentum, lattice_source_force, run_coupled, screened_poisson, smeared_force,
    spectral_derivative, CoupledParams,
};
pub use em::{em_energy, em_mode_step, run_em, EMParams};
pub use kg::{kg_energy, kg_step, run_kg, KGParams};
pub use newton::{newton_advance, newton_energy, newton_step, NewtonParams};

/// Classical phase-space point. For the mode system `phi`/`pi` hold the mode
/// amplitudes A_k and momenta Π_k.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassicalState {
    pub a: f64,
    pub p: f64,
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
    pub t: f64,
}

impl ClassicalState {
    pub fn field(phi: Vec<f64>, pi: Vec<f64>) -> Self {
        ClassicalState { phi, pi, ..Default::default() }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.p.is_finite() && self.phi.iter().chain(&self.pi).all(|v| v.is_finite())
    }

    /// (φ…, π…)
    pub fn field_coords(&self) -> Vec<f64> {
        self.phi.iter().chain(&self.pi).cloned().collect()
    }

    /// (a, p, φ…, π…)
    pub fn all_coords(&self) -> Vec<f64> {
        let mut c = vec![self.a, self.p];
        c.extend(self.field_coords());
        c
    }
}

/// How the particle samples the external potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ForceModel {
    /// −V′(a)
    Point,
    /// −E[V′(a + σZ)], the force on a packet of width σ.
    Smeared { sigma: f64 },
}

impl ForceModel {
    pub(crate) fn force(&self, v: &crate::potential::Polynomial, a: f64) -> f64 {
        let dv = v.derivative();
        match self {
            ForceModel::Point => -dv.eval(a),
            ForceModel::Smeared { sigma } => -dv.gaussian_mean(a, *sigma),
        }
    }

    pub(crate) fn potential(&self, v: &crate::potential::Polynomial, a: f64) -> f64 {
        match self {
            ForceModel::Point => v.eval(a),
            ForceModel::Smeared { sigma } => v.gaussian_mean(a, *sigma),
        }
    }
}

pub(crate) fn push_sample(rec: &mut TrajectoryRecord, t: f64, coords: Vec<f64>, energy: f64) {
    rec.push(t, coords, 0.0, energy, f64::NAN);
}
