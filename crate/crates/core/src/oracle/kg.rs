use super::{push_sample, ClassicalState};
use crate::error::{Error, Result};
use crate::projection::TrajectoryRecord;
use crate::systems::{FieldLattice, SiteSource};

/// Sourced lattice Klein–Gordon system φ̈ − Δ_hφ + m²φ = J(t).
#[derive(Debug, Clone, PartialEq)]
pub struct KGParams {
    pub lattice: FieldLattice,
    pub source: SiteSource,
}

impl KGParams {
    pub(crate) fn check_step(&self, dt: f64) -> Result<()> {
        check_cfl(&self.lattice, dt)
    }

    pub(crate) fn acceleration(&self, phi: &[f64], t: f64) -> Vec<f64> {
        let lap = self.lattice.laplacian(phi);
        let m2 = self.lattice.m * self.lattice.m;
        (0..phi.len()).map(|i| lap[i] - m2 * phi[i] + self.source.value(i, t)).collect()
    }
}

pub(crate) fn check_cfl(lattice: &FieldLattice, dt: f64) -> Result<()> {
    let adt = dt.abs();
    if !(adt > 0.0) || !(adt < lattice.h) || !(adt * lattice.m < 0.5) {
        return Err(Error::Config(format!(
            "time step dt = {dt} violates dt < h = {} and dt·m < 0.5 (m = {})",
            lattice.h, lattice.m
        )));
    }
    Ok(())
}

/// One kick–drift–kick leapfrog step; the source is sampled at the kicks.
/// Negative `dt` steps backwards.
pub fn kg_step(s: &ClassicalState, params: &KGParams, dt: f64) -> Result<ClassicalState> {
    params.check_step(dt)?;
    let n = params.lattice.n;
    if s.phi.len() != n || s.pi.len() != n {
        return Err(Error::Dimension { expected: n, got: s.phi.len() });
    }
    let mut next = s.clone();
    let f0 = params.acceleration(&next.phi, s.t);
    for i in 0..n {
        next.pi[i] += 0.5 * dt * f0[i];
        next.phi[i] += dt * next.pi[i];
    }
    let f1 = params.acceleration(&next.phi, s.t + dt);
    for i in 0..n {
        next.pi[i] += 0.5 * dt * f1[i];
    }
    next.t = s.t + dt;
    Ok(next)
}

/// Discrete field energy including −Jφ at the state time.
pub fn kg_energy(s: &ClassicalState, params: &KGParams) -> f64 {
    let j = params.source.values(params.lattice.n, s.t);
    params.lattice.energy(&s.phi, &s.pi, &j)
}

/// Runs `round(T/dt)` steps, recording every `every`-th state (and the last).
pub fn run_kg(s0: &ClassicalState, params: &KGParams, dt: f64, total: f64, every: usize) -> Result<TrajectoryRecord> {
    let n = params.lattice.n;
    let names = (0..n).map(|i| format!("phi_c[{i}]")).chain((0..n).map(|i| format!("pi_c[{i}]"))).collect();
    let mut rec = TrajectoryRecord::new(names);
    let steps = (total / dt).round() as usize;
    let every = every.max(1);
    let mut s = s0.clone();
    push_sample(&mut rec, s.t, s.field_coords(), kg_energy(&s, params));
    for k in 1..=steps {
        s = kg_step(&s, params, dt)?;
        if !s.is_finite() {
            return Err(Error::Domain { step: k, reason: "non-finite classical state".into() });
        }
        if k % every == 0 || k == steps {
            push_sample(&mut rec, s.t, s.field_coords(), kg_energy(&s, params));
        }
    }
    Ok(rec)
}
