use nalgebra::{DMatrix, DVector};

use super::kg::check_cfl;
use super::{push_sample, ClassicalState, ForceModel};
use crate::error::{Error, Result};
use crate::hilbert::TAIL_TOLERANCE;
use crate::manifolds::WIDTH_FLOOR;
use crate::potential::Polynomial;
use crate::projection::TrajectoryRecord;
use crate::systems::{Boundary, FieldLattice, SiteSource};

/// Particle of mass M in V(a) coupled to the lattice field by
/// −g h Σ_i ρ(x_i − a) φ_i with ρ a normalized Gaussian of width `sigma_src`
/// (nearest-image displacement on a periodic lattice):
///
/// ȧ = p/M, ṗ = F_V(a) − g·F_field(a),
/// φ̈ − Δ_hφ + m²φ = J + g ρ(x − a) (− γ φ̇ with damping γ).
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledParams {
    pub mass: f64,
    pub potential: Polynomial,
    pub force: ForceModel,
    pub lattice: FieldLattice,
    pub source: SiteSource,
    pub g: f64,
    pub sigma_src: f64,
    /// Field velocity damping rate, zero for Hamiltonian runs.
    pub damping: f64,
}

fn density(a: f64, sigma: f64, x: f64) -> f64 {
    gauss(x - a, sigma)
}

fn gauss(d: f64, sigma: f64) -> f64 {
    (-d * d / (2.0 * sigma * sigma)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma)
}

/// −Σ_i ∂_a ρ^σ_a(x_i) φ_i h on the given sites, without tail checks.
pub fn lattice_source_force(a: f64, sigma: f64, phi: &[f64], sites: &[f64], h: f64) -> f64 {
    -phi.iter().zip(sites).map(|(f, x)| density(a, sigma, *x) * (x - a) / (sigma * sigma) * f).sum::<f64>() * h
}

/// Field force on a packet of width σ centred at a, −∂_a Σ_i ρ^σ_a(x_i)φ_i h.
/// Fails when the density at either end of the lattice is not negligible.
pub fn smeared_force(a: f64, sigma: f64, phi: &[f64], sites: &[f64], h: f64) -> Result<f64> {
    if phi.len() != sites.len() {
        return Err(Error::Dimension { expected: sites.len(), got: phi.len() });
    }
    if !(sigma >= WIDTH_FLOOR) {
        return Err(Error::DegenerateChart(format!("sigma = {sigma} is below the floor {WIDTH_FLOOR}")));
    }
    let peak = density(a, sigma, a);
    for (label, x) in [("first site", sites.first()), ("last site", sites.last())] {
        if let Some(x) = x {
            let ratio = density(a, sigma, *x) / peak;
            if ratio > TAIL_TOLERANCE {
                return Err(Error::TailClipping { axis: format!("density at {label}"), ratio, limit: TAIL_TOLERANCE });
            }
        }
    }
    Ok(lattice_source_force(a, sigma, phi, sites, h))
}

impl CoupledParams {
    fn site_density(&self, a: f64, x: f64) -> f64 {
        gauss(self.lattice.displacement(x, a), self.sigma_src)
    }

    fn particle_force(&self, a: f64, phi: &[f64], sites: &[f64]) -> f64 {
        let s2 = self.sigma_src * self.sigma_src;
        let field: f64 = phi
            .iter()
            .zip(sites)
            .map(|(f, x)| {
                let d = self.lattice.displacement(*x, a);
                gauss(d, self.sigma_src) * d / s2 * f
            })
            .sum::<f64>()
            * self.lattice.h;
        self.force.force(&self.potential, a) + self.g * field
    }

    fn field_acceleration(&self, a: f64, phi: &[f64], sites: &[f64], t: f64) -> Vec<f64> {
        let lap = self.lattice.laplacian(phi);
        let m2 = self.lattice.m * self.lattice.m;
        (0..phi.len())
            .map(|i| lap[i] - m2 * phi[i] + self.source.value(i, t) + self.g * self.site_density(a, sites[i]))
            .collect()
    }
}

/// Kick–drift–kick step of the coupled system. With damping γ the field
/// momenta are additionally scaled by e^{−γ dt/2} before and after.
pub fn coupled_step(s: &ClassicalState, params: &CoupledParams, dt: f64) -> Result<ClassicalState> {
    check_cfl(&params.lattice, dt)?;
    let n = params.lattice.n;
    if s.phi.len() != n || s.pi.len() != n {
        return Err(Error::Dimension { expected: n, got: s.phi.len() });
    }
    let sites = params.lattice.site_positions();
    let damp = (-0.5 * params.damping * dt.abs()).exp();
    let mut next = s.clone();
    next.pi.iter_mut().for_each(|p| *p *= damp);
    let fp = params.particle_force(next.a, &next.phi, &sites);
    let ff = params.field_acceleration(next.a, &next.phi, &sites, s.t);
    next.p += 0.5 * dt * fp;
    next.pi.iter_mut().zip(&ff).for_each(|(p, f)| *p += 0.5 * dt * f);
    next.a += dt * next.p / params.mass;
    for i in 0..n {
        next.phi[i] += dt * next.pi[i];
    }
    let fp = params.particle_force(next.a, &next.phi, &sites);
    let ff = params.field_acceleration(next.a, &next.phi, &sites, s.t + dt);
    next.p += 0.5 * dt * fp;
    next.pi.iter_mut().zip(&ff).for_each(|(p, f)| *p += 0.5 * dt * f);
    next.pi.iter_mut().for_each(|p| *p *= damp);
    next.t = s.t + dt;
    Ok(next)
}

/// p²/2M + V + field energy − g h Σ ρ φ.
pub fn coupled_energy(s: &ClassicalState, params: &CoupledParams) -> f64 {
    let sites = params.lattice.site_positions();
    let j = params.source.values(params.lattice.n, s.t);
    let coupling: f64 = s.phi.iter().zip(&sites).map(|(f, x)| params.site_density(s.a, *x) * f).sum::<f64>() * params.lattice.h;
    s.p * s.p / (2.0 * params.mass)
        + params.force.potential(&params.potential, s.a)
        + params.lattice.energy(&s.phi, &s.pi, &j)
        - params.g * coupling
}

/// Records (a, p, φ…, π…) every `every` steps and at the end.
pub fn run_coupled(s0: &ClassicalState, params: &CoupledParams, dt: f64, total: f64, every: usize) -> Result<TrajectoryRecord> {
    let n = params.lattice.n;
    let mut names = vec!["a".to_string(), "p".to_string()];
    names.extend((0..n).map(|i| format!("phi_c[{i}]")));
    names.extend((0..n).map(|i| format!("pi_c[{i}]")));
    let mut rec = TrajectoryRecord::new(names);
    let steps = (total / dt).round() as usize;
    let every = every.max(1);
    let mut s = s0.clone();
    push_sample(&mut rec, s.t, s.all_coords(), coupled_energy(&s, params));
    for k in 1..=steps {
        s = coupled_step(&s, params, dt)?;
        if !s.is_finite() {
            return Err(Error::Domain { step: k, reason: "non-finite classical state".into() });
        }
        if k % every == 0 || k == steps {
            push_sample(&mut rec, s.t, s.all_coords(), coupled_energy(&s, params));
        }
    }
    Ok(rec)
}

/// Trigonometric-interpolation derivative on a periodic lattice; the
/// Nyquist mode of an even lattice is assigned zero derivative.
pub fn spectral_derivative(n: usize, h: f64) -> DMatrix<f64> {
    let len = n as f64 * h;
    let half = (n as i64 - 1) / 2;
    DMatrix::from_fn(n, n, |j, k| {
        let dx = (j as f64 - k as f64) * h;
        let mut acc = 0.0;
        for m in 1..=half {
            let kap = 2.0 * std::f64::consts::PI * m as f64 / len;
            acc -= 2.0 * kap * (kap * dx).sin();
        }
        acc / n as f64
    })
}

/// Field momentum −h Σ_i π_i (D φ)_i with D the spectral derivative; the
/// generator of continuous translations on a periodic lattice.
pub fn field_momentum(phi: &[f64], pi: &[f64], lattice: &FieldLattice) -> Result<f64> {
    if lattice.boundary != Boundary::Periodic {
        return Err(Error::Config("field momentum needs a periodic lattice".into()));
    }
    let d = spectral_derivative(lattice.n, lattice.h);
    let dphi = &d * DVector::from_column_slice(phi);
    Ok(-lattice.h * pi.iter().zip(dphi.iter()).map(|(p, d)| p * d).sum::<f64>())
}

/// Solves the lattice screened-Poisson problem (−Δ_h + m²)φ = rhs.
pub fn screened_poisson(lattice: &FieldLattice, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = lattice.n;
    let mut a = DMatrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let lap = lattice.laplacian(&unit);
        for i in 0..n {
            a[(i, j)] = -lap[i] + if i == j { lattice.m * lattice.m } else { 0.0 };
        }
        unit[j] = 0.0;
    }
    let sol = a.lu().solve(&DVector::from_column_slice(rhs)).ok_or(Error::Conditioning { condition: f64::INFINITY })?;
    Ok(sol.iter().cloned().collect())
}
