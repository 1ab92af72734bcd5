//! Grid Hamiltonians for the particle, lattice-field, coupled and mode systems.
//!
//! Lattice field on N sites with spacing h:
//!
//! Ĥ_field = Σ_i [ π̂_i²/2 + m²φ_i²/2 − J_i(t) φ_i ] h + Σ_bonds ((φ_j − φ_i)/h)² h/2
//!
//! with π̂_i = −(i/h)∂/∂φ_i, so the kinetic coefficient per amplitude axis is
//! 1/(2h).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{ConfigGrid, HamiltonianSpec, Stencil, TimeFn};
use crate::manifolds::EMModeChart;
use crate::potential::Polynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// φ = 0 on ghost sites beyond both ends.
    Fixed,
    #[default]
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldLattice {
    pub n: usize,
    pub h: f64,
    pub m: f64,
    pub boundary: Boundary,
}

impl FieldLattice {
    pub fn new(n: usize, h: f64, m: f64, boundary: Boundary) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("field lattice needs at least one site".into()));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Config(format!("field.h = {h} must be positive")));
        }
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::Config(format!("field.m = {m} must be non-negative")));
        }
        Ok(FieldLattice { n, h, m, boundary })
    }

    /// Site positions x_i = (i − (N−1)/2)·h, centred on the origin.
    pub fn site_positions(&self) -> Vec<f64> {
        let c = 0.5 * (self.n as f64 - 1.0);
        (0..self.n).map(|i| (i as f64 - c) * self.h).collect()
    }

    /// Displacement x − a, wrapped to the nearest image on a periodic lattice
    /// of length N·h. A single site is never wrapped.
    pub fn displacement(&self, x: f64, a: f64) -> f64 {
        let d = x - a;
        match self.boundary {
            Boundary::Periodic if self.n > 1 => {
                let len = self.n as f64 * self.h;
                d - len * (d / len).round()
            }
            _ => d,
        }
    }

    fn bonds(&self) -> Vec<(Option<usize>, Option<usize>)> {
        let n = self.n;
        match self.boundary {
            Boundary::Fixed => (0..=n).map(|i| (i.checked_sub(1), (i < n).then_some(i))).collect(),
            Boundary::Periodic if n == 1 => Vec::new(),
            Boundary::Periodic => (0..n).map(|i| (Some(i), Some((i + 1) % n))).collect(),
        }
    }

    /// Σ_bonds ((φ_j − φ_i)/h)² h/2.
    pub fn gradient_energy(&self, phi: &[f64]) -> f64 {
        let val = |s: Option<usize>| s.map_or(0.0, |i| phi[i]);
        self.bonds().iter().map(|&(i, j)| (val(j) - val(i)).powi(2)).sum::<f64>() * 0.5 / self.h
    }

    /// Lattice Laplacian (φ_{i+1} − 2φ_i + φ_{i−1})/h², equal to
    /// −(1/h)∂(gradient energy)/∂φ_i.
    pub fn laplacian(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        let val = |s: Option<usize>| s.map_or(0.0, |i| phi[i]);
        for &(i, j) in &self.bonds() {
            let d = (val(j) - val(i)) / (self.h * self.h);
            if let Some(i) = i {
                out[i] += d;
            }
            if let Some(j) = j {
                out[j] -= d;
            }
        }
        out
    }

    /// Classical energy h Σ (π²/2 + m²φ²/2 − Jφ) + gradient energy.
    pub fn energy(&self, phi: &[f64], pi: &[f64], j: &[f64]) -> f64 {
        let local: f64 = (0..self.n).map(|i| 0.5 * pi[i] * pi[i] + 0.5 * self.m * self.m * phi[i] * phi[i] - j[i] * phi[i]).sum();
        local * self.h + self.gradient_energy(phi)
    }
}

/// External site source J_i(t) = offset_i + amplitude_i · sin(Ω t).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSource {
    #[serde(default)]
    pub offset: Vec<f64>,
    #[serde(default)]
    pub amplitude: Vec<f64>,
    #[serde(default)]
    pub omega: f64,
}

impl SiteSource {
    pub fn zero() -> Self {
        SiteSource::default()
    }

    pub fn constant(offset: Vec<f64>) -> Self {
        SiteSource { offset, ..Default::default() }
    }

    pub fn value(&self, i: usize, t: f64) -> f64 {
        let off = self.offset.get(i).copied().unwrap_or(0.0);
        let amp = self.amplitude.get(i).copied().unwrap_or(0.0);
        off + amp * (self.omega * t).sin()
    }

    pub fn values(&self, n: usize, t: f64) -> Vec<f64> {
        (0..n).map(|i| self.value(i, t)).collect()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.omega != 0.0 && self.amplitude.iter().any(|a| *a != 0.0)
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.offset.len() > n || self.amplitude.len() > n {
            return Err(Error::Config(format!("source has more entries than the {n} lattice sites")));
        }
        Ok(())
    }
}

/// Adds the lattice-field terms acting on amplitude axes `offset..offset+N`.
pub fn add_field(spec: HamiltonianSpec, lattice: &FieldLattice, source: &SiteSource, offset: usize) -> Result<HamiltonianSpec> {
    source.check_len(lattice.n)?;
    let n = lattice.n;
    let mut spec = spec;
    for i in 0..n {
        spec = spec.with_kinetic(offset + i, 0.5 / lattice.h);
    }
    let lat = lattice.clone();
    let src = source.clone();
    spec = spec.with_potential(move |q| {
        let phi = &q[offset..offset + n];
        let local: f64 = phi.iter().enumerate().map(|(i, f)| 0.5 * lat.m * lat.m * f * f - src.value(i, 0.0) * f).sum();
        // the sin(Ωt) part is added as a driven term; at t = 0 it vanishes
        local * lat.h + lat.gradient_energy(phi)
    });
    if source.is_time_dependent() {
        let h = lattice.h;
        let amp = source.amplitude.clone();
        let omega = source.omega;
        spec = spec.with_driven(
            move |q| -h * amp.iter().enumerate().map(|(i, a)| a * q[offset + i]).sum::<f64>(),
            Arc::new(move |t: f64| (omega * t).sin()) as TimeFn,
        );
    }
    Ok(spec)
}

/// Ĥ = −(1/2M)∂² + V(x) on a one-axis grid.
pub fn particle_hamiltonian(grid: Arc<ConfigGrid>, stencil: Stencil, mass: f64, potential: &Polynomial) -> HamiltonianSpec {
    let v = potential.clone();
    HamiltonianSpec::new(grid, stencil).with_kinetic(0, 0.5 / mass).with_potential(move |q| v.eval(q[0]))
}

/// Lattice field alone on axes 0..N.
pub fn field_hamiltonian(grid: Arc<ConfigGrid>, stencil: Stencil, lattice: &FieldLattice, source: &SiteSource) -> Result<HamiltonianSpec> {
    check_axes(&grid, lattice.n)?;
    add_field(HamiltonianSpec::new(grid, stencil), lattice, source, 0)
}

/// Particle coupled to the lattice field on axes (x, φ_0, …):
///
/// Ĥ = −(1/2M)∂²_x + V(x) + Ĥ_field − g h Σ_i ρ_int(x_i − x) φ_i
///
/// where ρ_int is a normalized Gaussian of width `sigma_int` (of the nearest
/// image distance on a periodic lattice). On a product
/// chart of width σ its expectation involves a Gaussian of width
/// √(σ_int² + σ²), see [`source_width`].
pub fn coupled_hamiltonian(
    grid: Arc<ConfigGrid>,
    stencil: Stencil,
    mass: f64,
    potential: &Polynomial,
    lattice: &FieldLattice,
    source: &SiteSource,
    g: f64,
    sigma_int: f64,
) -> Result<HamiltonianSpec> {
    check_axes(&grid, lattice.n + 1)?;
    if !(sigma_int > 0.0) {
        return Err(Error::Config(format!("coupling.sigma = {sigma_int} must be positive")));
    }
    let v = potential.clone();
    let sites = lattice.site_positions();
    let h = lattice.h;
    let lat = lattice.clone();
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma_int);
    let spec = HamiltonianSpec::new(grid, stencil).with_kinetic(0, 0.5 / mass).with_potential(move |q| {
        let x = q[0];
        let int: f64 = sites
            .iter()
            .enumerate()
            .map(|(i, s)| norm * (-lat.displacement(*s, x).powi(2) / (2.0 * sigma_int * sigma_int)).exp() * q[1 + i])
            .sum();
        v.eval(x) - g * h * int
    });
    add_field(spec, lattice, source, 1)
}

/// Width of the density entering the on-chart coupling energy for a packet
/// of width σ and an interaction profile of width σ_int.
pub fn source_width(sigma: f64, sigma_int: f64) -> f64 {
    (sigma * sigma + sigma_int * sigma_int).sqrt()
}

/// Dipole-approximated particle–mode Hamiltonian on axes (x, A_0, …):
///
/// Ĥ = (p̂ − qΣA_k)²/2M + qΦ_ext(x) + Σ_k (Π̂_k² + k²A_k²)/2.
pub fn em_hamiltonian(grid: Arc<ConfigGrid>, stencil: Stencil, chart: &EMModeChart) -> Result<HamiltonianSpec> {
    let nm = chart.modes.len();
    check_axes(&grid, 1 + nm)?;
    let mass = chart.particle.mass;
    let q = chart.q;
    let phi = chart.phi_ext.clone();
    let ks: Vec<f64> = chart.modes.iter().map(|m| m.k).collect();
    let mut spec = HamiltonianSpec::new(grid, stencil).with_kinetic(0, 0.5 / mass);
    for i in 0..nm {
        spec = spec.with_kinetic(1 + i, 0.5);
    }
    spec = spec
        .with_momentum_coupling(0, move |c| -q / mass * c[1..].iter().sum::<f64>())
        .with_potential(move |c| {
            let a_tot: f64 = c[1..].iter().sum();
            let modes: f64 = c[1..].iter().zip(&ks).map(|(a, k)| 0.5 * k * k * a * a).sum();
            q * q * a_tot * a_tot / (2.0 * mass) + q * phi.eval(c[0]) + modes
        });
    Ok(spec)
}

fn check_axes(grid: &ConfigGrid, expected: usize) -> Result<()> {
    if grid.ndim() != expected {
        return Err(Error::Dimension { expected, got: grid.ndim() });
    }
    Ok(())
}
