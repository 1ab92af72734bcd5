use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::{Chart, WIDTH_FLOOR};
use crate::error::{Error, Result};
use crate::hilbert::Observable;

/// Gaussian wave functional on an N-site lattice of spacing h,
///
/// Ψ(φ) ∝ exp(−½ h (φ−φ_c)ᵀ K (φ−φ_c) + i h Σ_i π_c,i φ_i),
///
/// normalized over the N amplitude axes. The site momentum is
/// π̂_i = −(i/h) ∂/∂φ_i, so ⟨φ̂_i⟩ = φ_c,i, ⟨π̂_i⟩ = π_c,i and each φ_i has
/// variance 1/(2h K_ii) when K is diagonal.
///
/// Coordinates are (φ_c,0 … φ_c,N−1, π_c,0 … π_c,N−1). Tangent vectors are
/// plain coordinate derivatives, ∂Ψ/∂φ_c,i = h [K(φ−φ_c)]_i Ψ and
/// ∂Ψ/∂π_c,i = i h φ_i Ψ, i.e. h times the functional derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldChart {
    phi_c: Vec<f64>,
    pi_c: Vec<f64>,
    kernel: DMatrix<f64>,
    h: f64,
    m: f64,
    log_norm: f64,
}

impl FieldChart {
    pub fn new(phi_c: Vec<f64>, pi_c: Vec<f64>, kernel: DMatrix<f64>, h: f64, m: f64) -> Result<Self> {
        let n = phi_c.len();
        if n == 0 || pi_c.len() != n {
            return Err(Error::Dimension { expected: n.max(1), got: pi_c.len() });
        }
        if kernel.nrows() != n || kernel.ncols() != n {
            return Err(Error::Dimension { expected: n, got: kernel.nrows() });
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::DegenerateChart(format!("field.h = {h} must be positive")));
        }
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::DegenerateChart(format!("field.m = {m} must be non-negative")));
        }
        let scale = kernel.amax().max(1.0);
        if (&kernel - kernel.transpose()).amax() > 1e-12 * scale {
            return Err(Error::NotPositiveDefinite("field.K is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(kernel.clone()).eigenvalues;
        let lmin = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lmin > 0.0) {
            return Err(Error::NotPositiveDefinite(format!("field.K has eigenvalue {lmin}")));
        }
        if lmin < WIDTH_FLOOR {
            return Err(Error::DegenerateChart(format!("field.K eigenvalue {lmin} is below the floor {WIDTH_FLOOR}")));
        }
        let log_det_hk: f64 = eig.iter().map(|l| (h * l).ln()).sum();
        let log_norm = 0.25 * (log_det_hk - n as f64 * PI.ln());
        Ok(FieldChart { phi_c, pi_c, kernel, h, m, log_norm })
    }

    /// Kernel K = m·I.
    pub fn with_mass_kernel(phi_c: Vec<f64>, pi_c: Vec<f64>, h: f64, m: f64) -> Result<Self> {
        let n = phi_c.len();
        Self::new(phi_c, pi_c, DMatrix::identity(n, n) * m, h, m)
    }

    pub fn n_sites(&self) -> usize {
        self.phi_c.len()
    }

    pub fn phi_c(&self) -> &[f64] {
        &self.phi_c
    }

    pub fn pi_c(&self) -> &[f64] {
        &self.pi_c
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Variance of φ̂_i, namely [K⁻¹]_ii / (2h).
    pub fn site_variance(&self, i: usize) -> f64 {
        let inv = self.kernel.clone().try_inverse().expect("validated kernel is invertible");
        inv[(i, i)] / (2.0 * self.h)
    }

    /// Same kernel and lattice at new coordinates (φ_c, π_c) taken from `c`.
    pub(crate) fn at(&self, c: &[f64]) -> Self {
        let n = self.n_sites();
        FieldChart { phi_c: c[..n].to_vec(), pi_c: c[n..2 * n].to_vec(), ..self.clone() }
    }

    pub(crate) fn coord_vec(&self) -> Vec<f64> {
        self.phi_c.iter().chain(&self.pi_c).cloned().collect()
    }

    pub(crate) fn names(&self) -> Vec<String> {
        let n = self.n_sites();
        (0..n).map(|i| format!("phi_c[{i}]")).chain((0..n).map(|i| format!("pi_c[{i}]"))).collect()
    }

    pub(crate) fn check_coords(&self) -> Result<()> {
        if self.phi_c.iter().chain(&self.pi_c).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::DegenerateChart("field coordinates must be finite".into()))
        }
    }

    /// ln Ψ(φ), with multipliers for the 2N coordinates in `mult`.
    pub(crate) fn eval_factor(&self, phi: &[f64], mult: &mut [C64]) -> C64 {
        let n = self.n_sites();
        let h = self.h;
        let mut quad = 0.0;
        let mut phase = 0.0;
        for i in 0..n {
            let mut kd = 0.0;
            for j in 0..n {
                kd += self.kernel[(i, j)] * (phi[j] - self.phi_c[j]);
            }
            quad += (phi[i] - self.phi_c[i]) * kd;
            phase += self.pi_c[i] * phi[i];
            mult[i] = C64::new(h * kd, 0.0);
            mult[n + i] = C64::new(0.0, h * phi[i]);
        }
        C64::new(-0.5 * h * quad + self.log_norm, h * phase)
    }

    pub(crate) fn observables(&self, offset: usize) -> Vec<(Observable, f64)> {
        let n = self.n_sites();
        (0..n)
            .map(|i| (Observable::Position(offset + i), 1.0))
            .chain((0..n).map(|i| (Observable::Momentum(offset + i), 1.0 / self.h)))
            .collect()
    }
}

impl Chart for FieldChart {
    fn dim(&self) -> usize {
        2 * self.n_sites()
    }

    fn n_axes(&self) -> usize {
        self.n_sites()
    }

    fn coords(&self) -> Vec<f64> {
        self.coord_vec()
    }

    fn with_coords(&self, c: &[f64]) -> Self {
        self.at(c)
    }

    fn coord_names(&self) -> Vec<String> {
        self.names()
    }

    fn validate(&self) -> Result<()> {
        self.check_coords()
    }

    fn eval_point(&self, q: &[f64], mult: &mut [C64]) -> C64 {
        self.eval_factor(q, mult)
    }

    fn moment_observables(&self) -> Vec<(Observable, f64)> {
        self.observables(0)
    }
}
