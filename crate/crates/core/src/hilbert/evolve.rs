//! Norm-preserving time stepping: Crank–Nicolson (implicit midpoint) for
//! general Hamiltonians and an eigenbasis propagator for time-independent
//! ones on small grids.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::operator::HamiltonianSpec;
use super::state::{raw_inner, QuantumState};
use crate::error::{Error, Result};

/// Grids up to this size use a precomputed dense Cayley propagator when the
/// Hamiltonian is time independent.
pub const DENSE_LIMIT: usize = 600;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Relative residual target of each linear solve.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-13, max_iterations: 2000 }
    }
}

/// Crank–Nicolson propagator (1 + iΔtĤ/2) Ψₙ₊₁ = (1 − iΔtĤ/2) Ψₙ with Ĥ at
/// the step midpoint.
pub struct CrankNicolson<'a> {
    h: &'a HamiltonianSpec,
    dt: f64,
    options: SolverOptions,
    dense: Option<DMatrix<C64>>,
}

impl<'a> CrankNicolson<'a> {
    pub fn new(h: &'a HamiltonianSpec, dt: f64) -> Self {
        Self::with_options(h, dt, SolverOptions::default())
    }

    pub fn with_options(h: &'a HamiltonianSpec, dt: f64, options: SolverOptions) -> Self {
        let n = h.grid().total_points();
        let dense = (!h.is_time_dependent() && n <= DENSE_LIMIT).then(|| {
            let hm = h.dense_matrix(0.0);
            let half = C64::new(0.0, 0.5 * dt);
            let id = DMatrix::<C64>::identity(n, n);
            let a = &id + &hm * half;
            let b = &id - &hm * half;
            a.lu().solve(&b).expect("1 + iΔtH/2 is invertible for Hermitian H")
        });
        CrankNicolson { h, dt, options, dense }
    }

    /// Advances `psi` in place from time `t` by one step; `step` labels errors.
    pub fn step(&self, psi: &mut QuantumState, t: f64, step: usize) -> Result<()> {
        if let Some(m) = &self.dense {
            let v = DVector::from_column_slice(psi.amplitudes());
            let w = m * v;
            psi.amplitudes_mut().copy_from_slice(w.as_slice());
            return Ok(());
        }
        let n = psi.len();
        let tm = t + 0.5 * self.dt;
        let half = C64::new(0.0, 0.5 * self.dt);
        let mut hpsi = vec![C64::new(0.0, 0.0); n];
        self.h.apply_raw(psi.amplitudes(), &mut hpsi, tm);
        let rhs: Vec<C64> = psi.amplitudes().iter().zip(&hpsi).map(|(z, h)| z - half * h).collect();
        // explicit predictor as the initial guess
        let guess: Vec<C64> = psi.amplitudes().iter().zip(&hpsi).map(|(z, h)| z - 2.0 * half * h).collect();
        let apply = |x: &[C64], out: &mut [C64]| {
            self.h.apply_raw(x, out, tm);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = xi + half * *o;
            }
        };
        let (x, residual) = bicgstab(apply, &rhs, guess, self.options);
        if !(residual <= self.options.tolerance) {
            return Err(Error::SolverDivergence { step, residual });
        }
        psi.amplitudes_mut().copy_from_slice(&x);
        Ok(())
    }
}

/// Evolves Ψ0 from t0 over `steps` Crank–Nicolson steps of size dt.
pub fn evolve(psi0: &QuantumState, h: &HamiltonianSpec, t0: f64, dt: f64, steps: usize) -> Result<QuantumState> {
    let mut psi = psi0.clone();
    evolve_with(&mut psi, h, t0, dt, steps, |_, _, _| {})?;
    Ok(psi)
}

/// Like [`evolve`], calling `observe(step, t, Ψ)` after every step.
pub fn evolve_with(
    psi: &mut QuantumState,
    h: &HamiltonianSpec,
    t0: f64,
    dt: f64,
    steps: usize,
    mut observe: impl FnMut(usize, f64, &QuantumState),
) -> Result<()> {
    if !(**psi.grid() == **h.grid()) {
        return Err(Error::GridMismatch("state is not on the Hamiltonian's grid".into()));
    }
    psi.check_finite()?;
    let cn = CrankNicolson::new(h, dt);
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        cn.step(psi, t, s)?;
        observe(s + 1, t + dt, psi);
    }
    Ok(())
}

/// Unpreconditioned BiCGSTAB for a complex linear operator. Returns the
/// solution and its relative residual.
fn bicgstab(
    apply: impl Fn(&[C64], &mut [C64]),
    b: &[C64],
    mut x: Vec<C64>,
    options: SolverOptions,
) -> (Vec<C64>, f64) {
    let n = b.len();
    let bnorm = raw_inner(b, b).re.sqrt();
    if bnorm == 0.0 {
        return (vec![C64::new(0.0, 0.0); n], 0.0);
    }
    let norm = |v: &[C64]| raw_inner(v, v).re.sqrt();
    let mut ax = vec![C64::new(0.0, 0.0); n];
    apply(&x, &mut ax);
    let mut r: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let r_hat = r.clone();
    let mut rel = norm(&r) / bnorm;
    if rel <= options.tolerance {
        return (x, rel);
    }
    let mut rho = C64::new(1.0, 0.0);
    let mut alpha = C64::new(1.0, 0.0);
    let mut omega = C64::new(1.0, 0.0);
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut p = vec![C64::new(0.0, 0.0); n];
    let mut s = vec![C64::new(0.0, 0.0); n];
    let mut t = vec![C64::new(0.0, 0.0); n];
    for _ in 0..options.max_iterations {
        let rho_new = raw_inner(&r_hat, &r);
        if rho_new.norm() == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply(&p, &mut v);
        alpha = rho_new / raw_inner(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= options.tolerance {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            apply(&x, &mut ax);
            let res: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            return (x, norm(&res) / bnorm);
        }
        apply(&s, &mut t);
        let tt = raw_inner(&t, &t).re;
        omega = if tt > 0.0 { raw_inner(&t, &s) / tt } else { C64::new(0.0, 0.0) };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        rho = rho_new;
        rel = norm(&r) / bnorm;
        if rel <= options.tolerance || omega.norm() == 0.0 {
            break;
        }
    }
    apply(&x, &mut ax);
    let res: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    (x, norm(&res) / bnorm)
}

/// Exact propagator exp(−iĤt) for a time-independent Hamiltonian, from the
/// eigendecomposition of its grid matrix. Coefficients are plain (unweighted)
/// projections onto the orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    energies: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl SpectralPropagator {
    pub fn new(h: &HamiltonianSpec) -> Result<Self> {
        if h.is_time_dependent() {
            return Err(Error::Config("spectral propagation needs a time-independent Hamiltonian".into()));
        }
        let m = h.dense_matrix(0.0);
        // symmetrize away round-off before the Hermitian solver
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(SpectralPropagator { energies, vectors })
    }

    /// Eigenvalues in ascending order.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvectors as columns, ascending energy.
    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn coefficients(&self, psi: &QuantumState) -> DVector<C64> {
        self.vectors.adjoint() * DVector::from_column_slice(psi.amplitudes())
    }

    pub fn amplitudes(&self, coeffs: &DVector<C64>) -> Vec<C64> {
        (&self.vectors * coeffs).as_slice().to_vec()
    }

    /// c ← exp(−iEt) c
    pub fn propagate(&self, coeffs: &mut DVector<C64>, t: f64) {
        for (c, e) in coeffs.iter_mut().zip(&self.energies) {
            *c *= C64::from_polar(1.0, -e * t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::grid::{ConfigGrid, GridAxis};
    use crate::hilbert::operator::{expectation, Observable};
    use crate::hilbert::state::inner;
    use crate::hilbert::stencil::Stencil;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid1d(n: usize, l: f64) -> Arc<ConfigGrid> {
        Arc::new(ConfigGrid::new(vec![GridAxis::new("x", -l, l, n).unwrap()]).unwrap())
    }

    fn coherent(g: &Arc<ConfigGrid>, a: f64) -> QuantumState {
        QuantumState::from_fn(g.clone(), |x| C64::new((-(x[0] - a).powi(2) / 2.0).exp(), 0.0)).normalized().unwrap()
    }

    #[test]
    fn coherent_state_returns_after_one_period() {
        let g = grid1d(128, 8.0);
        let h = HamiltonianSpec::new(g.clone(), Stencil::Sinc).with_kinetic(0, 0.5).with_potential(|x| 0.5 * x[0] * x[0]);
        let psi0 = coherent(&g, 1.0);
        let steps = 2000;
        let psi = evolve(&psi0, &h, 0.0, 2.0 * PI / steps as f64, steps).unwrap();
        let f = inner(&psi, &psi0).unwrap().norm();
        assert!(f > 1.0 - 1e-4, "{f}");
    }

    #[test]
    fn iterative_path_preserves_norm_over_1000_steps() {
        // two axes force the BiCGSTAB path
        let g = Arc::new(
            ConfigGrid::new(vec![
                GridAxis::new("x", -7.0, 7.0, 40).unwrap(),
                GridAxis::new("y", -7.0, 7.0, 40).unwrap(),
            ])
            .unwrap(),
        );
        let h = HamiltonianSpec::new(g.clone(), Stencil::Sinc)
            .with_kinetic(0, 0.5)
            .with_kinetic(1, 0.5)
            .with_potential(|x| 0.5 * x[0] * x[0] + 0.5 * x[1] * x[1] + 0.1 * x[0] * x[1])
            .with_driven(|x| -x[1], Arc::new(|t: f64| 0.3 * t.sin()));
        let psi0 = QuantumState::from_fn(g.clone(), |x| {
            C64::from_polar((-(x[0] - 1.0).powi(2) / 2.0 - x[1] * x[1] / 2.0).exp(), 0.5 * x[1])
        })
        .normalized()
        .unwrap();
        let psi = evolve(&psi0, &h, 0.0, 0.01, 1000).unwrap();
        assert!((psi.norm() - psi0.norm()).abs() < 1e-8, "{}", psi.norm() - 1.0);
    }

    #[test]
    fn free_ground_gaussian_stays_centered() {
        let g = grid1d(256, 10.0);
        let h = HamiltonianSpec::new(g.clone(), Stencil::Sinc).with_kinetic(0, 0.5);
        let psi = evolve(&coherent(&g, 0.0), &h, 0.0, 0.01, 50).unwrap();
        assert!(expectation(&Observable::Position(0), &psi, h.derivatives()).abs() < 1e-6);
    }

    #[test]
    fn quartic_energy_conserved() {
        let g = grid1d(160, 7.0);
        let h = HamiltonianSpec::new(g.clone(), Stencil::Sinc)
            .with_kinetic(0, 0.5)
            .with_potential(|x| 0.5 * x[0] * x[0] + 0.1 * x[0].powi(4));
        let psi0 = coherent(&g, 1.2);
        let e0 = h.energy(&psi0, 0.0).unwrap();
        let psi = evolve(&psi0, &h, 0.0, 0.01, 1000).unwrap();
        let e1 = h.energy(&psi, 10.0).unwrap();
        assert!(((e1 - e0) / e0).abs() < 1e-6, "{e0} {e1}");
    }

    #[test]
    fn dense_and_iterative_paths_agree() {
        let g = grid1d(64, 7.0);
        let h = HamiltonianSpec::new(g.clone(), Stencil::Fd3).with_kinetic(0, 0.5).with_potential(|x| 0.5 * x[0] * x[0]);
        let driven = h.clone().with_driven(|_| 0.0, Arc::new(|_| 0.0));
        let psi0 = coherent(&g, 0.7);
        let a = evolve(&psi0, &h, 0.0, 0.05, 40).unwrap();
        let b = evolve(&psi0, &driven, 0.0, 0.05, 40).unwrap();
        let mut d = a.clone();
        d.axpy(C64::new(-1.0, 0.0), &b).unwrap();
        assert!(d.norm() < 1e-10, "{}", d.norm());
    }

    #[test]
    fn spectral_propagator_matches_ground_energy() {
        let g = grid1d(96, 8.0);
        let h = HamiltonianSpec::new(g.clone(), Stencil::Sinc).with_kinetic(0, 0.5).with_potential(|x| 0.5 * x[0] * x[0]);
        let sp = SpectralPropagator::new(&h).unwrap();
        assert!((sp.energies()[0] - 0.5).abs() < 1e-10);
        assert!((sp.energies()[3] - 3.5).abs() < 1e-8);
        let psi0 = coherent(&g, 1.0);
        let mut c = sp.coefficients(&psi0);
        sp.propagate(&mut c, 2.0 * PI);
        let psi = QuantumState::new(g.clone(), sp.amplitudes(&c)).unwrap();
        assert!(inner(&psi, &psi0).unwrap().norm() > 1.0 - 1e-10);
    }
}
