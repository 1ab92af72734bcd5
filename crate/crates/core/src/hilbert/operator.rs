use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::grid::ConfigGrid;
use super::state::{raw_inner, QuantumState};
use super::stencil::{AxisMatrix, Stencil};
use crate::error::{Error, Result};

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// First and second derivative matrices for every axis of a grid.
#[derive(Debug, Clone)]
pub struct Derivatives {
    stencil: Stencil,
    first: Vec<AxisMatrix>,
    second: Vec<AxisMatrix>,
}

impl Derivatives {
    pub fn new(grid: &ConfigGrid, stencil: Stencil) -> Self {
        let first = grid
            .axes()
            .iter()
            .map(|a| AxisMatrix::first_derivative(stencil, a.n, a.spacing()))
            .collect();
        let second = grid
            .axes()
            .iter()
            .map(|a| AxisMatrix::second_derivative(stencil, a.n, a.spacing()))
            .collect();
        Derivatives { stencil, first, second }
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    /// out += scale · ∂_k input
    pub(crate) fn add_first(&self, grid: &ConfigGrid, k: usize, input: &[C64], out: &mut [C64], scale: C64) {
        self.first[k].apply_along(grid, k, input, out, scale);
    }

    /// out += scale · ∂²_k input
    pub(crate) fn add_second(&self, grid: &ConfigGrid, k: usize, input: &[C64], out: &mut [C64], scale: C64) {
        self.second[k].apply_along(grid, k, input, out, scale);
    }
}

/// Operators whose expectation values are read off a state.
#[derive(Debug, Clone)]
pub enum Observable {
    /// Coordinate of axis k.
    Position(usize),
    /// Conjugate momentum −i∂ of axis k.
    Momentum(usize),
    /// Arbitrary real multiplication operator sampled on the grid.
    Diagonal(Vec<f64>),
}

/// Returns ÔΨ.
pub fn apply_observable(op: &Observable, psi: &QuantumState, derivs: &Derivatives) -> QuantumState {
    let grid = psi.grid();
    match op {
        Observable::Position(k) => psi.mul_real(&grid.coordinate(*k)),
        Observable::Momentum(k) => {
            let mut out = QuantumState::zeros(grid.clone());
            derivs.add_first(grid, *k, psi.amplitudes(), out.amplitudes_mut(), -C64::i());
            out
        }
        Observable::Diagonal(w) => psi.mul_real(w),
    }
}

/// Re⟨Ψ|ÔΨ⟩ / ‖Ψ‖².
pub fn expectation(op: &Observable, psi: &QuantumState, derivs: &Derivatives) -> f64 {
    let o = apply_observable(op, psi, derivs);
    raw_inner(psi.amplitudes(), o.amplitudes()).re / raw_inner(psi.amplitudes(), psi.amplitudes()).re
}

/// An amplitude profile switched on with a time-dependent coefficient:
/// contributes `amplitude(t) · profile` to the potential.
#[derive(Clone)]
pub struct DrivenTerm {
    pub profile: Vec<f64>,
    pub amplitude: TimeFn,
}

impl fmt::Debug for DrivenTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DrivenTerm").field("profile_len", &self.profile.len()).finish()
    }
}

/// Grid Hamiltonian
///
/// Ĥ = Σ_k −c_k ∂²_k + Σ_j ½{W_j, p̂_{a_j}} + V + Σ_d f_d(t) g_d
///
/// with Dirichlet-zero walls. Kinetic terms act on single axes; `W_j` are
/// real multiplication operators (vector-potential couplings); `V` and the
/// driven profiles `g_d` are sampled multiplication operators.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    grid: Arc<ConfigGrid>,
    derivs: Arc<Derivatives>,
    kinetic: Vec<(usize, f64)>,
    momentum_couplings: Vec<(usize, Vec<f64>)>,
    potential: Vec<f64>,
    driven: Vec<DrivenTerm>,
}

impl HamiltonianSpec {
    pub fn new(grid: Arc<ConfigGrid>, stencil: Stencil) -> Self {
        let derivs = Arc::new(Derivatives::new(&grid, stencil));
        let n = grid.total_points();
        HamiltonianSpec {
            grid,
            derivs,
            kinetic: Vec::new(),
            momentum_couplings: Vec::new(),
            potential: vec![0.0; n],
            driven: Vec::new(),
        }
    }

    /// Adds −coef · ∂² on `axis`.
    pub fn with_kinetic(mut self, axis: usize, coef: f64) -> Self {
        self.kinetic.push((axis, coef));
        self
    }

    /// Adds a sampled potential.
    pub fn with_potential(mut self, f: impl Fn(&[f64]) -> f64) -> Self {
        let extra = self.grid.sample(f);
        self.potential.iter_mut().zip(extra).for_each(|(v, e)| *v += e);
        self
    }

    /// Adds ½(W p̂ + p̂ W) with momentum on `axis`.
    pub fn with_momentum_coupling(mut self, axis: usize, weight: impl Fn(&[f64]) -> f64) -> Self {
        let w = self.grid.sample(weight);
        self.momentum_couplings.push((axis, w));
        self
    }

    /// Adds `amplitude(t) · profile(x)`.
    pub fn with_driven(mut self, profile: impl Fn(&[f64]) -> f64, amplitude: TimeFn) -> Self {
        let profile = self.grid.sample(profile);
        self.driven.push(DrivenTerm { profile, amplitude });
        self
    }

    pub fn grid(&self) -> &Arc<ConfigGrid> {
        &self.grid
    }

    pub fn derivatives(&self) -> &Derivatives {
        &self.derivs
    }

    pub fn stencil(&self) -> Stencil {
        self.derivs.stencil()
    }

    pub fn is_time_dependent(&self) -> bool {
        !self.driven.is_empty()
    }

    pub fn kinetic_terms(&self) -> &[(usize, f64)] {
        &self.kinetic
    }

    /// Diagonal part V + Σ f_d(t) g_d at time t.
    pub fn potential_at(&self, t: f64) -> Vec<f64> {
        let mut v = self.potential.clone();
        for term in &self.driven {
            let f = (term.amplitude)(t);
            v.iter_mut().zip(&term.profile).for_each(|(v, g)| *v += f * g);
        }
        v
    }

    /// ĤΨ at time t.
    pub fn apply(&self, psi: &QuantumState, t: f64) -> Result<QuantumState> {
        if !(**psi.grid() == *self.grid) {
            return Err(Error::GridMismatch("state is not on the Hamiltonian's grid".into()));
        }
        psi.check_finite()?;
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        self.apply_raw(psi.amplitudes(), &mut out, t);
        QuantumState::new(psi.grid().clone(), out)
    }

    /// out = Ĥ input, on raw amplitude slices.
    pub(crate) fn apply_raw(&self, input: &[C64], out: &mut [C64], t: f64) {
        let grid = &*self.grid;
        let v = self.potential_at(t);
        for ((o, z), v) in out.iter_mut().zip(input).zip(&v) {
            *o = z * v;
        }
        for &(k, c) in &self.kinetic {
            self.derivs.add_second(grid, k, input, out, C64::new(-c, 0.0));
        }
        let half_minus_i = C64::new(0.0, -0.5);
        for (k, w) in &self.momentum_couplings {
            // ½ W p̂ ψ
            let mut dpsi = vec![C64::new(0.0, 0.0); input.len()];
            self.derivs.add_first(grid, *k, input, &mut dpsi, C64::new(1.0, 0.0));
            for ((o, d), w) in out.iter_mut().zip(&dpsi).zip(w) {
                *o += half_minus_i * d * w;
            }
            // ½ p̂ (W ψ)
            let wpsi: Vec<C64> = input.iter().zip(w).map(|(z, w)| z * w).collect();
            self.derivs.add_first(grid, *k, &wpsi, out, half_minus_i);
        }
    }

    /// ⟨Ψ|Ĥ|Ψ⟩ / ‖Ψ‖².
    pub fn energy(&self, psi: &QuantumState, t: f64) -> Result<f64> {
        let h = self.apply(psi, t)?;
        Ok(raw_inner(psi.amplitudes(), h.amplitudes()).re / raw_inner(psi.amplitudes(), psi.amplitudes()).re)
    }

    /// Dense matrix of Ĥ(t) in the grid basis (plain, unweighted entries).
    pub fn dense_matrix(&self, t: f64) -> nalgebra::DMatrix<C64> {
        let n = self.grid.total_points();
        let mut m = nalgebra::DMatrix::<C64>::zeros(n, n);
        let mut unit = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            unit[j] = C64::new(1.0, 0.0);
            self.apply_raw(&unit, &mut col, t);
            for (i, z) in col.iter().enumerate() {
                m[(i, j)] = *z;
            }
            unit[j] = C64::new(0.0, 0.0);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::grid::GridAxis;
    use crate::hilbert::state::inner;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(axes: &[(f64, usize)]) -> Arc<ConfigGrid> {
        Arc::new(
            ConfigGrid::new(
                axes.iter()
                    .enumerate()
                    .map(|(k, &(l, n))| GridAxis::new(format!("q{k}"), -l, l, n).unwrap())
                    .collect(),
            )
            .unwrap(),
        )
    }

    fn random_state(g: &Arc<ConfigGrid>, rng: &mut ChaCha8Rng) -> QuantumState {
        QuantumState::from_fn(g.clone(), |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn oscillator(g: &Arc<ConfigGrid>, stencil: Stencil) -> HamiltonianSpec {
        HamiltonianSpec::new(g.clone(), stencil).with_kinetic(0, 0.5).with_potential(|x| 0.5 * x[0] * x[0])
    }

    fn ground(g: &Arc<ConfigGrid>) -> QuantumState {
        QuantumState::from_fn(g.clone(), |x| C64::new((-x[0] * x[0] / 2.0).exp(), 0.0)).normalized().unwrap()
    }

    #[test]
    fn hermitian_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = grid(&[(4.0, 24), (3.0, 20)]);
        for stencil in [Stencil::Fd3, Stencil::Sinc] {
            let h = HamiltonianSpec::new(g.clone(), stencil)
                .with_kinetic(0, 0.5)
                .with_kinetic(1, 0.7)
                .with_potential(|x| x[0].powi(4) / 4.0 - 0.3 * x[0] * x[1])
                .with_momentum_coupling(0, |x| 0.2 * x[1])
                .with_driven(|x| -x[1], Arc::new(|t: f64| t.sin()));
            for _ in 0..5 {
                let psi = random_state(&g, &mut rng);
                let chi = random_state(&g, &mut rng);
                let lhs = inner(&chi, &h.apply(&psi, 0.4).unwrap()).unwrap();
                let rhs = inner(&psi, &h.apply(&chi, 0.4).unwrap()).unwrap().conj();
                assert!((lhs - rhs).norm() < 1e-10 * psi.norm() * chi.norm() * lhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn free_kinetic_energy_of_gaussian() {
        // |ψ|² has variance σ², so ⟨p̂²⟩ = 1/(4σ²) and ⟨−½∂²⟩ = 1/(8σ²)
        let sigma = 0.5;
        let g = grid(&[(6.0, 256)]);
        let psi = QuantumState::from_fn(g.clone(), |x| C64::new((-x[0] * x[0] / (4.0 * sigma * sigma)).exp(), 0.0))
            .normalized()
            .unwrap();
        let h = HamiltonianSpec::new(g.clone(), Stencil::Sinc).with_kinetic(0, 0.5);
        let e = h.energy(&psi, 0.0).unwrap();
        assert!((e - 1.0 / (8.0 * sigma * sigma)).abs() < 1e-10, "{e}");
        let h3 = HamiltonianSpec::new(g.clone(), Stencil::Fd3).with_kinetic(0, 0.5);
        let e3 = h3.energy(&psi, 0.0).unwrap();
        assert!((e3 - 0.5).abs() < 5e-3, "{e3}");
    }

    #[test]
    fn second_difference_of_constant_vanishes_in_interior() {
        let g = grid(&[(1.0, 32)]);
        let psi = QuantumState::from_fn(g.clone(), |_| C64::new(1.0, 0.0));
        let h = HamiltonianSpec::new(g.clone(), Stencil::Fd3).with_kinetic(0, 0.5);
        let out = h.apply(&psi, 0.0).unwrap();
        for z in &out.amplitudes()[1..31] {
            assert!(z.norm() < 1e-12);
        }
    }

    #[test]
    fn single_site_field_ground_state_is_eigenstate() {
        // H = −(1/2h)∂² + (h/2)m²φ² with h = 1, m = 1, ground state exp(−½ h m φ²)
        let g = grid(&[(8.0, 96)]);
        let h = HamiltonianSpec::new(g.clone(), Stencil::Sinc).with_kinetic(0, 0.5).with_potential(|x| 0.5 * x[0] * x[0]);
        let psi = ground(&g);
        let hpsi = h.apply(&psi, 0.0).unwrap();
        let mut diff = hpsi.clone();
        diff.axpy(C64::new(-0.5, 0.0), &psi).unwrap();
        assert!(diff.norm() < 1e-4, "{}", diff.norm());
    }

    #[test]
    fn grid_convergence_is_second_order_for_fd3() {
        let errs: Vec<f64> = [40usize, 79]
            .iter()
            .map(|&n| {
                let g = grid(&[(6.0, n)]);
                (oscillator(&g, Stencil::Fd3).energy(&ground(&g), 0.0).unwrap() - 0.5).abs()
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!(ratio >= 3.5, "ratio {ratio} errs {errs:?}");
    }

    #[test]
    fn grid_convergence_sinc_at_least_second_order() {
        let errs: Vec<f64> = [13usize, 25]
            .iter()
            .map(|&n| {
                let g = grid(&[(6.0, n)]);
                (oscillator(&g, Stencil::Sinc).energy(&ground(&g), 0.0).unwrap() - 0.5).abs()
            })
            .collect();
        assert!(errs[0] > 1e-10, "coarse error too small to measure: {errs:?}");
        assert!(errs[0] / errs[1] >= 3.5, "{errs:?}");
    }

    #[test]
    fn momentum_expectation_of_boosted_gaussian() {
        let g = grid(&[(6.0, 256)]);
        let (a, p, sigma) = (1.0, 3.0, 0.5);
        let psi = QuantumState::from_fn(g.clone(), |x| {
            let y = x[0] - a;
            C64::from_polar((-y * y / (4.0 * sigma * sigma)).exp(), p * x[0])
        })
        .normalized()
        .unwrap();
        let d = Derivatives::new(&g, Stencil::Sinc);
        assert!((expectation(&Observable::Momentum(0), &psi, &d) - p).abs() < 1e-6);
        assert!((expectation(&Observable::Position(0), &psi, &d) - a).abs() < 1e-8);
    }
}
