use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::grid::ConfigGrid;
use crate::error::{Error, Result};

/// Boundary amplitude (relative to the peak) above which a localized state
/// is considered clipped by the Dirichlet walls.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Sampled wavefunction (or wave functional) on a `ConfigGrid`.
#[derive(Debug, Clone)]
pub struct QuantumState {
    grid: Arc<ConfigGrid>,
    amps: Vec<C64>,
}

impl QuantumState {
    pub fn new(grid: Arc<ConfigGrid>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != grid.total_points() {
            return Err(Error::Dimension { expected: grid.total_points(), got: amps.len() });
        }
        Ok(QuantumState { grid, amps })
    }

    pub fn zeros(grid: Arc<ConfigGrid>) -> Self {
        let n = grid.total_points();
        QuantumState { grid, amps: vec![C64::new(0.0, 0.0); n] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F: FnMut(&[f64]) -> C64>(grid: Arc<ConfigGrid>, f: F) -> Self {
        let amps = grid.sample(f);
        QuantumState { grid, amps }
    }

    pub fn grid(&self) -> &Arc<ConfigGrid> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn same_grid(&self, other: &QuantumState) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn ensure_same_grid(&self, other: &QuantumState) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{} points vs {} points",
                self.grid.total_points(),
                other.grid.total_points()
            )))
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.amps.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    /// ‖Ψ‖² with the grid measure.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_measure()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n;
        self.amps.iter_mut().for_each(|z| *z *= s);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, c: C64) {
        self.amps.iter_mut().for_each(|z| *z *= c);
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// self += c · other
    pub fn axpy(&mut self, c: C64, other: &QuantumState) -> Result<()> {
        self.ensure_same_grid(other)?;
        self.amps.iter_mut().zip(&other.amps).for_each(|(a, b)| *a += c * b);
        Ok(())
    }

    /// Pointwise product with a real function sampled on the grid.
    pub fn mul_real(&self, weights: &[f64]) -> Self {
        let amps = self.amps.iter().zip(weights).map(|(z, w)| z * w).collect();
        QuantumState { grid: self.grid.clone(), amps }
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Ratio of the largest amplitude on the two boundary faces of each axis to
    /// the global peak; fails with `TailClipping` on the first offending axis.
    pub fn check_tails(&self, limit: f64) -> Result<()> {
        let peak = self.max_abs();
        if peak == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let grid = &self.grid;
        let mut idx = vec![0usize; grid.ndim()];
        let mut face_max = vec![0.0f64; grid.ndim()];
        for (flat, z) in self.amps.iter().enumerate() {
            grid.unravel(flat, &mut idx);
            let a = z.norm();
            for k in 0..grid.ndim() {
                if idx[k] == 0 || idx[k] + 1 == grid.axis(k).n {
                    face_max[k] = face_max[k].max(a);
                }
            }
        }
        for (k, m) in face_max.iter().enumerate() {
            let ratio = m / peak;
            if ratio > limit {
                return Err(Error::TailClipping { axis: grid.axis(k).label.clone(), ratio, limit });
            }
        }
        Ok(())
    }
}

/// ⟨Ψ|X⟩ with the grid measure; antilinear in the first argument.
pub fn inner(psi: &QuantumState, chi: &QuantumState) -> Result<C64> {
    psi.ensure_same_grid(chi)?;
    Ok(raw_inner(&psi.amps, &chi.amps) * psi.grid.cell_measure())
}

pub(crate) fn raw_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Fubini–Study angle arccos(|⟨Ψ|X⟩| / (‖Ψ‖‖X‖)) in [0, π/2].
///
/// Evaluated as atan2(‖X⊥‖, |⟨Ψ̂|X⟩|) so that small angles keep full precision.
pub fn fubini_study(psi: &QuantumState, chi: &QuantumState) -> Result<f64> {
    psi.ensure_same_grid(chi)?;
    let pp = raw_inner(&psi.amps, &psi.amps).re;
    let cc = raw_inner(&chi.amps, &chi.amps).re;
    if !(pp > 0.0) || !(cc > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let overlap = raw_inner(&psi.amps, &chi.amps);
    let coef = overlap / pp;
    let perp_sqr: f64 = psi.amps.iter().zip(&chi.amps).map(|(p, c)| (c - coef * p).norm_sqr()).sum();
    let along = overlap.norm() / pp.sqrt();
    Ok(perp_sqr.sqrt().atan2(along))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::grid::GridAxis;
    use std::f64::consts::FRAC_PI_2;

    fn grid1d(n: usize, l: f64) -> Arc<ConfigGrid> {
        Arc::new(ConfigGrid::new(vec![GridAxis::new("x", -l, l, n).unwrap()]).unwrap())
    }

    fn gaussian(grid: &Arc<ConfigGrid>, a: f64, p: f64, sigma: f64) -> QuantumState {
        QuantumState::from_fn(grid.clone(), |x| {
            let y = x[0] - a;
            C64::from_polar((-y * y / (4.0 * sigma * sigma)).exp(), p * x[0])
        })
        .normalized()
        .unwrap()
    }

    #[test]
    fn inner_of_normalized_is_one() {
        let g = grid1d(256, 8.0);
        let psi = gaussian(&g, 0.3, 1.0, 0.5);
        let z = inner(&psi, &psi).unwrap();
        assert!((z - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inner_linear_in_second_argument() {
        let g = grid1d(128, 8.0);
        let psi = gaussian(&g, 0.3, 1.0, 0.5).scaled(C64::new(2.0, 0.0));
        let z = inner(&psi, &psi.scaled(C64::i())).unwrap();
        assert!((z - C64::new(0.0, psi.norm_sqr())).norm() < 1e-12);
    }

    #[test]
    fn momentum_boost_overlap_matches_characteristic_function() {
        // |ψ|² is N(a, σ²), so ⟨ψ_p|ψ_p'⟩ = exp(iΔa − σ²Δ²/2).
        let g = grid1d(512, 10.0);
        let (a, sigma) = (0.4, 0.6);
        let psi = gaussian(&g, a, 1.0, sigma);
        let chi = gaussian(&g, a, 1.7, sigma);
        let z = inner(&psi, &chi).unwrap();
        let d = 0.7;
        let expected = C64::from_polar((-sigma * sigma * d * d / 2.0).exp(), d * a);
        assert!((z - expected).norm() < 1e-10, "{z} vs {expected}");
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = gaussian(&grid1d(64, 8.0), 0.0, 0.0, 0.5);
        let b = gaussian(&grid1d(65, 8.0), 0.0, 0.0, 0.5);
        assert!(matches!(inner(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn fubini_study_phase_invariant_and_orthogonal() {
        let g = grid1d(256, 10.0);
        let psi = gaussian(&g, 0.0, 0.0, 0.7);
        let rotated = psi.scaled(C64::from_polar(1.0, 0.83));
        assert!(fubini_study(&psi, &rotated).unwrap() < 1e-7);
        // first excited oscillator state is odd
        let excited = QuantumState::from_fn(g.clone(), |x| C64::new(x[0] * (-x[0] * x[0] / 2.0).exp(), 0.0));
        let ground = QuantumState::from_fn(g.clone(), |x| C64::new((-x[0] * x[0] / 2.0).exp(), 0.0));
        assert!((fubini_study(&ground, &excited).unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn fubini_study_small_shift() {
        // overlap of two shifted Gaussians is exp(−δ²/(8σ²)), so d ≈ δ/(2σ)
        let g = grid1d(1024, 10.0);
        let sigma = 0.5;
        for &delta in &[1e-3, 1e-2] {
            let d = fubini_study(&gaussian(&g, 0.0, 0.0, sigma), &gaussian(&g, delta, 0.0, sigma)).unwrap();
            let lead = delta / (2.0 * sigma);
            assert!(((d - lead) / lead).abs() < 2.0 * delta * delta, "delta={delta} d={d}");
        }
    }

    #[test]
    fn zero_norm_rejected() {
        let g = grid1d(64, 1.0);
        let z = QuantumState::zeros(g.clone());
        let psi = gaussian(&grid1d(64, 8.0), 0.0, 0.0, 0.5);
        let _ = psi;
        assert!(matches!(fubini_study(&z, &z), Err(Error::ZeroNorm)));
        assert!(matches!(z.clone().normalize(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn tails_detected() {
        let g = grid1d(128, 2.0);
        let psi = gaussian(&g, 0.0, 0.0, 0.5);
        assert!(matches!(psi.check_tails(TAIL_TOLERANCE), Err(Error::TailClipping { .. })));
        let wide = grid1d(128, 6.0);
        gaussian(&wide, 0.0, 0.0, 0.5).check_tails(TAIL_TOLERANCE).unwrap();
    }
}
