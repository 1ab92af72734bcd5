use num_complex::Complex64 as C64;

use super::{Chart, FieldChart, ParticleChart};
use crate::hilbert::Observable;
use crate::Result;

/// Product state ψ_{a,p}(x)·Ψ_{φ_c,π_c}(φ) on axes (x, φ_0, …, φ_{N−1}).
///
/// Coordinates are (a, p, φ_c…, π_c…). `g` is the source strength carried
/// along for Hamiltonian construction; it does not affect the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductChart {
    pub particle: ParticleChart,
    pub field: FieldChart,
    pub g: f64,
}

impl ProductChart {
    pub fn new(particle: ParticleChart, field: FieldChart, g: f64) -> Self {
        ProductChart { particle, field, g }
    }
}

impl Chart for ProductChart {
    fn dim(&self) -> usize {
        2 + 2 * self.field.n_sites()
    }

    fn n_axes(&self) -> usize {
        1 + self.field.n_sites()
    }

    fn coords(&self) -> Vec<f64> {
        let mut c = self.particle.coords();
        c.extend(self.field.coord_vec());
        c
    }

    fn with_coords(&self, c: &[f64]) -> Self {
        ProductChart { particle: self.particle.with_coords(&c[..2]), field: self.field.at(&c[2..]), g: self.g }
    }

    fn coord_names(&self) -> Vec<String> {
        let mut n = self.particle.coord_names();
        n.extend(self.field.names());
        n
    }

    fn validate(&self) -> Result<()> {
        self.particle.check()?;
        self.field.check_coords()
    }

    fn eval_point(&self, q: &[f64], mult: &mut [C64]) -> C64 {
        let (mp, mf) = mult.split_at_mut(2);
        self.particle.eval_factor(q[0], mp) + self.field.eval_factor(&q[1..], mf)
    }

    fn moment_observables(&self) -> Vec<(Observable, f64)> {
        let mut obs = self.particle.moment_observables();
        obs.extend(self.field.observables(1));
        obs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{expectation, fubini_study, ConfigGrid, Derivatives, GridAxis, Stencil};
    use crate::manifolds::{gram, horizontal_gram};
    use std::sync::Arc;

    fn setup() -> (ProductChart, Arc<ConfigGrid>, Arc<ConfigGrid>) {
        let particle = ParticleChart::new(0.6, 0.8, 0.5, 1.0);
        let field = FieldChart::with_mass_kernel(vec![0.7], vec![-0.4], 1.0, 1.0).unwrap();
        let px = GridAxis::new("x", -6.0, 6.0, 96).unwrap();
        let pf = GridAxis::new("phi0", -8.0, 8.0, 48).unwrap();
        let full = Arc::new(ConfigGrid::new(vec![px.clone(), pf.clone()]).unwrap());
        let fgrid = Arc::new(ConfigGrid::new(vec![pf]).unwrap());
        (ProductChart::new(particle, field, 0.1), full, fgrid)
    }

    #[test]
    fn product_is_normalized_and_factorizes() {
        let (c, g, _) = setup();
        let d = Derivatives::new(&g, Stencil::Sinc);
        let psi = c.state(&g).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-8);
        let xphi: Vec<f64> = g.sample(|q| q[0] * q[1]);
        let joint = expectation(&Observable::Diagonal(xphi), &psi, &d);
        let x = expectation(&Observable::Position(0), &psi, &d);
        let phi = expectation(&Observable::Position(1), &psi, &d);
        assert!((joint - x * phi).abs() < 1e-8);
        assert_eq!(c.dim(), 4);
    }

    #[test]
    fn distance_reduces_to_field_factor() {
        let (c, g, fg) = setup();
        let mut shifted = c.coords();
        shifted[2] += 0.3;
        shifted[3] -= 0.2;
        let moved = c.with_coords(&shifted);
        let d_full = fubini_study(&c.state(&g).unwrap(), &moved.state(&g).unwrap()).unwrap();
        let d_field = fubini_study(&c.field.state(&fg).unwrap(), &moved.field.state(&fg).unwrap()).unwrap();
        assert!((d_full - d_field).abs() < 1e-8);
    }

    #[test]
    fn horizontal_gram_is_block_diagonal() {
        let (c, g, _) = setup();
        let (psi, basis) = c.state_and_tangents(&g).unwrap();
        let hg = horizontal_gram(&psi, &basis).unwrap();
        for i in 0..2 {
            for j in 2..4 {
                assert!(hg.matrix[(i, j)].abs() < 1e-9, "({i},{j}) = {}", hg.matrix[(i, j)]);
            }
        }
        // the raw metric couples p and π_c through ⟨x̂φ̂⟩
        let raw = gram(&basis).unwrap();
        let expected = c.particle.a * c.field.h() * c.field.phi_c()[0];
        assert!((raw.matrix[(1, 3)] - expected).abs() < 1e-9);
    }
}
