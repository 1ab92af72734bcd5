use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{check_width, Chart};
use crate::error::{Error, Result};
use crate::hilbert::{Observable, TAIL_TOLERANCE};

/// Wave packet ψ_{a,p}(x) = (2πσ²)^{-1/4} exp(−(x−a)²/(4σ²) + ipx).
///
/// σ² is the position variance of |ψ|². Coordinates are (a, p).
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleChart {
    pub a: f64,
    pub p: f64,
    pub sigma: f64,
    pub mass: f64,
}

impl ParticleChart {
    pub fn new(a: f64, p: f64, sigma: f64, mass: f64) -> Self {
        ParticleChart { a, p, sigma, mass }
    }

    pub(crate) fn check(&self) -> Result<()> {
        check_width("particle.sigma", self.sigma)?;
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::DegenerateChart(format!("particle.mass = {} must be positive", self.mass)));
        }
        if !self.a.is_finite() || !self.p.is_finite() {
            return Err(Error::DegenerateChart("particle coordinates must be finite".into()));
        }
        Ok(())
    }

    /// ln ψ(x), with multipliers for ∂_a and ∂_p in `mult[0..2]`.
    pub(crate) fn eval_factor(&self, x: f64, mult: &mut [C64]) -> C64 {
        let s2 = self.sigma * self.sigma;
        let d = x - self.a;
        mult[0] = C64::new(d / (2.0 * s2), 0.0);
        mult[1] = C64::new(0.0, x);
        C64::new(-d * d / (4.0 * s2) - 0.25 * (2.0 * PI * s2).ln(), self.p * x)
    }
}

impl Chart for ParticleChart {
    fn dim(&self) -> usize {
        2
    }

    fn n_axes(&self) -> usize {
        1
    }

    fn coords(&self) -> Vec<f64> {
        vec![self.a, self.p]
    }

    fn with_coords(&self, c: &[f64]) -> Self {
        ParticleChart { a: c[0], p: c[1], ..self.clone() }
    }

    fn coord_names(&self) -> Vec<String> {
        vec!["a".into(), "p".into()]
    }

    fn validate(&self) -> Result<()> {
        self.check()
    }

    fn eval_point(&self, q: &[f64], mult: &mut [C64]) -> C64 {
        self.eval_factor(q[0], mult)
    }

    fn moment_observables(&self) -> Vec<(Observable, f64)> {
        vec![(Observable::Position(0), 1.0), (Observable::Momentum(0), 1.0)]
    }
}

/// Normalized density |ψ_{a,p}(x)|² of width σ sampled at `x`; independent
/// of p. Fails if the density at either end exceeds 10⁻⁸ of its peak.
pub fn rho_sigma(a: f64, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
    check_width("sigma", sigma)?;
    let rho = gaussian_density(a, sigma, x);
    let peak = 1.0 / ((2.0 * PI).sqrt() * sigma);
    for (label, v) in [("first point", rho.first()), ("last point", rho.last())] {
        if let Some(v) = v {
            if v / peak > TAIL_TOLERANCE {
                return Err(Error::TailClipping { axis: format!("density {label}"), ratio: v / peak, limit: TAIL_TOLERANCE });
            }
        }
    }
    Ok(rho)
}

pub(crate) fn gaussian_density(a: f64, sigma: f64, x: &[f64]) -> Vec<f64> {
    let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
    x.iter().map(|xi| norm * (-(xi - a).powi(2) / (2.0 * sigma * sigma)).exp()).collect()
}
