use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{check_width, Chart, ParticleChart};
use crate::error::{Error, Result};
use crate::hilbert::Observable;
use crate::potential::Polynomial;

/// One transverse mode amplitude A with conjugate momentum Π = −i∂/∂A.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub k: f64,
    pub a: f64,
    pub pi: f64,
    /// Gaussian kernel; the mode ground state has kernel k.
    pub kernel: f64,
}

impl Mode {
    pub fn new(k: f64, a: f64, pi: f64) -> Self {
        Mode { k, a, pi, kernel: k }
    }
}

/// Charged particle packet times Gaussian mode states
/// exp(−½K_k(A_k−A_c,k)² + iΠ_c,k A_k) on axes (x, A_0, …).
///
/// Coordinates are (a, p, A_c…, Π_c…) with p the canonical momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct EMModeChart {
    pub particle: ParticleChart,
    pub modes: Vec<Mode>,
    pub q: f64,
    /// External scalar potential Φ_ext(x); the particle feels qΦ_ext.
    pub phi_ext: Polynomial,
}

impl EMModeChart {
    pub fn new(particle: ParticleChart, modes: Vec<Mode>, q: f64, phi_ext: Polynomial) -> Self {
        EMModeChart { particle, modes, q, phi_ext }
    }
}

impl Chart for EMModeChart {
    fn dim(&self) -> usize {
        2 + 2 * self.modes.len()
    }

    fn n_axes(&self) -> usize {
        1 + self.modes.len()
    }

    fn coords(&self) -> Vec<f64> {
        let mut c = self.particle.coords();
        c.extend(self.modes.iter().map(|m| m.a));
        c.extend(self.modes.iter().map(|m| m.pi));
        c
    }

    fn with_coords(&self, c: &[f64]) -> Self {
        let n = self.modes.len();
        let modes = self.modes.iter().enumerate().map(|(i, m)| Mode { a: c[2 + i], pi: c[2 + n + i], ..m.clone() }).collect();
        EMModeChart { particle: self.particle.with_coords(&c[..2]), modes, ..self.clone() }
    }

    fn coord_names(&self) -> Vec<String> {
        let n = self.modes.len();
        let mut names = self.particle.coord_names();
        names.extend((0..n).map(|i| format!("A[{i}]")));
        names.extend((0..n).map(|i| format!("Pi[{i}]")));
        names
    }

    fn validate(&self) -> Result<()> {
        self.particle.check()?;
        if self.modes.is_empty() {
            return Err(Error::DegenerateChart("em.modes must not be empty".into()));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if !(m.k > 0.0) || !m.k.is_finite() {
                return Err(Error::DegenerateChart(format!("em.modes[{i}].k = {} must be positive", m.k)));
            }
            check_width(&format!("em.modes[{i}].kernel"), m.kernel)?;
            if self.modes[..i].iter().any(|o| o.k == m.k) {
                return Err(Error::DegenerateChart(format!("em.modes[{i}].k = {} is repeated", m.k)));
            }
            if !m.a.is_finite() || !m.pi.is_finite() {
                return Err(Error::DegenerateChart("mode coordinates must be finite".into()));
            }
        }
        if !self.q.is_finite() {
            return Err(Error::DegenerateChart("em.q must be finite".into()));
        }
        Ok(())
    }

    fn eval_point(&self, q: &[f64], mult: &mut [C64]) -> C64 {
        let n = self.modes.len();
        let mut log = self.particle.eval_factor(q[0], &mut mult[..2]);
        for (i, m) in self.modes.iter().enumerate() {
            let amp = q[1 + i];
            let d = amp - m.a;
            mult[2 + i] = C64::new(m.kernel * d, 0.0);
            mult[2 + n + i] = C64::new(0.0, amp);
            log += C64::new(-0.5 * m.kernel * d * d + 0.25 * (m.kernel / PI).ln(), m.pi * amp);
        }
        log
    }

    fn moment_observables(&self) -> Vec<(Observable, f64)> {
        let n = self.modes.len();
        let mut obs = self.particle.moment_observables();
        obs.extend((0..n).map(|i| (Observable::Position(1 + i), 1.0)));
        obs.extend((0..n).map(|i| (Observable::Momentum(1 + i), 1.0)));
        obs
    }
}
