use super::{ClassicalState, ForceModel};
use crate::error::{Error, Result};
use crate::potential::Polynomial;

/// A single particle in an external polynomial potential.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonParams {
    pub mass: f64,
    pub potential: Polynomial,
    pub force: ForceModel,
}

/// One kick–drift–kick step of Newton's equations.
pub fn newton_step(s: &ClassicalState, params: &NewtonParams, dt: f64) -> Result<ClassicalState> {
    if !(params.mass > 0.0) {
        return Err(Error::Config(format!("mass = {} must be positive", params.mass)));
    }
    let mut x = s.clone();
    x.p += 0.5 * dt * params.force.force(&params.potential, x.a);
    x.a += dt * x.p / params.mass;
    x.p += 0.5 * dt * params.force.force(&params.potential, x.a);
    x.t = s.t + dt;
    Ok(x)
}

/// Advances `s` to time `t_end` in steps no longer than `max_dt`.
pub fn newton_advance(s: &ClassicalState, params: &NewtonParams, t_end: f64, max_dt: f64) -> Result<ClassicalState> {
    let span = t_end - s.t;
    if span == 0.0 {
        return Ok(s.clone());
    }
    let steps = (span.abs() / max_dt).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let mut x = s.clone();
    for _ in 0..steps {
        x = newton_step(&x, params, dt)?;
    }
    x.t = t_end;
    Ok(x)
}

pub fn newton_energy(s: &ClassicalState, params: &NewtonParams) -> f64 {
    s.p * s.p / (2.0 * params.mass) + params.force.potential(&params.potential, s.a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_orbit() {
        let p = NewtonParams { mass: 2.0, potential: Polynomial::harmonic(8.0), force: ForceModel::Point };
        let s0 = ClassicalState { a: 1.0, p: 0.5, ..Default::default() };
        let s = newton_advance(&s0, &p, 3.0, 1e-3).unwrap();
        let w = 2.0f64;
        let a = (w * 3.0).cos() + 0.5 / (2.0 * w) * (w * 3.0).sin();
        assert!((s.a - a).abs() < 1e-5, "{} vs {a}", s.a);
        assert!((newton_energy(&s, &p) - newton_energy(&s0, &p)).abs() < 1e-5);
    }
}
