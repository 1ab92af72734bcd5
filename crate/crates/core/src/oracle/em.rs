use super::{push_sample, ClassicalState, ForceModel};
use crate::error::{Error, Result};
use crate::potential::Polynomial;
use crate::projection::TrajectoryRecord;

/// Charged particle coupled to transverse modes in the dipole approximation,
///
/// H = (p − qS)²/2M + qΦ_ext(a) + Σ_k (Π_k² + k²A_k²)/2,  S = Σ_k A_k,
///
/// with p canonical. The mechanical velocity is ȧ = (p − qS)/M and the
/// modes obey Ä_k = −k²A_k + j with current j = qȧ.
#[derive(Debug, Clone, PartialEq)]
pub struct EMParams {
    pub mass: f64,
    pub q: f64,
    pub phi_ext: Polynomial,
    pub ks: Vec<f64>,
    pub force: ForceModel,
}

/// One symmetric splitting step. The pieces p²/2M, −(q/M)pS,
/// q²S²/2M + qΦ_ext and the free mode oscillators are each integrated
/// exactly, so for q = 0 the modes rotate exactly.
pub fn em_mode_step(s: &ClassicalState, params: &EMParams, dt: f64) -> Result<ClassicalState> {
    let n = params.ks.len();
    if n == 0 {
        return Err(Error::Config("em oracle needs at least one mode".into()));
    }
    if s.phi.len() != n || s.pi.len() != n {
        return Err(Error::Dimension { expected: n, got: s.phi.len() });
    }
    let kmax = params.ks.iter().cloned().fold(0.0, f64::max);
    if !(dt.abs() * kmax < 0.5) || dt == 0.0 {
        return Err(Error::Config(format!("time step dt = {dt} violates dt·max(k) < 0.5")));
    }
    let mut x = s.clone();
    let half = 0.5 * dt;
    rotate_modes(&mut x, &params.ks, half);
    kick(&mut x, params, half);
    cross_drift(&mut x, params, half);
    x.a += dt * x.p / params.mass;
    cross_drift(&mut x, params, half);
    kick(&mut x, params, half);
    rotate_modes(&mut x, &params.ks, half);
    x.t = s.t + dt;
    Ok(x)
}

fn rotate_modes(s: &mut ClassicalState, ks: &[f64], dt: f64) {
    for ((a, pi), k) in s.phi.iter_mut().zip(s.pi.iter_mut()).zip(ks) {
        let (sn, cs) = (k * dt).sin_cos();
        let (a0, p0) = (*a, *pi);
        *a = a0 * cs + p0 * sn / k;
        *pi = -a0 * k * sn + p0 * cs;
    }
}

/// Flow of q²S²/2M + qΦ_ext(a): positions fixed, momenta kicked.
fn kick(s: &mut ClassicalState, params: &EMParams, dt: f64) {
    let total: f64 = s.phi.iter().sum();
    s.p += dt * params.q * params.force.force(&params.phi_ext, s.a);
    let f = params.q * params.q * total / params.mass;
    s.pi.iter_mut().for_each(|p| *p -= dt * f);
}

/// Flow of −(q/M) p S: p and A fixed, a and Π shifted.
fn cross_drift(s: &mut ClassicalState, params: &EMParams, dt: f64) {
    let total: f64 = s.phi.iter().sum();
    s.a -= dt * params.q * total / params.mass;
    let f = params.q * s.p / params.mass;
    s.pi.iter_mut().for_each(|p| *p += dt * f);
}

pub fn em_energy(s: &ClassicalState, params: &EMParams) -> f64 {
    let total: f64 = s.phi.iter().sum();
    let modes: f64 = s.phi.iter().zip(&s.pi).zip(&params.ks).map(|((a, p), k)| 0.5 * (p * p + k * k * a * a)).sum();
    modes + (s.p - params.q * total).powi(2) / (2.0 * params.mass) + params.q * params.force.potential(&params.phi_ext, s.a)
}

/// Records (a, p, A…, Π…) every `every` steps and at the end.
pub fn run_em(s0: &ClassicalState, params: &EMParams, dt: f64, total: f64, every: usize) -> Result<TrajectoryRecord> {
    let n = params.ks.len();
    let mut names = vec!["a".to_string(), "p".to_string()];
    names.extend((0..n).map(|i| format!("A[{i}]")));
    names.extend((0..n).map(|i| format!("Pi[{i}]")));
    let mut rec = TrajectoryRecord::new(names);
    let steps = (total / dt).round() as usize;
    let every = every.max(1);
    let mut s = s0.clone();
    push_sample(&mut rec, s.t, s.all_coords(), em_energy(&s, params));
    for k in 1..=steps {
        s = em_mode_step(&s, params, dt)?;
        if k % every == 0 || k == steps {
            push_sample(&mut rec, s.t, s.all_coords(), em_energy(&s, params));
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(q: f64) -> EMParams {
        EMParams { mass: 1.0, q, phi_ext: Polynomial::harmonic(1.0), ks: vec![1.0], force: ForceModel::Point }
    }

    #[test]
    fn free_mode_returns_after_period() {
        let p = params(0.0);
        let mut s = ClassicalState { a: 0.0, p: 0.0, phi: vec![1.0], pi: vec![0.0], t: 0.0 };
        let steps = 2000;
        for _ in 0..steps {
            s = em_mode_step(&s, &p, 2.0 * PI / steps as f64).unwrap();
        }
        assert!((s.phi[0] - 1.0).abs() < 1e-4 && s.pi[0].abs() < 1e-4);
    }

    #[test]
    fn uncharged_particle_decouples() {
        let p = EMParams { phi_ext: Polynomial::new(vec![0.0, 0.5]), ..params(0.0) };
        let mut s = ClassicalState { a: 0.0, p: 0.0, phi: vec![0.3], pi: vec![0.0], t: 0.0 };
        for _ in 0..100 {
            s = em_mode_step(&s, &p, 0.01).unwrap();
        }
        assert_eq!(s.a, 0.0);
        assert_eq!(s.p, 0.0);
        let q = EMParams { phi_ext: Polynomial::new(vec![0.0, 0.5]), ..params(1.0) };
        let mut s = ClassicalState { a: 0.0, p: 0.0, phi: vec![0.0], pi: vec![0.0], t: 0.0 };
        s = em_mode_step(&s, &q, 0.01).unwrap();
        assert!(s.p < 0.0, "particle should feel −q∇Φ_ext");
    }

    #[test]
    fn energy_conserved() {
        let p = EMParams { ks: vec![1.0, 2.3], ..params(0.2) };
        let s0 = ClassicalState { a: 0.8, p: 0.1, phi: vec![0.3, -0.2], pi: vec![0.0, 0.4], t: 0.0 };
        let rec = run_em(&s0, &p, 0.01, 10.0, 1).unwrap();
        let e0 = rec.energy[0];
        let drift = rec.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max);
        assert!(drift / e0 < 1e-4, "{drift}");
    }

    #[test]
    fn reversible() {
        let p = EMParams { ks: vec![1.0, 2.3], ..params(0.3) };
        let s0 = ClassicalState { a: 0.8, p: 0.1, phi: vec![0.3, -0.2], pi: vec![0.0, 0.4], t: 0.0 };
        let mut s = s0.clone();
        for _ in 0..500 {
            s = em_mode_step(&s, &p, 0.01).unwrap();
        }
        for _ in 0..500 {
            s = em_mode_step(&s, &p, -0.01).unwrap();
        }
        for (a, b) in s.all_coords().iter().zip(s0.all_coords()) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
