use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gue::{kick_subspace, kick_unitary, sample_gue};
use crate::error::{Error, Result};
use crate::hilbert::{ConfigGrid, Derivatives, QuantumState, SpectralPropagator, Stencil};
use crate::manifolds::{Chart, ParticleChart};
use crate::oracle::{newton_advance, ClassicalState, ForceModel, NewtonParams};
use crate::potential::Polynomial;
use crate::systems::particle_hamiltonian;

/// When the walker is projected back onto the chart manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Recording {
    Off,
    /// After every kick that leaves the state within ε of its retraction.
    OnEntry,
    /// At independent Poisson times of the given rate, when within ε.
    AtRate { rate: f64 },
}

/// Random-matrix environment: kicks exp(−iλτH) with H drawn from GUE(n, v)
/// at Poisson times of rate ν, acting on the lowest n system eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RMConfig {
    /// Kick subspace dimension; the grid size gives the full truncated space.
    pub dim: usize,
    pub v: f64,
    pub lambda: f64,
    pub tau: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub recording: Recording,
    pub seed: u64,
}

impl RMConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config(format!("{key}: {msg}")));
        if self.dim < 2 {
            return bad("dim", format!("{} must be at least 2", self.dim));
        }
        if !(self.v > 0.0) || !self.v.is_finite() {
            return bad("v", format!("{} must be positive", self.v));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda", format!("{} must be non-negative", self.lambda));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return bad("tau", format!("{} must be positive", self.tau));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return bad("nu", format!("{} must be non-negative", self.nu));
        }
        if !(self.epsilon > 0.0 && self.epsilon < std::f64::consts::FRAC_PI_4) {
            return bad("epsilon", format!("{} must lie in (0, π/4)", self.epsilon));
        }
        if let Recording::AtRate { rate } = self.recording {
            if !(rate > 0.0) || !rate.is_finite() {
                return bad("recording.rate", format!("{rate} must be positive"));
            }
        }
        Ok(())
    }
}

/// A particle in a polynomial potential with its exact spectral propagator.
#[derive(Debug, Clone)]
pub struct WalkSystem {
    grid: Arc<ConfigGrid>,
    derivs: Derivatives,
    propagator: SpectralPropagator,
    oracle: NewtonParams,
}

impl WalkSystem {
    pub fn new(grid: Arc<ConfigGrid>, stencil: Stencil, mass: f64, potential: &Polynomial) -> Result<Self> {
        if grid.ndim() != 1 {
            return Err(Error::Dimension { expected: 1, got: grid.ndim() });
        }
        if !(mass > 0.0) {
            return Err(Error::Config(format!("mass: {mass} must be positive")));
        }
        let h = particle_hamiltonian(grid.clone(), stencil, mass, potential);
        let propagator = SpectralPropagator::new(&h)?;
        let derivs = Derivatives::new(&grid, stencil);
        let oracle = NewtonParams { mass, potential: potential.clone(), force: ForceModel::Point };
        Ok(WalkSystem { grid, derivs, propagator, oracle })
    }

    pub fn grid(&self) -> &Arc<ConfigGrid> {
        &self.grid
    }

    pub fn propagator(&self) -> &SpectralPropagator {
        &self.propagator
    }

    fn state(&self, c: &DVector<C64>) -> Result<QuantumState> {
        QuantumState::new(self.grid.clone(), self.propagator.amplitudes(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Kick,
    Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkEvent {
    pub t: f64,
    pub kind: EventKind,
    /// Distance to the retraction just before the event.
    pub before: f64,
    /// Distance to the retraction just after the event.
    pub after: f64,
}

/// Per-walker history sampled on a regular time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub walker: u64,
    pub times: Vec<f64>,
    /// Fubini–Study distance from the state to its retracted chart state.
    pub distance: Vec<f64>,
    pub a: Vec<f64>,
    pub p: Vec<f64>,
    /// |a(t) − a_oracle(t)| against the classical run from the initial chart.
    pub oracle_deviation: Vec<f64>,
    pub events: Vec<WalkEvent>,
    pub max_norm_drift: f64,
    pub max_post_record_distance: f64,
    /// Set when the walk stopped early, e.g. because the chart left the grid.
    pub truncated: Option<String>,
}

impl WalkRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

/// Deterministic generator for walker `walker` of a run seeded by `seed`;
/// each walker reads its own ChaCha stream.
pub fn walker_rng(seed: u64, walker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walker);
    rng
}

fn next_time<R: Rng + ?Sized>(t: f64, rate: f64, rng: &mut R) -> f64 {
    if rate > 0.0 {
        t + Exp::new(rate).expect("positive rate").sample(rng)
    } else {
        f64::INFINITY
    }
}

/// Runs one walker from the chart state `c0`, sampling every `dt` up to
/// `total`. Kicks and recording attempts come from independent Poisson
/// streams drawn from the walker's generator.
pub fn run_rm_walk(
    c0: &ParticleChart,
    system: &WalkSystem,
    rm: &RMConfig,
    dt: f64,
    total: f64,
    walker: u64,
) -> Result<WalkRecord> {
    rm.validate()?;
    if rm.dim > system.propagator.dim() {
        return Err(Error::Config(format!(
            "dim: {} exceeds the {} available eigenstates",
            rm.dim,
            system.propagator.dim()
        )));
    }
    if !(dt > 0.0) || !(total >= 0.0) {
        return Err(Error::Config(format!("dt = {dt} and total = {total} must be positive")));
    }
    let mut rng = walker_rng(rm.seed, walker);
    let psi0 = c0.state(&system.grid)?;
    let mut c = system.propagator.coefficients(&psi0);
    let norm0 = c.norm();
    let theta = rm.lambda * rm.tau;
    let record_rate = match rm.recording {
        Recording::AtRate { rate } => rate,
        _ => 0.0,
    };

    let mut rec = WalkRecord {
        walker,
        times: Vec::new(),
        distance: Vec::new(),
        a: Vec::new(),
        p: Vec::new(),
        oracle_deviation: Vec::new(),
        events: Vec::new(),
        max_norm_drift: 0.0,
        max_post_record_distance: 0.0,
        truncated: None,
    };
    let oracle_params = NewtonParams { force: ForceModel::Smeared { sigma: c0.sigma }, ..system.oracle.clone() };
    let mut oracle = ClassicalState { a: c0.a, p: c0.p, ..Default::default() };
    let mut t = 0.0;
    let mut next_kick = next_time(0.0, rm.nu, &mut rng);
    let mut next_record = next_time(0.0, record_rate, &mut rng);
    let samples = (total / dt).round() as usize;

    let retract = |c: &DVector<C64>| -> Result<(ParticleChart, f64)> {
        let psi = system.state(c)?;
        let r = c0.retract(&psi, &system.derivs)?;
        Ok((r.chart, r.residual))
    };

    for k in 0..=samples {
        let ts = k as f64 * dt;
        let step = (|| -> Result<()> {
            while next_kick.min(next_record) <= ts {
                let te = next_kick.min(next_record);
                system.propagator.propagate(&mut c, te - t);
                t = te;
                let (chart, before) = retract(&c)?;
                if next_kick <= next_record {
                    next_kick = next_time(te, rm.nu, &mut rng);
                    let h = sample_gue(rm.dim, rm.v, &mut rng);
                    if theta != 0.0 {
                        kick_subspace(&mut c, &kick_unitary(&h, theta))?;
                    }
                    let (chart, after) = retract(&c)?;
                    rec.events.push(WalkEvent { t: te, kind: EventKind::Kick, before, after });
                    if rm.recording == Recording::OnEntry && after < rm.epsilon {
                        record(system, c0, &mut c, &chart, after, te, &mut rec)?;
                    }
                } else {
                    next_record = next_time(te, record_rate, &mut rng);
                    if before < rm.epsilon {
                        record(system, c0, &mut c, &chart, before, te, &mut rec)?;
                    }
                }
            }
            system.propagator.propagate(&mut c, ts - t);
            t = ts;
            rec.max_norm_drift = rec.max_norm_drift.max((c.norm() / norm0 - 1.0).abs());
            let (chart, d) = retract(&c)?;
            oracle = newton_advance(&oracle, &oracle_params, ts, dt.min(0.01))?;
            rec.times.push(ts);
            rec.distance.push(d);
            rec.a.push(chart.a);
            rec.p.push(chart.p);
            rec.oracle_deviation.push((chart.a - oracle.a).abs());
            Ok(())
        })();
        if let Err(e) = step {
            rec.truncated = Some(format!("t = {t:.6}: {e}"));
            break;
        }
    }
    Ok(rec)
}

/// Replaces the state by its chart state.
fn record(
    system: &WalkSystem,
    c0: &ParticleChart,
    c: &mut DVector<C64>,
    chart: &ParticleChart,
    before: f64,
    t: f64,
    rec: &mut WalkRecord,
) -> Result<()> {
    *c = system.propagator.coefficients(&chart.state(&system.grid)?);
    let after = c0.retract(&system.state(c)?, &system.derivs)?.residual;
    rec.max_post_record_distance = rec.max_post_record_distance.max(after);
    rec.events.push(WalkEvent { t, kind: EventKind::Record, before, after });
    Ok(())
}

/// Runs `walkers` independent walkers in parallel; results are in walker order.
pub fn run_ensemble(
    c0: &ParticleChart,
    system: &WalkSystem,
    rm: &RMConfig,
    dt: f64,
    total: f64,
    walkers: usize,
) -> Result<Vec<WalkRecord>> {
    (0..walkers as u64).into_par_iter().map(|w| run_rm_walk(c0, system, rm, dt, total, w)).collect()
}

/// Fubini–Study angle between plain coefficient vectors.
pub fn coefficient_distance(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    let aa = a.norm_squared();
    let overlap = a.dotc(b);
    let coef = overlap / aa;
    let perp = (b - a * coef).norm();
    perp.atan2(overlap.norm() / aa.sqrt())
}

/// Distances d_FS(ψ_k, ψ_0) over `kicks` successive GUE kicks of strength θ
/// applied to `psi0` (no free evolution).
pub fn kick_walk<R: Rng + ?Sized>(psi0: &DVector<C64>, v: f64, theta: f64, kicks: usize, rng: &mut R) -> Vec<f64> {
    let n = psi0.len();
    let mut c = psi0.clone();
    (0..kicks)
        .map(|_| {
            let u = kick_unitary(&sample_gue(n, v, rng), theta);
            c = &u * &c;
            coefficient_distance(psi0, &c)
        })
        .collect()
}

/// Finds θ = λτ for which the median single-kick displacement of a unit
/// vector in the n-dimensional subspace equals `target`.
pub fn calibrate_kick_strength(n: usize, v: f64, target: f64, samples: usize, seed: u64) -> f64 {
    let mut e0 = DVector::from_element(n, C64::new(0.0, 0.0));
    e0[0] = C64::new(1.0, 0.0);
    let mut theta = target / (v * (n as f64).sqrt());
    for round in 0..3 {
        let mut rng = walker_rng(seed, round);
        let mut d: Vec<f64> = (0..samples).map(|_| kick_walk(&e0, v, theta, 1, &mut rng)[0]).collect();
        d.sort_by(f64::total_cmp);
        let median = d[d.len() / 2];
        theta *= target / median;
    }
    theta
}
