//! Tangent projection of the Schrödinger velocity onto a chart and the
//! induced ODE on chart coordinates.
//!
//! The velocity −iĤΨ is fitted in the real span of the chart tangent vectors
//! together with the global-phase direction iΨ, which is discarded. By
//! Frisch–Waugh this equals the least-squares problem for the horizontal
//! parts T̃_j of the tangents against −i(Ĥ − ⟨Ĥ⟩)Ψ, so the result does not
//! depend on constant shifts of Ĥ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{apply_observable, inner, HamiltonianSpec, QuantumState};
use crate::manifolds::{gram, horizontal_basis, Chart};

/// Solves fail when the horizontal Gram matrix is worse conditioned than this.
pub const MAX_GRAM_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct ProjectedFlow {
    /// Coordinate velocities in chart order.
    pub chart_velocity: Vec<f64>,
    /// ‖(velocity)_⊥‖ / ‖velocity‖ for the horizontal velocity −i(Ĥ−⟨Ĥ⟩)Ψ.
    pub residual_norm: f64,
    pub gram_condition: f64,
    /// max_j |Re⟨T̃_j|r⟩| / ‖Ψ‖² for the least-squares residual r.
    pub optimality: f64,
    /// ⟨Ĥ⟩ at the projected state.
    pub energy: f64,
}

/// Projects −iĤ(t)Ψ onto the real span of `tangents` at the state `psi`.
pub fn project_state(psi: &QuantumState, tangents: &[QuantumState], h: &HamiltonianSpec, t: f64) -> Result<ProjectedFlow> {
    let hpsi = h.apply(psi, t)?;
    let nn = psi.norm_sqr();
    if !(nn > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let energy = inner(psi, &hpsi)?.re / nn;
    // y = −i(Ĥ − E)Ψ
    let mut y = hpsi;
    y.axpy(C64::new(-energy, 0.0), psi)?;
    y.scale(-C64::i());

    let basis = horizontal_basis(psi, tangents)?;
    let g = gram(&basis)?;
    if !(g.condition <= MAX_GRAM_CONDITION) {
        return Err(Error::Conditioning { condition: g.condition });
    }
    let d = basis.len();
    let b = DVector::from_iterator(d, basis.iter().map(|tj| inner(tj, &y).map(|z| z.re)).collect::<Result<Vec<_>>>()?);
    let sol = solve_spd(&g.matrix, &b)?;

    let mut r = y.clone();
    for (tj, vj) in basis.iter().zip(sol.iter()) {
        r.axpy(C64::new(-vj, 0.0), tj)?;
    }
    let ynorm = y.norm();
    let residual_norm = if ynorm > 0.0 { (r.norm() / ynorm).min(1.0) } else { 0.0 };
    let mut optimality = 0.0f64;
    for tj in &basis {
        optimality = optimality.max(inner(tj, &r)?.re.abs() / nn);
    }
    let chart_velocity: Vec<f64> = sol.iter().cloned().collect();
    if let Some(i) = chart_velocity.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    Ok(ProjectedFlow { chart_velocity, residual_norm, gram_condition: g.condition, optimality, energy })
}

fn solve_spd(g: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = g.clone().cholesky() {
        return Ok(ch.solve(b));
    }
    g.clone().lu().solve(b).ok_or(Error::Conditioning { condition: f64::INFINITY })
}

/// Projected flow at the chart state of `c`.
pub fn project_flow<C: Chart>(c: &C, h: &HamiltonianSpec, t: f64) -> Result<ProjectedFlow> {
    let (psi, tangents) = c.state_and_tangents(h.grid())?;
    project_state(&psi, &tangents, h, t)
}

/// Time derivatives of the chart's moment coordinates under the exact flow,
/// d⟨Ô⟩/dt = 2 Im⟨ÔΨ|ĤΨ⟩ / ‖Ψ‖².
pub fn ehrenfest_flow<C: Chart>(psi: &QuantumState, h: &HamiltonianSpec, family: &C, t: f64) -> Result<Vec<f64>> {
    let hpsi = h.apply(psi, t)?;
    let nn = psi.norm_sqr();
    family
        .moment_observables()
        .iter()
        .map(|(op, scale)| {
            let o = apply_observable(op, psi, h.derivatives());
            Ok(scale * 2.0 * inner(&o, &hpsi)?.im / nn)
        })
        .collect()
}

/// Time series produced by chart integration or by an oracle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub coord_names: Vec<String>,
    pub times: Vec<f64>,
    pub coords: Vec<Vec<f64>>,
    pub residual_norm: Vec<f64>,
    pub energy: Vec<f64>,
    pub gram_condition: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn new(coord_names: Vec<String>) -> Self {
        TrajectoryRecord { coord_names, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, coords: Vec<f64>, residual: f64, energy: f64, condition: f64) {
        self.times.push(t);
        self.coords.push(coords);
        self.residual_norm.push(residual);
        self.energy.push(energy);
        self.gram_condition.push(condition);
    }

    /// Values of coordinate `j` over time.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.coords.iter().map(|c| c[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.coord_names.iter().position(|n| n == name).map(|j| self.column(j))
    }

    /// max_t max_j |c_j − c′_j| over samples present in both records.
    pub fn max_deviation(&self, other: &TrajectoryRecord) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Integrates the projected flow with classical RK4 from `c0` over
/// [t0, t0 + T] in `round(T/dt)` steps, sampling every step.
pub fn integrate_chart<C: Chart>(c0: &C, h: &HamiltonianSpec, t0: f64, dt: f64, total: f64) -> Result<(TrajectoryRecord, C)> {
    if !(dt > 0.0) || !(total >= 0.0) {
        return Err(Error::Config(format!("integration needs dt > 0 and T ≥ 0 (dt = {dt}, T = {total})")));
    }
    let steps = (total / dt).round() as usize;
    let mut rec = TrajectoryRecord::new(c0.coord_names());
    let mut c = c0.clone();
    let wrap = |step: usize, e: Error| match e {
        Error::TailClipping { .. } | Error::Conditioning { .. } | Error::NonFinite { .. } | Error::DegenerateChart(_) => {
            Error::Domain { step, reason: e.to_string() }
        }
        other => other,
    };
    let first = project_flow(&c, h, t0).map_err(|e| wrap(0, e))?;
    rec.push(t0, c.coords(), first.residual_norm, first.energy, first.gram_condition);
    let mut k1 = first.chart_velocity;
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        let x = c.coords();
        let shifted = |k: &[f64], f: f64| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + f * dt * k).collect() };
        let k2 = project_flow(&c.with_coords(&shifted(&k1, 0.5)), h, t + 0.5 * dt).map_err(|e| wrap(s, e))?.chart_velocity;
        let k3 = project_flow(&c.with_coords(&shifted(&k2, 0.5)), h, t + 0.5 * dt).map_err(|e| wrap(s, e))?.chart_velocity;
        let k4 = project_flow(&c.with_coords(&shifted(&k3, 1.0)), h, t + dt).map_err(|e| wrap(s, e))?.chart_velocity;
        let next: Vec<f64> =
            (0..x.len()).map(|j| x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect();
        c = c.with_coords(&next);
        let flow = project_flow(&c, h, t + dt).map_err(|e| wrap(s + 1, e))?;
        rec.push(t0 + (s + 1) as f64 * dt, next, flow.residual_norm, flow.energy, flow.gram_condition);
        k1 = flow.chart_velocity;
    }
    Ok((rec, c))
}

/// One row of a width scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub sigma: f64,
    pub projected: Vec<f64>,
    pub classical: Vec<f64>,
    /// max_j |projected_j − classical_j|
    pub deviation: f64,
}

/// For each width, builds a chart and Hamiltonian with `setup`, projects the
/// flow at time `t` and compares it with the `classical` velocity field.
pub fn residual_scan<C: Chart>(
    sigmas: &[f64],
    mut setup: impl FnMut(f64) -> Result<(C, HamiltonianSpec)>,
    classical: impl Fn(&C) -> Vec<f64>,
    t: f64,
) -> Result<Vec<ScanRow>> {
    sigmas
        .iter()
        .map(|&sigma| {
            let (c, h) = setup(sigma)?;
            let projected = project_flow(&c, &h, t)?.chart_velocity;
            let classical = classical(&c);
            let deviation = projected.iter().zip(&classical).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok(ScanRow { sigma, projected, classical, deviation })
        })
        .collect()
}

/// Least-squares slope of ln(deviation) against ln(σ).
pub fn loglog_slope(rows: &[ScanRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.sigma.ln(), r.deviation.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{ConfigGrid, GridAxis, Stencil};
    use crate::manifolds::{FieldChart, ParticleChart};
    use crate::potential::Polynomial;
    use crate::systems::{field_hamiltonian, particle_hamiltonian, Boundary, FieldLattice, SiteSource};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn field_setup(j: f64) -> (FieldChart, HamiltonianSpec) {
        let g = Arc::new(ConfigGrid::new(vec![GridAxis::new("phi0", -9.0, 9.0, 96).unwrap()]).unwrap());
        let lat = FieldLattice::new(1, 1.0, 1.0, Boundary::Periodic).unwrap();
        let h = field_hamiltonian(g, Stencil::Sinc, &lat, &SiteSource::constant(vec![j])).unwrap();
        (FieldChart::with_mass_kernel(vec![1.0], vec![0.0], 1.0, 1.0).unwrap(), h)
    }

    fn particle_grid() -> Arc<ConfigGrid> {
        Arc::new(ConfigGrid::new(vec![GridAxis::new("x", -8.0, 8.0, 200).unwrap()]).unwrap())
    }

    #[test]
    fn single_site_turning_point() {
        let (c, h) = field_setup(0.0);
        let v = project_flow(&c, &h, 0.0).unwrap().chart_velocity;
        assert!(v[0].abs() < 1e-10 && (v[1] + 1.0).abs() < 1e-10, "{v:?}");
        let (c, h) = field_setup(1.0);
        let v = project_flow(&c, &h, 0.0).unwrap().chart_velocity;
        assert!(v[1].abs() < 1e-10, "{v:?}");
    }

    #[test]
    fn single_site_returns_after_period() {
        let (c, h) = field_setup(0.0);
        let (rec, end) = integrate_chart(&c, &h, 0.0, 2.0 * PI / 400.0, 2.0 * PI).unwrap();
        assert_eq!(rec.len(), 401);
        assert!((end.phi_c()[0] - 1.0).abs() < 1e-6 && end.pi_c()[0].abs() < 1e-6, "{:?}", end.coords());
    }

    #[test]
    fn eigenstate_has_zero_ehrenfest_flow() {
        let g = particle_grid();
        let h = particle_hamiltonian(g.clone(), Stencil::Sinc, 1.0, &Polynomial::harmonic(1.0));
        let c = ParticleChart::new(0.0, 0.0, 1.0 / 2f64.sqrt(), 1.0);
        let psi = c.state(&g).unwrap();
        let v = ehrenfest_flow(&psi, &h, &c, 0.0).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-8), "{v:?}");
    }

    #[test]
    fn coherent_state_at_turning_point() {
        let g = particle_grid();
        let h = particle_hamiltonian(g.clone(), Stencil::Sinc, 1.0, &Polynomial::harmonic(1.0));
        let c = ParticleChart::new(1.0, 0.0, 1.0 / 2f64.sqrt(), 1.0);
        let e = ehrenfest_flow(&c.state(&g).unwrap(), &h, &c, 0.0).unwrap();
        assert!(e[0].abs() < 1e-8 && (e[1] + 1.0).abs() < 1e-8, "{e:?}");
        let p = project_flow(&c, &h, 0.0).unwrap();
        assert!(p.residual_norm < 1e-8);
    }

    #[test]
    fn quartic_force_has_width_correction() {
        let g = particle_grid();
        let h = particle_hamiltonian(g.clone(), Stencil::Sinc, 1.0, &Polynomial::quartic());
        let (a, s) = (1.0, 0.3);
        let c = ParticleChart::new(a, 0.0, s, 1.0);
        let e = ehrenfest_flow(&c.state(&g).unwrap(), &h, &c, 0.0).unwrap();
        assert!((e[1] + a * a * a + 3.0 * a * s * s).abs() < 1e-8, "{e:?}");
        let v = project_flow(&c, &h, 0.0).unwrap().chart_velocity;
        assert!((v[1] - e[1]).abs() < 1e-8);
    }

    #[test]
    fn quartic_deviation_scales_with_width_squared() {
        let g = particle_grid();
        let h = particle_hamiltonian(g.clone(), Stencil::Sinc, 1.0, &Polynomial::quartic());
        let rows = residual_scan(
            &[0.4, 0.2, 0.1],
            |s| Ok((ParticleChart::new(1.0, 0.0, s, 1.0), h.clone())),
            |c| vec![c.p / c.mass, -c.a.powi(3)],
            0.0,
        )
        .unwrap();
        let ratio = rows[0].deviation / rows[1].deviation;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        let slope = loglog_slope(&rows);
        assert!((1.8..=2.2).contains(&slope), "{slope}");
    }

    #[test]
    fn quadratic_potential_has_no_width_correction() {
        let g = particle_grid();
        let v = Polynomial::new(vec![0.3, -0.5, 0.8]);
        let h = particle_hamiltonian(g.clone(), Stencil::Sinc, 2.0, &v);
        let dv = v.derivative();
        let rows = residual_scan(
            &[0.6, 0.3, 0.15],
            |s| Ok((ParticleChart::new(0.5, 0.7, s, 2.0), h.clone())),
            |c| vec![c.p / c.mass, -dv.eval(c.a)],
            0.0,
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.deviation < 1e-8), "{rows:?}");
    }

    #[test]
    fn flow_is_invariant_under_rescaling_and_energy_shift() {
        let g = particle_grid();
        let h = particle_hamiltonian(g.clone(), Stencil::Sinc, 1.0, &Polynomial::new(vec![0.0, 0.2, 0.5, 0.1]));
        let shifted = particle_hamiltonian(g.clone(), Stencil::Sinc, 1.0, &Polynomial::new(vec![7.0, 0.2, 0.5, 0.1]));
        let c = ParticleChart::new(0.4, -0.6, 0.5, 1.0);
        let (psi, tangents) = c.state_and_tangents(&g).unwrap();
        let base = project_state(&psi, &tangents, &h, 0.0).unwrap();
        assert!(base.optimality < 1e-8);
        let z = C64::new(-1.7, 0.4);
        let scaled_t: Vec<_> = tangents.iter().map(|t| t.scaled(z)).collect();
        let scaled = project_state(&psi.scaled(z), &scaled_t, &h, 0.0).unwrap();
        let moved = project_state(&psi, &tangents, &shifted, 0.0).unwrap();
        for j in 0..2 {
            assert!((base.chart_velocity[j] - scaled.chart_velocity[j]).abs() < 1e-9);
            assert!((base.chart_velocity[j] - moved.chart_velocity[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn ill_conditioned_gram_is_rejected() {
        let g = particle_grid();
        let h = particle_hamiltonian(g.clone(), Stencil::Sinc, 1.0, &Polynomial::harmonic(1.0));
        let c = ParticleChart::new(0.0, 0.0, 0.5, 1.0);
        let (psi, t) = c.state_and_tangents(&g).unwrap();
        let dup = vec![t[0].clone(), t[1].clone(), t[0].clone()];
        assert!(matches!(project_state(&psi, &dup, &h, 0.0), Err(Error::Conditioning { .. })));
    }
}
