use tangentlab_core::manifolds::{Chart, EMModeChart, Mode, ParticleChart};
use tangentlab_core::oracle::{run_em, ClassicalState, EMParams, ForceModel};
use tangentlab_core::projection::{ehrenfest_flow, integrate_chart, project_flow};
use tangentlab_core::systems::em_hamiltonian;

use super::{axis, diagnostics_table, grid, overlay, trajectory_deviation, trajectory_table, Bound, Check, Report};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::LabResult;
use crate::output::Table;

pub(super) fn run(cfg: &ExperimentConfig) -> LabResult<Report> {
    let p = cfg.particle()?;
    let em = cfg.em()?;
    let int = cfg.integration;
    let modes: Vec<Mode> = em
        .modes
        .iter()
        .map(|m| Mode { kernel: m.kernel.unwrap_or(m.k), ..Mode::new(m.k, m.a, m.pi) })
        .collect();
    let chart = EMModeChart::new(ParticleChart::new(p.a, p.p, p.sigma, p.mass), modes, em.q, em.phi_ext.clone());
    let mut axes = vec![axis("x".into(), &cfg.grid.particle)?];
    for i in 0..em.modes.len() {
        axes.push(axis(format!("A[{i}]"), &cfg.grid.field)?);
    }
    let g = grid(axes)?;
    let h = em_hamiltonian(g.clone(), cfg.grid.stencil, &chart)?;
    let (projected, _) = integrate_chart(&chart, &h, 0.0, int.dt, int.t_end)?;

    let mut flow_table = Table::new("flow_check.csv", "flow-check", vec!["t".into(), "max_difference".into()]);
    let mut flow_diff = 0.0f64;
    for k in (0..projected.len()).step_by(em.flow_check_every) {
        let c = chart.with_coords(&projected.coords[k]);
        let t = projected.times[k];
        let v = project_flow(&c, &h, t)?.chart_velocity;
        let e = ehrenfest_flow(&c.state(&g)?, &h, &c, t)?;
        let d = v.iter().zip(&e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        flow_diff = flow_diff.max(d);
        flow_table.push(vec![t.into(), d.into()]);
    }

    let params = EMParams {
        mass: p.mass,
        q: em.q,
        phi_ext: em.phi_ext.clone(),
        ks: em.modes.iter().map(|m| m.k).collect(),
        force: ForceModel::Smeared { sigma: p.sigma },
    };
    let s0 = ClassicalState {
        a: p.a,
        p: p.p,
        phi: em.modes.iter().map(|m| m.a).collect(),
        pi: em.modes.iter().map(|m| m.pi).collect(),
        t: 0.0,
    };
    let oracle = run_em(&s0, &params, int.oracle_dt, int.t_end, int.oracle_every())?;

    let mut report = Report::new(ExperimentKind::EmMode);
    let dev = trajectory_deviation(&projected, &oracle);
    report.metric_push("max_deviation", dev);
    report.metric_push("max_flow_difference", flow_diff);
    report.checks.push(Check::new("max_deviation", dev, Bound::Below(cfg.checks.max_deviation.unwrap_or(1e-4))));
    report.checks.push(Check::new(
        "max_flow_difference",
        flow_diff,
        Bound::Below(cfg.checks.max_flow_difference.unwrap_or(1e-4)),
    ));
    report.tables.push(trajectory_table("projected.csv", "projected", &projected));
    report.tables.push(trajectory_table("oracle.csv", "oracle", &oracle));
    report.tables.push(diagnostics_table(&projected));
    report.tables.push(flow_table);
    let names = vec!["a".to_string(), "A[0]".to_string()];
    report.plot("overlay.svg", overlay("Particle and mode: projected vs oracle", &names, &projected, &oracle));
    Ok(report)
}
