use tangentlab_core::manifolds::{Chart, ParticleChart, ProductChart};
use tangentlab_core::oracle::{run_coupled, ClassicalState, CoupledParams, ForceModel};
use tangentlab_core::projection::integrate_chart;
use tangentlab_core::systems::{coupled_hamiltonian, source_width};

use super::kg::{field_chart, lattice};
use super::{axis, diagnostics_table, grid, overlay, trajectory_deviation, trajectory_table, Bound, Check, Report};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::LabResult;

pub(super) fn run(cfg: &ExperimentConfig) -> LabResult<Report> {
    let p = cfg.particle()?;
    let f = cfg.field()?;
    let c = cfg.coupling()?;
    let int = cfg.integration;
    let lat = lattice(f)?;
    let source = cfg.source();
    let mut axes = vec![axis("x".into(), &cfg.grid.particle)?];
    for i in 0..f.sites {
        axes.push(axis(format!("phi[{i}]"), &cfg.grid.field)?);
    }
    let g = grid(axes)?;
    let chart = ProductChart::new(ParticleChart::new(p.a, p.p, p.sigma, p.mass), field_chart(f)?, c.g);
    let h = coupled_hamiltonian(g, cfg.grid.stencil, p.mass, &p.potential, &lat, &source, c.g, c.sigma_int)?;
    let (projected, _) = integrate_chart(&chart, &h, 0.0, int.dt, int.t_end)?;

    let params = CoupledParams {
        mass: p.mass,
        potential: p.potential.clone(),
        force: ForceModel::Smeared { sigma: p.sigma },
        lattice: lat,
        source,
        g: c.g,
        sigma_src: source_width(p.sigma, c.sigma_int),
        damping: 0.0,
    };
    let s0 = ClassicalState { a: p.a, p: p.p, phi: f.phi(), pi: f.pi(), t: 0.0 };
    let oracle = run_coupled(&s0, &params, int.oracle_dt, int.t_end, int.oracle_every())?;

    let mut report = Report::new(ExperimentKind::Coupled);
    let dev = trajectory_deviation(&projected, &oracle);
    report.metric_push("max_deviation", dev);
    report.metric_push("max_residual_norm", projected.residual_norm.iter().cloned().fold(0.0, f64::max));
    report.metric_push("source_width", params.sigma_src);
    report.checks.push(Check::new("max_deviation", dev, Bound::Below(cfg.checks.max_deviation.unwrap_or(1e-2))));
    report.tables.push(trajectory_table("projected.csv", "projected", &projected));
    report.tables.push(trajectory_table("oracle.csv", "oracle", &oracle));
    report.tables.push(diagnostics_table(&projected));
    let names: Vec<String> = chart.coord_names().into_iter().filter(|n| n == "a" || n.starts_with("phi_c")).collect();
    report.plot("overlay.svg", overlay("Particle and field: projected vs coupled oracle", &names, &projected, &oracle));
    Ok(report)
}
