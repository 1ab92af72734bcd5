use nalgebra::DMatrix;
use tangentlab_core::manifolds::{Chart, FieldChart};
use tangentlab_core::oracle::{run_kg, ClassicalState, KGParams};
use tangentlab_core::projection::integrate_chart;
use tangentlab_core::systems::{field_hamiltonian, FieldLattice};

use super::{axis, diagnostics_table, grid, overlay, trajectory_deviation, trajectory_table, Bound, Check, Report};
use crate::config::{ExperimentConfig, ExperimentKind, FieldSection};
use crate::error::{LabError, LabResult};

pub(crate) fn field_chart(f: &FieldSection) -> LabResult<FieldChart> {
    let kernel = match &f.kernel {
        Some(rows) => DMatrix::from_fn(f.sites, f.sites, |i, j| rows[i][j]),
        None => DMatrix::identity(f.sites, f.sites) * f.m,
    };
    FieldChart::new(f.phi(), f.pi(), kernel, f.h, f.m).map_err(|e| LabError::config("field.kernel", e.to_string()))
}

pub(crate) fn lattice(f: &FieldSection) -> LabResult<FieldLattice> {
    Ok(FieldLattice::new(f.sites, f.h, f.m, f.boundary)?)
}

pub(super) fn run(cfg: &ExperimentConfig) -> LabResult<Report> {
    let f = cfg.field()?;
    let int = cfg.integration;
    let lat = lattice(f)?;
    let source = cfg.source();
    let g = grid((0..f.sites).map(|i| axis(format!("phi[{i}]"), &cfg.grid.field)).collect::<LabResult<_>>()?)?;
    let chart = field_chart(f)?;
    let h = field_hamiltonian(g, cfg.grid.stencil, &lat, &source)?;
    let (projected, _) = integrate_chart(&chart, &h, 0.0, int.dt, int.t_end)?;
    let params = KGParams { lattice: lat, source };
    let oracle = run_kg(&ClassicalState::field(f.phi(), f.pi()), &params, int.oracle_dt, int.t_end, int.oracle_every())?;

    let mut report = Report::new(ExperimentKind::KgProjection);
    let dev = trajectory_deviation(&projected, &oracle);
    let max_residual = projected.residual_norm.iter().cloned().fold(0.0, f64::max);
    report.metric_push("max_deviation", dev);
    report.metric_push("max_residual_norm", max_residual);
    report.checks.push(Check::new("max_deviation", dev, Bound::Below(cfg.checks.max_deviation.unwrap_or(1e-4))));
    report.tables.push(trajectory_table("projected.csv", "projected", &projected));
    report.tables.push(trajectory_table("oracle.csv", "oracle", &oracle));
    report.tables.push(diagnostics_table(&projected));
    let names: Vec<String> = chart.coord_names().into_iter().filter(|n| n.starts_with("phi_c")).collect();
    report.plot("overlay.svg", overlay("Field chart vs lattice oracle", &names, &projected, &oracle));
    Ok(report)
}
