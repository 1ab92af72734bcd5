use std::sync::Arc;

use nalgebra::DMatrix;
use tangentlab_core::hilbert::{ConfigGrid, GridAxis, HamiltonianSpec, Stencil};
use tangentlab_core::manifolds::{FieldChart, ParticleChart};
use tangentlab_core::projection::{loglog_slope, residual_scan, ScanRow};
use tangentlab_core::systems::particle_hamiltonian;

use super::{Bound, Check, Report};
use crate::config::{ExperimentConfig, ExperimentKind, FieldScanSection};
use crate::error::LabResult;
use crate::output::Table;
use crate::svg::{LinePlot, Series};

pub(super) fn run(cfg: &ExperimentConfig) -> LabResult<Report> {
    let p = cfg.particle()?;
    let scan = cfg.scan()?;
    let stencil = cfg.grid.stencil;
    let dv = p.potential.derivative();
    let particle = residual_scan(
        &scan.sigmas,
        |sigma| {
            let g = Arc::new(ConfigGrid::new(vec![GridAxis::centered("x", p.a, scan.span * sigma, scan.points)?])?);
            Ok((ParticleChart::new(p.a, p.p, sigma, p.mass), particle_hamiltonian(g, stencil, p.mass, &p.potential)))
        },
        |c: &ParticleChart| vec![c.p / c.mass, -dv.eval(c.a)],
        0.0,
    )?;

    let mut report = Report::new(ExperimentKind::WidthScaling);
    let (lo, hi) = (cfg.checks.ratio_min.unwrap_or(3.5), cfg.checks.ratio_max.unwrap_or(4.5));
    let mut table = Table::new(
        "scaling.csv",
        "width-scan",
        vec!["family".into(), "width".into(), "deviation".into(), "ratio".into()],
    );
    let mut plot = LinePlot::new("Projection deviation vs packet width", "width", "max |projected − classical|").log_log();
    add_family(&mut report, &mut table, &mut plot, "particle", &particle, |r| r.sigma, (lo, hi));

    if let Some(f) = &scan.field {
        let rows = field_scan(f, scan.points, scan.span, stencil)?;
        add_family(&mut report, &mut table, &mut plot, "field", &rows, |r| r.sigma, (lo, hi));
    }
    report.tables.push(table);
    report.plot("scaling.svg", plot);
    Ok(report)
}

/// Single-site field with local potential h(½m²φ² − J0·L·sin(φ/L)),
/// scanned over Gaussian kernels K. Each row's width is the site width.
fn field_scan(f: &FieldScanSection, points: usize, span: f64, stencil: Stencil) -> LabResult<Vec<ScanRow>> {
    let widths: Vec<f64> = f.kernels.iter().map(|k| (1.0 / (2.0 * f.h * k)).sqrt()).collect();
    let (h, m, j0, l) = (f.h, f.m, f.j0, f.length);
    Ok(residual_scan(
        &widths,
        |s| {
            let k = 1.0 / (2.0 * h * s * s);
            let g = Arc::new(ConfigGrid::new(vec![GridAxis::centered("phi[0]", f.phi_c, span * s, points)?])?);
            let chart = FieldChart::new(vec![f.phi_c], vec![f.pi_c], DMatrix::from_element(1, 1, k), h, m)?;
            let spec = HamiltonianSpec::new(g, stencil)
                .with_kinetic(0, 0.5 / h)
                .with_potential(move |q| h * (0.5 * m * m * q[0] * q[0] - j0 * l * (q[0] / l).sin()));
            Ok((chart, spec))
        },
        |c: &FieldChart| vec![c.pi_c()[0], -m * m * c.phi_c()[0] + j0 * (c.phi_c()[0] / l).cos()],
        0.0,
    )?)
}

fn add_family(
    report: &mut Report,
    table: &mut Table,
    plot: &mut LinePlot,
    family: &str,
    rows: &[ScanRow],
    width: impl Fn(&ScanRow) -> f64,
    (lo, hi): (f64, f64),
) {
    let mut ratios = vec![f64::NAN];
    for w in rows.windows(2) {
        ratios.push(w[0].deviation / w[1].deviation);
    }
    for (r, ratio) in rows.iter().zip(&ratios) {
        table.push(vec![family.into(), width(r).into(), r.deviation.into(), (*ratio).into()]);
    }
    for (i, ratio) in ratios.iter().enumerate().skip(1) {
        report.checks.push(Check::new(format!("{family}_ratio[{}]", i - 1), *ratio, Bound::Within(lo, hi)));
    }
    report.metric_push(&format!("{family}_loglog_slope"), loglog_slope(rows));
    let xs: Vec<f64> = rows.iter().map(&width).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    plot.series.push(Series::new(family, &xs, &ys));
}
