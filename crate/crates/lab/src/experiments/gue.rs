use std::f64::consts::PI;

use nalgebra::DVector;
use tangentlab_core::environment::{
    hermitian_eigenvalues, kick_subspace, kick_unitary, ks_statistic, ks_two_sample, sample_gue, semicircle_cdf, walker_rng,
};
use tangentlab_core::C64;

use super::{Bound, Check, Report};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::LabResult;
use crate::output::Table;
use crate::svg::{LinePlot, Series};

pub(super) fn run(cfg: &ExperimentConfig) -> LabResult<Report> {
    let g = cfg.gue()?;
    let radius = 2.0 * g.v * (g.n as f64).sqrt();

    let mut rng = walker_rng(cfg.seed, 0);
    let mut eigs = Vec::with_capacity(g.n * g.samples);
    for _ in 0..g.samples {
        eigs.extend(hermitian_eigenvalues(&sample_gue(g.n, g.v, &mut rng)));
    }
    eigs.sort_by(f64::total_cmp);
    let ks = ks_statistic(&eigs, |x| semicircle_cdf(x, radius));

    let width = 2.0 * radius / g.bins as f64;
    let mut counts = vec![0usize; g.bins];
    for x in &eigs {
        let b = ((x + radius) / width).floor();
        if b >= 0.0 {
            counts[(b as usize).min(g.bins - 1)] += 1;
        }
    }
    let mut spectrum = Table::new(
        "spectrum.csv",
        "gue-spectrum",
        vec!["bin_center".into(), "count".into(), "density".into(), "semicircle".into()],
    )
    .with_meta("n", g.n)
    .with_meta("v", g.v)
    .with_meta("samples", g.samples);
    let (mut xs, mut hist, mut law) = (Vec::new(), Vec::new(), Vec::new());
    for (b, c) in counts.iter().enumerate() {
        let x = -radius + (b as f64 + 0.5) * width;
        let density = *c as f64 / (eigs.len() as f64 * width);
        let exact = 2.0 / (PI * radius * radius) * (radius * radius - x * x).max(0.0).sqrt();
        spectrum.push(vec![x.into(), (*c).into(), density.into(), exact.into()]);
        xs.push(x);
        hist.push(density);
        law.push(exact);
    }

    let mut kick_rng = walker_rng(cfg.seed, 1);
    let mut c = DVector::from_element(g.kick_dim, C64::new(0.0, 0.0));
    c[0] = C64::new(1.0, 0.0);
    let mut drift = 0.0f64;
    for _ in 0..g.kicks {
        let u = kick_unitary(&sample_gue(g.kick_dim, g.v, &mut kick_rng), g.kick_strength);
        kick_subspace(&mut c, &u)?;
        drift = drift.max((c.norm() - 1.0).abs());
    }

    let mut inv_rng = walker_rng(cfg.seed, 2);
    let n = g.invariance_n;
    let e0 = DVector::from_fn(n, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
    let e12 = DVector::from_fn(n, |i, _| C64::new(if i == 1 || i == 2 { 0.5f64.sqrt() } else { 0.0 }, 0.0));
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for _ in 0..g.invariance_samples {
        let h = sample_gue(n, g.v, &mut inv_rng);
        xa.push(e0.dotc(&(&h * &e0)).re);
        xb.push(e12.dotc(&(&h * &e12)).re);
    }
    let (d_inv, p_inv) = ks_two_sample(&xa, &xb);

    let mut report = Report::new(ExperimentKind::GueStats);
    report.metric_push("semicircle_ks", ks);
    report.metric_push("semicircle_radius", radius);
    report.metric_push("kick_norm_drift", drift);
    report.metric_push("invariance_ks", d_inv);
    report.metric_push("invariance_p", p_inv);
    report.checks.push(Check::new("semicircle_ks", ks, Bound::Below(cfg.checks.ks_max.unwrap_or(0.02))));
    report.checks.push(Check::new("kick_norm_drift", drift, Bound::Below(cfg.checks.norm_drift_max.unwrap_or(1e-8))));
    report.checks.push(Check::new("invariance_p", p_inv, Bound::Above(cfg.checks.invariance_p_min.unwrap_or(0.01))));
    report.tables.push(spectrum);
    report.plot(
        "spectrum.svg",
        LinePlot::new("Eigenvalue density", "eigenvalue", "density")
            .with(Series::new("sampled", &xs, &hist))
            .with(Series::new("semicircle", &xs, &law).dashed()),
    );
    Ok(report)
}
