use tangentlab_core::environment::{
    diffusion_coefficient, median_distance, residence_stats, run_ensemble, EventKind, Recording, WalkRecord, WalkSystem,
};
use tangentlab_core::manifolds::ParticleChart;

use super::{axis, grid, Bound, Check, Report};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::LabResult;
use crate::output::Table;
use crate::svg::{LinePlot, Series};

const SOJOURN_BINS: usize = 20;

fn policy_name(r: Recording) -> &'static str {
    match r {
        Recording::Off => "off",
        Recording::OnEntry => "on-entry",
        Recording::AtRate { .. } => "at-rate",
    }
}

pub(super) fn run(cfg: &ExperimentConfig) -> LabResult<Report> {
    let p = cfg.particle()?;
    let section = cfg.rm()?;
    let rm = cfg.rm_config(section);
    let int = cfg.integration;
    let g = grid(vec![axis("x".into(), &cfg.grid.particle)?])?;
    let system = WalkSystem::new(g, cfg.grid.stencil, p.mass, &p.potential)?;
    let c0 = ParticleChart::new(p.a, p.p, p.sigma, p.mass);

    let mut runs: Vec<(Recording, Vec<WalkRecord>)> =
        vec![(rm.recording, run_ensemble(&c0, &system, &rm, int.dt, int.t_end, section.walkers)?)];
    if section.baseline && rm.recording != Recording::Off {
        let off = tangentlab_core::environment::RMConfig { recording: Recording::Off, ..rm };
        runs.push((Recording::Off, run_ensemble(&c0, &system, &off, int.dt, int.t_end, section.walkers)?));
    }

    let mut report = Report::new(ExperimentKind::RmWalk);
    let meta = |t: Table| {
        t.with_meta("dim", rm.dim)
            .with_meta("v", rm.v)
            .with_meta("lambda", rm.lambda)
            .with_meta("tau", rm.tau)
            .with_meta("nu", rm.nu)
            .with_meta("epsilon", rm.epsilon)
            .with_meta("recording", policy_name(rm.recording))
    };
    let mut walks = meta(Table::new(
        "walks.csv",
        "rm-walks",
        ["policy", "walker", "t", "d_fs", "event", "a", "p", "oracle_dev"].map(String::from).to_vec(),
    ));
    let mut events =
        meta(Table::new("events.csv", "rm-events", ["policy", "walker", "t", "kind", "before", "after"].map(String::from).to_vec()));
    let mut summary = meta(Table::new(
        "summary.csv",
        "rm-summary",
        [
            "policy",
            "walker",
            "residence_fraction",
            "mean_sojourn",
            "excursions",
            "kicks",
            "records",
            "max_oracle_dev",
            "max_norm_drift",
            "max_post_record_distance",
            "truncated",
        ]
        .map(String::from)
        .to_vec(),
    ));
    let mut histogram =
        meta(Table::new("sojourns.csv", "rm-sojourns", ["policy", "bin_start", "bin_end", "count"].map(String::from).to_vec()));

    let mut fractions = Vec::new();
    let mut medians = Vec::new();
    let mut diffusion = Vec::new();
    for (policy, recs) in &runs {
        let name = policy_name(*policy);
        let mut sojourns = Vec::new();
        let mut fraction = 0.0;
        for r in recs {
            let markers = event_markers(r);
            for i in 0..r.len() {
                walks.push(vec![
                    name.into(),
                    r.walker.into(),
                    r.times[i].into(),
                    r.distance[i].into(),
                    markers[i].into(),
                    r.a[i].into(),
                    r.p[i].into(),
                    r.oracle_deviation[i].into(),
                ]);
            }
            for e in &r.events {
                let kind = match e.kind {
                    EventKind::Kick => "kick",
                    EventKind::Record => "record",
                };
                events.push(vec![name.into(), r.walker.into(), e.t.into(), kind.into(), e.before.into(), e.after.into()]);
            }
            let s = residence_stats(r, rm.epsilon);
            fraction += s.fraction / recs.len() as f64;
            summary.push(vec![
                name.into(),
                r.walker.into(),
                s.fraction.into(),
                s.mean_sojourn.into(),
                s.excursions.into(),
                r.count(EventKind::Kick).into(),
                r.count(EventKind::Record).into(),
                r.oracle_deviation.iter().cloned().fold(0.0, f64::max).into(),
                r.max_norm_drift.into(),
                r.max_post_record_distance.into(),
                r.truncated.clone().unwrap_or_default().into(),
            ]);
            sojourns.extend(s.sojourns);
        }
        let width = int.t_end / SOJOURN_BINS as f64;
        let mut counts = [0usize; SOJOURN_BINS];
        for s in &sojourns {
            counts[((s / width) as usize).min(SOJOURN_BINS - 1)] += 1;
        }
        for (b, c) in counts.iter().enumerate() {
            histogram.push(vec![name.into(), (b as f64 * width).into(), ((b + 1) as f64 * width).into(), (*c).into()]);
        }

        let median = median_distance(recs);
        let inside = median.iter().filter(|d| **d < rm.epsilon).count() as f64 / median.len().max(1) as f64;
        let truncated = recs.iter().filter(|r| r.truncated.is_some()).count();
        let drift = recs.iter().map(|r| r.max_norm_drift).fold(0.0, f64::max);
        report.metric_push(&format!("{name}.residence_fraction"), fraction);
        report.metric_push(&format!("{name}.median_inside_fraction"), inside);
        report.metric_push(&format!("{name}.final_median_distance"), median.last().copied().unwrap_or(f64::NAN));
        let d = diffusion_coefficient(recs);
        report.metric_push(&format!("{name}.diffusion_coefficient"), d);
        report.metric_push(&format!("{name}.envelope_fraction"), envelope_fraction(recs, d));
        report.metric_push(&format!("{name}.max_norm_drift"), drift);
        report.metric_push(&format!("{name}.truncated_walkers"), truncated as f64);
        let norm_max = cfg.checks.norm_drift_max.unwrap_or(1e-8);
        report.checks.push(Check::new(format!("{name}.max_norm_drift"), drift, Bound::Below(norm_max)));
        report.checks.push(Check::new(format!("{name}.truncated_walkers"), truncated as f64, Bound::Below(0.5)));
        if *policy != Recording::Off {
            let post = recs.iter().map(|r| r.max_post_record_distance).fold(0.0, f64::max);
            report.metric_push(&format!("{name}.max_post_record_distance"), post);
            report.checks.push(Check::new(format!("{name}.max_post_record_distance"), post, Bound::Below(1e-7)));
            report.checks.push(Check::new(
                format!("{name}.median_inside_fraction"),
                inside,
                Bound::Above(cfg.checks.median_inside_min.unwrap_or(0.9)),
            ));
        }
        fractions.push(fraction);
        diffusion.push(d);
        medians.push((name, median));
    }
    if runs.len() == 2 {
        let contrast = fractions[0] - fractions[1];
        report.metric_push("residence_contrast", contrast);
        report.checks.push(Check::new("residence_contrast", contrast, Bound::Above(cfg.checks.contrast_min.unwrap_or(0.3))));
        let ratio = diffusion[0] / diffusion[1];
        report.metric_push("diffusion_ratio", ratio);
        report.checks.push(Check::new("diffusion_ratio", ratio, Bound::Below(1.0)));
    }

    let times = runs[0].1.iter().max_by_key(|r| r.len()).map(|r| r.times.clone()).unwrap_or_default();
    let mut cols = vec!["t".to_string()];
    cols.extend(medians.iter().map(|(n, _)| format!("median_d_fs.{n}")));
    let mut ensemble = meta(Table::new("ensemble.csv", "rm-ensemble", cols));
    for (i, t) in times.iter().enumerate() {
        let mut row = vec![(*t).into()];
        row.extend(medians.iter().map(|(_, m)| m.get(i).copied().unwrap_or(f64::NAN).into()));
        ensemble.push(row);
    }
    let mut plot = LinePlot::new("Median distance to the manifold", "t", "median d_FS");
    for (name, m) in &medians {
        plot = plot.with(Series::new(*name, &times[..m.len().min(times.len())], m));
    }
    if let (Some(t0), Some(t1)) = (times.first(), times.last()) {
        plot = plot.with(Series::new("epsilon", &[*t0, *t1], &[rm.epsilon, rm.epsilon]).dashed());
    }
    report.tables.extend([walks, events, summary, histogram, ensemble]);
    report.plot("median_distance.svg", plot);
    Ok(report)
}

/// "kick", "record", "kick+record" or "" for the events since the previous sample.
fn event_markers(r: &WalkRecord) -> Vec<&'static str> {
    let mut out = Vec::with_capacity(r.len());
    let mut e = 0;
    for &t in &r.times {
        let (mut kick, mut record) = (false, false);
        while e < r.events.len() && r.events[e].t <= t {
            match r.events[e].kind {
                EventKind::Kick => kick = true,
                EventKind::Record => record = true,
            }
            e += 1;
        }
        out.push(match (kick, record) {
            (true, true) => "kick+record",
            (true, false) => "kick",
            (false, true) => "record",
            (false, false) => "",
        });
    }
    out
}

/// Fraction of samples whose oracle deviation lies inside the 3√(D·t)
/// envelope of the fitted diffusion coefficient D.
fn envelope_fraction(recs: &[WalkRecord], d: f64) -> f64 {
    let (mut inside, mut total) = (0usize, 0usize);
    for r in recs {
        for (t, dev) in r.times.iter().zip(&r.oracle_deviation) {
            total += 1;
            if *dev <= 3.0 * (d * t).sqrt() + 1e-9 {
                inside += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        inside as f64 / total as f64
    }
}
