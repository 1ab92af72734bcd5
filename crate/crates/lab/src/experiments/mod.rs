//! The experiment catalogue. Each experiment turns a validated config into a
//! [`Report`]: tables, plots, metrics and tolerance checks.

mod coupled;
mod em;
mod gue;
mod kg;
mod rm;
mod scaling;

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use tangentlab_core::hilbert::{ConfigGrid, GridAxis};
use tangentlab_core::projection::TrajectoryRecord;

use crate::config::{AxisSection, ExperimentConfig, ExperimentKind};
use crate::error::{LabError, LabResult};
use crate::output::{manifest, Cell, Table};
use crate::svg::{LinePlot, Series};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Below(f64),
    Above(f64),
    Within(f64, f64),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Below(x) => write!(f, "< {x:e}"),
            Bound::Above(x) => write!(f, "> {x:e}"),
            Bound::Within(a, b) => write!(f, "in [{a}, {b}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        let passed = match bound {
            Bound::Below(x) => value < x,
            Bound::Above(x) => value > x,
            Bound::Within(a, b) => value >= a && value <= b,
        };
        Check { name: name.into(), value, bound, passed }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {:e} {}", self.name, self.value, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub tables: Vec<Table>,
    /// (file name, SVG document)
    pub plots: Vec<(String, String)>,
    pub metrics: Vec<(String, f64)>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(experiment: ExperimentKind) -> Self {
        Report { experiment, tables: Vec::new(), plots: Vec::new(), metrics: Vec::new(), checks: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }

    fn metric_push(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    fn plot(&mut self, file: &str, plot: LinePlot) {
        self.plots.push((file.to_string(), plot.render()));
    }

    fn checks_table(&self) -> Table {
        let mut t = Table::new("checks.csv", "checks", vec!["check".into(), "value".into(), "bound".into(), "passed".into()]);
        for c in &self.checks {
            t.push(vec![c.name.as_str().into(), c.value.into(), c.bound.to_string().into(), (if c.passed { "true" } else { "false" }).into()]);
        }
        t
    }

    fn metrics_table(&self) -> Table {
        let mut t = Table::new("metrics.csv", "metrics", vec!["metric".into(), "value".into()]);
        for (n, v) in &self.metrics {
            t.push(vec![n.as_str().into(), (*v).into()]);
        }
        t
    }
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> LabResult<Report> {
    cfg.validate()?;
    let mut report = match cfg.experiment {
        ExperimentKind::KgProjection => kg::run(cfg),
        ExperimentKind::Coupled => coupled::run(cfg),
        ExperimentKind::WidthScaling => scaling::run(cfg),
        ExperimentKind::EmMode => em::run(cfg),
        ExperimentKind::RmWalk => rm::run(cfg),
        ExperimentKind::GueStats => gue::run(cfg),
    }?;
    for t in &mut report.tables {
        t.meta.insert(0, ("experiment".into(), cfg.experiment.name().into()));
        t.meta.insert(1, ("seed".into(), cfg.seed.to_string()));
    }
    Ok(report)
}

/// Writes the manifest, every table, the check and metric summaries, and
/// the plots when `emit_svg` is set.
pub fn write_outputs(cfg: &ExperimentConfig, report: &Report, dir: &Path) -> LabResult<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut echoed = cfg.clone();
    echoed.output_dir = Some(dir.to_path_buf());
    let path = dir.join("manifest.toml");
    fs::write(&path, manifest(&echoed.to_toml())).map_err(|e| LabError::io(&path, e))?;
    for t in report.tables.iter().chain([&report.checks_table(), &report.metrics_table()]) {
        t.write(dir)?;
    }
    if cfg.emit_svg {
        for (file, svg) in &report.plots {
            let path = dir.join(file);
            fs::write(&path, svg).map_err(|e| LabError::io(&path, e))?;
        }
    }
    Ok(())
}

pub(crate) fn axis(label: String, a: &AxisSection) -> LabResult<GridAxis> {
    Ok(GridAxis::centered(label, a.center, a.half_width, a.points)?)
}

pub(crate) fn grid(axes: Vec<GridAxis>) -> LabResult<Arc<ConfigGrid>> {
    Ok(Arc::new(ConfigGrid::new(axes)?))
}

/// t followed by the coordinates.
pub(crate) fn trajectory_table(file: &str, source: &str, rec: &TrajectoryRecord) -> Table {
    let mut cols = vec!["t".to_string()];
    cols.extend(rec.coord_names.iter().cloned());
    let mut t = Table::new(file, "trajectory", cols).with_meta("source", source);
    for (time, c) in rec.times.iter().zip(&rec.coords) {
        let mut row: Vec<Cell> = vec![(*time).into()];
        row.extend(c.iter().map(|v| Cell::from(*v)));
        t.push(row);
    }
    t
}

pub(crate) fn diagnostics_table(rec: &TrajectoryRecord) -> Table {
    let mut t = Table::new(
        "diagnostics.csv",
        "projection-diagnostics",
        vec!["t".into(), "residual_norm".into(), "energy".into(), "gram_condition".into()],
    );
    for i in 0..rec.len() {
        t.push(vec![rec.times[i].into(), rec.residual_norm[i].into(), rec.energy[i].into(), rec.gram_condition[i].into()]);
    }
    t
}

/// Overlays the named coordinates of the projected and oracle runs.
pub(crate) fn overlay(title: &str, names: &[String], projected: &TrajectoryRecord, oracle: &TrajectoryRecord) -> LinePlot {
    let mut plot = LinePlot::new(title, "t", "coordinate");
    for name in names {
        if let (Some(p), Some(o)) = (projected.column_by_name(name), oracle.column_by_name(name)) {
            plot = plot.with(Series::new(format!("{name} projected"), &projected.times, &p));
            plot = plot.with(Series::new(format!("{name} oracle"), &oracle.times, &o).dashed());
        }
    }
    plot
}

/// Max deviation over matching samples; a length mismatch counts as infinite.
pub(crate) fn trajectory_deviation(a: &TrajectoryRecord, b: &TrajectoryRecord) -> f64 {
    let times_match = a.len() == b.len() && a.times.iter().zip(&b.times).all(|(x, y)| (x - y).abs() < 1e-9);
    if !times_match || a.coord_names != b.coord_names {
        return f64::INFINITY;
    }
    a.max_deviation(b)
}
