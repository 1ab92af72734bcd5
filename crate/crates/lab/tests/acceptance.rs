//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use tangentlab::output::csv_body;
use tangentlab::{run, write_outputs, ExperimentConfig, Report};
use tangentlab_core::hilbert::{evolve, ConfigGrid, Derivatives, GridAxis, QuantumState, Stencil};
use tangentlab_core::manifolds::{Chart, FieldChart, ParticleChart};
use tangentlab_core::potential::Polynomial;
use tangentlab_core::projection::{ehrenfest_flow, project_flow};
use tangentlab_core::systems::{field_hamiltonian, particle_hamiltonian, Boundary, FieldLattice, SiteSource};
use tangentlab_core::C64;

struct Outcome {
    passed: bool,
    detail: String,
}

fn config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn summarize(report: &Report) -> String {
    report.checks.iter().map(|c| format!("{}={:.3e}", c.name, c.value)).collect::<Vec<_>>().join(", ")
}

fn experiment(name: &str, budget: Duration) -> Outcome {
    let cfg = config(name);
    let start = Instant::now();
    match run(&cfg) {
        Ok(report) => {
            let elapsed = start.elapsed();
            Outcome {
                passed: report.passed() && elapsed < budget,
                detail: format!("{} [{:.1}s of {}s]", summarize(&report), elapsed.as_secs_f64(), budget.as_secs()),
            }
        }
        Err(e) => Outcome { passed: false, detail: format!("error: {e}") },
    }
}

fn line(half: f64, n: usize) -> Arc<ConfigGrid> {
    Arc::new(ConfigGrid::new(vec![GridAxis::new("x", -half, half, n).unwrap()]).unwrap())
}

fn plane(half: f64, n: usize) -> Arc<ConfigGrid> {
    Arc::new(ConfigGrid::new(vec![GridAxis::new("x0", -half, half, n).unwrap(), GridAxis::new("x1", -half, half, n).unwrap()]).unwrap())
}

fn tangent_error<C: Chart>(chart: &C, grid: &Arc<ConfigGrid>) -> f64 {
    let tangents = chart.tangent_basis(grid).unwrap();
    let x = chart.coords();
    let step = 1e-4;
    let mut worst = 0.0f64;
    for (j, t) in tangents.iter().enumerate() {
        let (mut up, mut down) = (x.clone(), x.clone());
        up[j] += step;
        down[j] -= step;
        let mut fd = chart.with_coords(&up).state(grid).unwrap();
        fd.axpy(C64::new(-1.0, 0.0), &chart.with_coords(&down).state(grid).unwrap()).unwrap();
        fd.scale(C64::new(0.5 / step, 0.0));
        fd.axpy(C64::new(-1.0, 0.0), t).unwrap();
        worst = worst.max(fd.norm() / t.norm());
    }
    worst
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn invariants() -> Outcome {
    let start = Instant::now();
    let grid = line(10.0, 128);
    let derivs = Derivatives::new(&grid, Stencil::Sinc);
    let field_grid = plane(8.5, 48);
    let kernel = DMatrix::from_row_slice(2, 2, &[1.2, 0.3, 0.3, 1.0]);
    let (mut tangent, mut optimality, mut exactness, mut round_trip) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let quartic = particle_hamiltonian(grid.clone(), Stencil::Sinc, 1.0, &Polynomial::quartic());
    let harmonic = particle_hamiltonian(grid.clone(), Stencil::Sinc, 1.0, &Polynomial::harmonic(1.3));
    for &(a, p, sigma) in &[(0.0, 0.0, 0.5), (1.2, -0.7, 0.4), (-0.8, 1.5, 0.9), (0.3, 0.2, 0.7)] {
        let chart = ParticleChart::new(a, p, sigma, 1.0);
        tangent = tangent.max(tangent_error(&chart, &grid));
        optimality = optimality.max(project_flow(&chart, &quartic, 0.0).unwrap().optimality);
        let flow = project_flow(&chart, &harmonic, 0.0).unwrap().chart_velocity;
        let psi = chart.state(&grid).unwrap();
        exactness = exactness.max(max_diff(&flow, &ehrenfest_flow(&psi, &harmonic, &chart, 0.0).unwrap()));
        let r = chart.retract(&psi, &derivs).unwrap();
        round_trip = round_trip.max(max_diff(&r.chart.coords(), &chart.coords())).max(r.residual);
    }
    let lattice = FieldLattice::new(2, 1.0, 1.0, Boundary::Fixed).unwrap();
    let field_h = field_hamiltonian(field_grid.clone(), Stencil::Sinc, &lattice, &SiteSource::constant(vec![0.3, -0.2])).unwrap();
    let field_derivs = Derivatives::new(&field_grid, Stencil::Sinc);
    for (phi, pi) in [(vec![0.0, 0.0], vec![0.0, 0.0]), (vec![0.6, -0.4], vec![0.3, -0.9])] {
        let chart = FieldChart::new(phi, pi, kernel.clone(), 1.0, 1.0).unwrap();
        tangent = tangent.max(tangent_error(&chart, &field_grid));
        let psi = chart.state(&field_grid).unwrap();
        let flow = project_flow(&chart, &field_h, 0.0).unwrap().chart_velocity;
        exactness = exactness.max(max_diff(&flow, &ehrenfest_flow(&psi, &field_h, &chart, 0.0).unwrap()));
        let r = chart.retract(&psi, &field_derivs).unwrap();
        round_trip = round_trip.max(max_diff(&r.chart.coords(), &chart.coords()));
    }
    let small = line(8.0, 96);
    let psi = QuantumState::from_fn(small.clone(), |q| C64::new(1.0 + q[0], 0.3 * q[0] * q[0]) * (-q[0] * q[0] / 2.0).exp());
    let h = particle_hamiltonian(small, Stencil::Fd3, 1.0, &Polynomial::quartic());
    let out = evolve(&psi, &h, 0.0, 0.01, 1000).unwrap();
    let drift = (out.norm() / psi.norm() - 1.0).abs();
    let elapsed = start.elapsed();
    let passed = tangent < 1e-6
        && optimality < 1e-8
        && exactness < 1e-6
        && round_trip < 1e-7
        && drift < 1e-8
        && elapsed < Duration::from_secs(300);
    Outcome {
        passed,
        detail: format!(
            "tangent_fd={tangent:.3e}, normal_residual={optimality:.3e}, quadratic_exactness={exactness:.3e}, \
             round_trip={round_trip:.3e}, norm_drift={drift:.3e} [{:.1}s of 300s]",
            elapsed.as_secs_f64()
        ),
    }
}

fn csv_bodies(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<PathBuf> =
        fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|x| x == "csv")).collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), csv_body(&fs::read_to_string(&p).unwrap())))
        .collect()
}

fn rerun_from_manifest(cfg: &ExperimentConfig, root: &Path) -> Result<usize, String> {
    let first = root.join("first");
    let report = run(cfg).map_err(|e| e.to_string())?;
    write_outputs(cfg, &report, &first).map_err(|e| e.to_string())?;
    let again = ExperimentConfig::load(&first.join("manifest.toml")).map_err(|e| e.to_string())?;
    let second = root.join("second");
    write_outputs(&again, &run(&again).map_err(|e| e.to_string())?, &second).map_err(|e| e.to_string())?;
    let (a, b) = (csv_bodies(&first), csv_bodies(&second));
    if a.len() != b.len() {
        return Err(format!("{} vs {} CSV files", a.len(), b.len()));
    }
    for ((fa, ba), (fb, bb)) in a.iter().zip(&b) {
        if fa != fb || ba != bb {
            return Err(format!("{fa} differs"));
        }
    }
    Ok(a.len())
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut rm = config("rm-walk.toml");
    rm.integration.t_end = 2.0;
    if let Some(section) = rm.rm.as_mut() {
        section.walkers = 6;
    }
    let mut details = Vec::new();
    let mut passed = true;
    let mut runs: Vec<(&str, ExperimentConfig)> = ["kg-projection-2site", "coupled", "width-scaling", "em-mode", "gue-stats"]
        .iter()
        .map(|n| (*n, config(&format!("{n}.toml"))))
        .collect();
    runs.push(("rm-walk", rm));
    for (label, cfg) in runs {
        match rerun_from_manifest(&cfg, &root.path().join(label)) {
            Ok(n) => details.push(format!("{label}: {n} CSV bodies identical")),
            Err(e) => {
                passed = false;
                details.push(format!("{label}: {e}"));
            }
        }
    }
    Outcome { passed, detail: details.join(", ") }
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 Klein-Gordon emergence", Box::new(|| experiment("kg-projection-2site.toml", Duration::from_secs(120)))),
        ("2 coupled particle-field", Box::new(|| experiment("coupled.toml", Duration::from_secs(300)))),
        ("3 width scaling", Box::new(|| experiment("width-scaling.toml", Duration::from_secs(60)))),
        ("4 particle-mode sector", Box::new(|| experiment("em-mode.toml", Duration::from_secs(600)))),
        ("5 GUE statistics", Box::new(|| experiment("gue-stats.toml", Duration::from_secs(60)))),
        ("6 recording contrast", Box::new(|| experiment("rm-walk.toml", Duration::from_secs(600)))),
        ("7 variational invariants", Box::new(invariants)),
        ("8 determinism from manifest", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = check();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status} criterion {name}: {}", outcome.detail);
        if !outcome.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
