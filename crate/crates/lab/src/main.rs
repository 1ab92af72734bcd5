use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tangentlab::compare::compare_files;
use tangentlab::{run, write_outputs, ExperimentConfig, LabError, LabResult};
use tangentlab_core::environment::calibrate_kick_strength;

#[derive(Parser)]
#[command(name = "tangentlab", version, about = "Run projection and environment experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file (or a manifest).
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's output_dir.
        #[arg(short, long, env = "TANGENTLAB_OUTPUT_DIR")]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write SVG plots.
        #[arg(long)]
        svg: bool,
        /// Run ensemble walkers and sweep points on all cores.
        #[arg(long)]
        parallel: bool,
    },
    /// Compare two CSV outputs column by column.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Find the kick strength λτ giving a target median single-kick distance.
    Calibrate {
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        #[arg(long, default_value_t = 0.02)]
        target: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(command: Command) -> LabResult<bool> {
    match command {
        Command::Run { config, output, seed, svg, parallel } => {
            if !parallel {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
            }
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.emit_svg |= svg;
            let dir = output
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
            let report = run(&cfg)?;
            write_outputs(&cfg, &report, &dir)?;
            for c in &report.checks {
                println!("{c}");
            }
            println!("outputs written to {}", dir.display());
            if !report.passed() {
                eprintln!("failing checks: {}", report.failing().join(", "));
            }
            Ok(report.passed())
        }
        Command::Compare { a, b, tol } => {
            let r = compare_files(&a, &b, tol)?;
            for c in &r.columns {
                let status = if c.max <= tol { "PASS" } else { "FAIL" };
                println!("{status} {}: max {:e} mean {:e}", c.column, c.max, c.mean);
            }
            if r.interpolated {
                println!("note: second file interpolated onto the first file's times");
            }
            Ok(r.passed())
        }
        Command::Calibrate { dim, v, target, samples, seed } => {
            if dim < 2 || !(v > 0.0) || !(target > 0.0) || samples == 0 {
                return Err(LabError::config("calibrate", "dim ≥ 2, v > 0, target > 0 and samples > 0 are required"));
            }
            println!("lambda_tau = {:e}", calibrate_kick_strength(dim, v, target, samples, seed));
            Ok(true)
        }
    }
}
