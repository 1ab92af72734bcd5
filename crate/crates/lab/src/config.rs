//! Experiment configuration files (TOML) and their validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tangentlab_core::environment::Recording;
use tangentlab_core::hilbert::Stencil;
use tangentlab_core::potential::Polynomial;
use tangentlab_core::systems::{Boundary, SiteSource};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KgProjection,
    Coupled,
    WidthScaling,
    EmMode,
    RmWalk,
    GueStats,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::KgProjection => "kg-projection",
            ExperimentKind::Coupled => "coupled",
            ExperimentKind::WidthScaling => "width-scaling",
            ExperimentKind::EmMode => "em-mode",
            ExperimentKind::RmWalk => "rm-walk",
            ExperimentKind::GueStats => "gue-stats",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub emit_svg: bool,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub integration: IntegrationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particle: Option<ParticleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SiteSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub em: Option<EmSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rm: Option<RmSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gue: Option<GueSection>,
    #[serde(default)]
    pub checks: ChecksSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub points: usize,
    pub half_width: f64,
    #[serde(default)]
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_stencil")]
    pub stencil: Stencil,
    /// Particle position axis.
    #[serde(default = "default_particle_axis")]
    pub particle: AxisSection,
    /// Each field-site or mode axis.
    #[serde(default = "default_field_axis")]
    pub field: AxisSection,
}

fn default_stencil() -> Stencil {
    Stencil::Sinc
}

fn default_particle_axis() -> AxisSection {
    AxisSection { points: 128, half_width: 8.0, center: 0.0 }
}

fn default_field_axis() -> AxisSection {
    AxisSection { points: 64, half_width: 8.0, center: 0.0 }
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { stencil: default_stencil(), particle: default_particle_axis(), field: default_field_axis() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    /// Chart integration step and sampling interval.
    pub dt: f64,
    pub t_end: f64,
    /// Oracle step; must divide `dt`.
    pub oracle_dt: f64,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        IntegrationSection { dt: 0.01, t_end: 10.0, oracle_dt: 0.001 }
    }
}

impl IntegrationSection {
    /// Oracle steps per chart sample.
    pub fn oracle_every(&self) -> usize {
        (self.dt / self.oracle_dt).round() as usize
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub p: f64,
    pub sigma: f64,
    #[serde(default = "one")]
    pub mass: f64,
    /// Polynomial coefficients of V(x), constant term first.
    #[serde(default = "Polynomial::zero")]
    pub potential: Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub sites: usize,
    #[serde(default = "one")]
    pub h: f64,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub phi_c: Vec<f64>,
    #[serde(default)]
    pub pi_c: Vec<f64>,
    /// Gaussian kernel rows; defaults to m·I.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<Vec<f64>>>,
}

impl FieldSection {
    pub fn phi(&self) -> Vec<f64> {
        padded(&self.phi_c, self.sites)
    }

    pub fn pi(&self) -> Vec<f64> {
        padded(&self.pi_c, self.sites)
    }
}

fn padded(v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| v.get(i).copied().unwrap_or(0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub g: f64,
    /// Width of the interaction profile ρ_int.
    pub sigma_int: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub k: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub pi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmSection {
    pub q: f64,
    #[serde(default = "Polynomial::zero")]
    pub phi_ext: Polynomial,
    pub modes: Vec<ModeSection>,
    /// Compare projected and Ehrenfest flows every this many samples.
    #[serde(default = "default_flow_every")]
    pub flow_check_every: usize,
}

fn default_flow_every() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmSection {
    pub dim: usize,
    pub v: f64,
    pub lambda: f64,
    pub tau: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub recording: Recording,
    #[serde(default = "default_walkers")]
    pub walkers: usize,
    /// Also run a recording-off ensemble for the contrast checks.
    #[serde(default = "default_true")]
    pub baseline: bool,
}

fn default_walkers() -> usize {
    100
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Particle widths; each entry half the previous one.
    pub sigmas: Vec<f64>,
    #[serde(default = "default_scan_points")]
    pub points: usize,
    /// Grid half-width in units of the state width.
    #[serde(default = "default_scan_span")]
    pub span: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldScanSection>,
}

fn default_scan_points() -> usize {
    96
}

fn default_scan_span() -> f64 {
    10.0
}

/// Single-site field with the smooth nonlinear source −h J₀ L sin(φ/L).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldScanSection {
    /// Kernel values; each entry four times the previous one.
    pub kernels: Vec<f64>,
    pub phi_c: f64,
    #[serde(default)]
    pub pi_c: f64,
    pub j0: f64,
    pub length: f64,
    #[serde(default = "one")]
    pub h: f64,
    #[serde(default = "one")]
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GueSection {
    pub n: usize,
    pub v: f64,
    pub samples: usize,
    #[serde(default = "default_kicks")]
    pub kicks: usize,
    #[serde(default = "default_kick_dim")]
    pub kick_dim: usize,
    #[serde(default = "default_kick_strength")]
    pub kick_strength: f64,
    #[serde(default = "default_invariance_n")]
    pub invariance_n: usize,
    #[serde(default = "default_invariance_samples")]
    pub invariance_samples: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_kicks() -> usize {
    1000
}
fn default_kick_dim() -> usize {
    64
}
fn default_kick_strength() -> f64 {
    0.1
}
fn default_invariance_n() -> usize {
    100
}
fn default_invariance_samples() -> usize {
    1000
}
fn default_bins() -> usize {
    40
}

/// Tolerances for the embedded checks; unset entries use the experiment
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_flow_difference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_drift_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance_p_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_inside_min: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            LabError::Parse(msg) => LabError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn particle(&self) -> LabResult<&ParticleSection> {
        self.particle.as_ref().ok_or_else(|| missing("particle", self.experiment))
    }

    pub fn field(&self) -> LabResult<&FieldSection> {
        self.field.as_ref().ok_or_else(|| missing("field", self.experiment))
    }

    pub fn coupling(&self) -> LabResult<&CouplingSection> {
        self.coupling.as_ref().ok_or_else(|| missing("coupling", self.experiment))
    }

    pub fn em(&self) -> LabResult<&EmSection> {
        self.em.as_ref().ok_or_else(|| missing("em", self.experiment))
    }

    pub fn rm(&self) -> LabResult<&RmSection> {
        self.rm.as_ref().ok_or_else(|| missing("rm", self.experiment))
    }

    pub fn scan(&self) -> LabResult<&ScanSection> {
        self.scan.as_ref().ok_or_else(|| missing("scan", self.experiment))
    }

    pub fn gue(&self) -> LabResult<&GueSection> {
        self.gue.as_ref().ok_or_else(|| missing("gue", self.experiment))
    }

    pub fn source(&self) -> SiteSource {
        self.source.clone().unwrap_or_default()
    }

    /// Checks that the sections the experiment needs are present and valid.
    pub fn validate(&self) -> LabResult<()> {
        axis("grid.particle", &self.grid.particle)?;
        axis("grid.field", &self.grid.field)?;
        let int = &self.integration;
        positive("integration.dt", int.dt)?;
        positive("integration.t_end", int.t_end)?;
        positive("integration.oracle_dt", int.oracle_dt)?;
        let ratio = int.dt / int.oracle_dt;
        if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-6 {
            return Err(LabError::config("integration.oracle_dt", format!("{} must divide dt = {}", int.oracle_dt, int.dt)));
        }
        if let Some(p) = &self.particle {
            check_particle(p)?;
        }
        if let Some(f) = &self.field {
            check_field(f)?;
            let s = self.source();
            if s.offset.len() > f.sites || s.amplitude.len() > f.sites {
                return Err(LabError::config("source", format!("more entries than the {} field sites", f.sites)));
            }
            finite("source.omega", s.omega)?;
        }
        match self.experiment {
            ExperimentKind::KgProjection => {
                self.field()?;
            }
            ExperimentKind::Coupled => {
                self.particle()?;
                self.field()?;
                let c = self.coupling()?;
                finite("coupling.g", c.g)?;
                positive("coupling.sigma_int", c.sigma_int)?;
            }
            ExperimentKind::WidthScaling => {
                self.particle()?;
                check_scan(self.scan()?)?;
            }
            ExperimentKind::EmMode => {
                self.particle()?;
                let em = self.em()?;
                finite("em.q", em.q)?;
                if em.modes.is_empty() {
                    return Err(LabError::config("em.modes", "at least one mode is required"));
                }
                for (i, m) in em.modes.iter().enumerate() {
                    positive(&format!("em.modes[{i}].k"), m.k)?;
                    if let Some(k) = m.kernel {
                        positive(&format!("em.modes[{i}].kernel"), k)?;
                    }
                }
                if em.flow_check_every == 0 {
                    return Err(LabError::config("em.flow_check_every", "must be at least 1"));
                }
            }
            ExperimentKind::RmWalk => {
                self.particle()?;
                let rm = self.rm()?;
                self.rm_config(rm).validate().map_err(|e| prefixed("rm", e))?;
                if rm.walkers == 0 {
                    return Err(LabError::config("rm.walkers", "must be at least 1"));
                }
                if rm.dim > self.grid.particle.points {
                    return Err(LabError::config(
                        "rm.dim",
                        format!("{} exceeds grid.particle.points = {}", rm.dim, self.grid.particle.points),
                    ));
                }
            }
            ExperimentKind::GueStats => {
                let g = self.gue()?;
                if g.n < 2 || g.kick_dim < 2 || g.invariance_n < 3 {
                    return Err(LabError::config("gue.n", "matrix dimensions must be at least 2 (3 for invariance)"));
                }
                positive("gue.v", g.v)?;
                if g.samples == 0 || g.invariance_samples < 2 || g.bins == 0 {
                    return Err(LabError::config("gue.samples", "sample counts must be positive"));
                }
                finite("gue.kick_strength", g.kick_strength)?;
            }
        }
        Ok(())
    }

    pub fn rm_config(&self, rm: &RmSection) -> tangentlab_core::environment::RMConfig {
        tangentlab_core::environment::RMConfig {
            dim: rm.dim,
            v: rm.v,
            lambda: rm.lambda,
            tau: rm.tau,
            nu: rm.nu,
            epsilon: rm.epsilon,
            recording: rm.recording,
            seed: self.seed,
        }
    }
}

fn missing(section: &str, kind: ExperimentKind) -> LabError {
    LabError::config(section, format!("section is required by experiment {}", kind.name()))
}

fn prefixed(prefix: &str, e: tangentlab_core::Error) -> LabError {
    match e {
        tangentlab_core::Error::Config(msg) => match msg.split_once(": ") {
            Some((key, rest)) => LabError::config(format!("{prefix}.{key}"), rest),
            None => LabError::config(prefix, msg),
        },
        other => LabError::Core(other),
    }
}

fn finite(key: &str, x: f64) -> LabResult<()> {
    if !x.is_finite() {
        return Err(LabError::config(key, format!("{x} is not finite")));
    }
    Ok(())
}

fn positive(key: &str, x: f64) -> LabResult<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(LabError::config(key, format!("{x} must be positive")));
    }
    Ok(())
}

fn axis(key: &str, a: &AxisSection) -> LabResult<()> {
    if a.points < 4 {
        return Err(LabError::config(format!("{key}.points"), format!("{} must be at least 4", a.points)));
    }
    positive(&format!("{key}.half_width"), a.half_width)?;
    finite(&format!("{key}.center"), a.center)
}

fn check_particle(p: &ParticleSection) -> LabResult<()> {
    finite("particle.a", p.a)?;
    finite("particle.p", p.p)?;
    positive("particle.sigma", p.sigma)?;
    positive("particle.mass", p.mass)?;
    if p.potential.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(LabError::config("particle.potential", "coefficients must be finite"));
    }
    Ok(())
}

fn check_field(f: &FieldSection) -> LabResult<()> {
    if f.sites == 0 {
        return Err(LabError::config("field.sites", "must be at least 1"));
    }
    positive("field.h", f.h)?;
    if !(f.m >= 0.0) || !f.m.is_finite() {
        return Err(LabError::config("field.m", format!("{} must be non-negative", f.m)));
    }
    if f.phi_c.len() > f.sites {
        return Err(LabError::config("field.phi_c", format!("more entries than the {} sites", f.sites)));
    }
    if f.pi_c.len() > f.sites {
        return Err(LabError::config("field.pi_c", format!("more entries than the {} sites", f.sites)));
    }
    if let Some(k) = &f.kernel {
        if k.len() != f.sites || k.iter().any(|r| r.len() != f.sites) {
            return Err(LabError::config("field.kernel", format!("must be a {0}×{0} matrix", f.sites)));
        }
    } else if !(f.m > 0.0) {
        return Err(LabError::config("field.kernel", "required when field.m = 0"));
    }
    Ok(())
}

fn check_scan(s: &ScanSection) -> LabResult<()> {
    if s.sigmas.len() < 2 {
        return Err(LabError::config("scan.sigmas", "at least two widths are required"));
    }
    for (i, w) in s.sigmas.iter().enumerate() {
        positive(&format!("scan.sigmas[{i}]"), *w)?;
    }
    if s.sigmas.windows(2).any(|w| (w[1] / w[0] - 0.5).abs() > 1e-9) {
        return Err(LabError::config("scan.sigmas", "each width must be half the previous one"));
    }
    if s.points < 8 {
        return Err(LabError::config("scan.points", "must be at least 8"));
    }
    positive("scan.span", s.span)?;
    if let Some(f) = &s.field {
        if f.kernels.len() < 2 {
            return Err(LabError::config("scan.field.kernels", "at least two kernels are required"));
        }
        for (i, k) in f.kernels.iter().enumerate() {
            positive(&format!("scan.field.kernels[{i}]"), *k)?;
        }
        if f.kernels.windows(2).any(|w| (w[1] / w[0] - 4.0).abs() > 1e-9) {
            return Err(LabError::config("scan.field.kernels", "each kernel must be four times the previous one"));
        }
        positive("scan.field.length", f.length)?;
        positive("scan.field.h", f.h)?;
        finite("scan.field.j0", f.j0)?;
    }
    Ok(())
}
