//! Random-matrix environment: GUE sampling, unitary kicks, and stochastic
//! walks of a wave packet with optional recording onto the chart manifold.

mod gue;
mod walk;

use serde::{Deserialize, Serialize};

pub use gue::{
    hermitian_eigenvalues, kick, kick_subspace, kick_unitary, ks_statistic, ks_two_sample, sample_gue,
    semicircle_cdf,
};
pub use walk::{
    calibrate_kick_strength, coefficient_distance, kick_walk, run_ensemble, run_rm_walk, walker_rng, EventKind,
    RMConfig, Recording, WalkEvent, WalkRecord, WalkSystem,
};

/// Occupancy of the ε-tube around the manifold for one walker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidenceStats {
    /// Fraction of samples with distance below ε.
    pub fraction: f64,
    /// Mean duration of maximal runs of samples inside the tube.
    pub mean_sojourn: f64,
    /// Number of exits from the tube.
    pub excursions: usize,
    /// Durations of the maximal runs inside the tube.
    pub sojourns: Vec<f64>,
}

impl ResidenceStats {
    /// Counts of sojourn durations in `bins` equal bins over [0, max].
    pub fn sojourn_histogram(&self, bins: usize, max: f64) -> Vec<usize> {
        let mut h = vec![0; bins];
        for s in &self.sojourns {
            let b = ((s / max) * bins as f64).floor() as usize;
            h[b.min(bins - 1)] += 1;
        }
        h
    }
}

pub fn residence_stats(rec: &WalkRecord, epsilon: f64) -> ResidenceStats {
    let n = rec.distance.len();
    if n == 0 {
        return ResidenceStats { fraction: 0.0, mean_sojourn: 0.0, excursions: 0, sojourns: Vec::new() };
    }
    let dt = if n > 1 { rec.times[1] - rec.times[0] } else { 0.0 };
    let inside: Vec<bool> = rec.distance.iter().map(|d| *d < epsilon).collect();
    let count = inside.iter().filter(|b| **b).count();
    let mut runs = Vec::new();
    let mut run = 0usize;
    let mut excursions = 0;
    for (i, &b) in inside.iter().enumerate() {
        if b {
            run += 1;
        } else {
            if run > 0 {
                runs.push(run);
            }
            if i > 0 && inside[i - 1] {
                excursions += 1;
            }
            run = 0;
        }
    }
    if run > 0 {
        runs.push(run);
    }
    let sojourns: Vec<f64> = runs.iter().map(|r| *r as f64 * dt).collect();
    let mean_sojourn = if sojourns.is_empty() { 0.0 } else { sojourns.iter().sum::<f64>() / sojourns.len() as f64 };
    ResidenceStats { fraction: count as f64 / n as f64, mean_sojourn, excursions, sojourns }
}

/// Median over walkers of the distance at each sample index; truncated
/// walkers contribute only the samples they reached.
pub fn median_distance(records: &[WalkRecord]) -> Vec<f64> {
    let len = records.iter().map(|r| r.len()).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mut d: Vec<f64> = records.iter().filter_map(|r| r.distance.get(i).copied()).collect();
            median(&mut d)
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Ordinary least squares y ≈ slope·x + intercept with coefficient of
/// determination R².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    LinearFit { slope, intercept, r_squared }
}

/// Diffusion coefficient D of the fit ⟨|a − a_oracle|²⟩ ≈ D·t through the
/// origin, over all walkers and samples.
pub fn diffusion_coefficient(records: &[WalkRecord]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for r in records {
        for (t, d) in r.times.iter().zip(&r.oracle_deviation) {
            num += t * d * d;
            den += t * t;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(distance: Vec<f64>) -> WalkRecord {
        WalkRecord {
            walker: 0,
            times: (0..distance.len()).map(|i| i as f64 * 0.5).collect(),
            a: vec![0.0; distance.len()],
            p: vec![0.0; distance.len()],
            oracle_deviation: vec![0.0; distance.len()],
            distance,
            events: Vec::new(),
            max_norm_drift: 0.0,
            max_post_record_distance: 0.0,
            truncated: None,
        }
    }

    #[test]
    fn residence_counts_runs_and_exits() {
        let r = record(vec![0.0, 0.05, 0.2, 0.3, 0.01, 0.02, 0.03, 0.5]);
        let s = residence_stats(&r, 0.1);
        assert_eq!(s.fraction, 5.0 / 8.0);
        assert_eq!(s.excursions, 2);
        assert!((s.mean_sojourn - 0.5 * 2.5).abs() < 1e-12);
        assert_eq!(s.sojourn_histogram(2, 2.0), vec![0, 2]);
        assert_eq!(residence_stats(&record(vec![0.0; 5]), 0.1).fraction, 1.0);
        let alternating: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 0.0 } else { 1.0 }).collect();
        assert_eq!(residence_stats(&record(alternating), 0.1).fraction, 0.5);
    }

    #[test]
    fn fit_of_a_line_is_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = linear_fit(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(median(&mut [3.0, 1.0, 2.0, 10.0]), 2.5);
    }
}
