use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hilbert::QuantumState;

/// Draws an n×n matrix with density ∝ exp(−Tr H²/(2v²)): real diagonal
/// entries N(0, v²) and off-diagonal entries with independent real and
/// imaginary parts N(0, v²/2). Hermitian by construction.
pub fn sample_gue<R: Rng + ?Sized>(n: usize, v: f64, rng: &mut R) -> DMatrix<C64> {
    let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let off = v / 2f64.sqrt();
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        h[(i, i)] = C64::new(v * d, 0.0);
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let z = C64::new(off * re, off * im);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().cloned().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// exp(−iθH) for Hermitian H, built from its eigendecomposition.
pub fn kick_unitary(h: &DMatrix<C64>, theta: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|e| C64::from_polar(1.0, -theta * e)));
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

/// Ψ′ = exp(−iλτ H_rand) Ψ acting on the plain amplitude vector.
pub fn kick(psi: &QuantumState, h_rand: &DMatrix<C64>, lambda: f64, tau: f64) -> Result<QuantumState> {
    if h_rand.nrows() != psi.len() || h_rand.ncols() != psi.len() {
        return Err(Error::Dimension { expected: psi.len(), got: h_rand.nrows() });
    }
    if lambda == 0.0 {
        return Ok(psi.clone());
    }
    let u = kick_unitary(h_rand, lambda * tau);
    let out = &u * DVector::from_column_slice(psi.amplitudes());
    QuantumState::new(psi.grid().clone(), out.as_slice().to_vec())
}

/// Applies a unitary to the leading coefficients of `c` (the kick subspace).
pub fn kick_subspace(c: &mut DVector<C64>, u: &DMatrix<C64>) -> Result<()> {
    let n = u.nrows();
    if c.len() < n {
        return Err(Error::Dimension { expected: n, got: c.len() });
    }
    let head = u * c.rows(0, n);
    c.rows_mut(0, n).copy_from(&head);
    Ok(())
}

/// Cumulative distribution of the semicircle law of radius R.
pub fn semicircle_cdf(x: f64, radius: f64) -> f64 {
    let u = (x / radius).clamp(-1.0, 1.0);
    0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / std::f64::consts::PI
}

/// Kolmogorov–Smirnov statistic of a sample against a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n1 && j < n2 {
        let v = x[i].min(y[j]);
        while i < n1 && x[i] <= v {
            i += 1;
        }
        while j < n2 && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// Q_KS(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exactly_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = sample_gue(12, 0.7, &mut rng);
        assert_eq!(&h - h.adjoint(), DMatrix::from_element(12, 12, C64::new(0.0, 0.0)));
    }

    #[test]
    fn entry_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = 1.3;
        let samples = 10_000;
        let (mut mean_re, mut mean_im, mut sq, mut sq2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..samples {
            let h = sample_gue(2, v, &mut rng);
            let z = h[(0, 1)];
            mean_re += z.re;
            mean_im += z.im;
            sq += z.norm_sqr();
            sq2 += z.norm_sqr().powi(2);
        }
        let n = samples as f64;
        let se_mean = (v * v / 2.0 / n).sqrt();
        assert!((mean_re / n).abs() < 5.0 * se_mean && (mean_im / n).abs() < 5.0 * se_mean);
        let m2 = sq / n;
        let se_m2 = ((sq2 / n - m2 * m2) / n).sqrt();
        assert!((m2 - v * v).abs() < 5.0 * se_m2, "{m2}");
    }

    #[test]
    fn zero_strength_is_identity_and_kicks_are_unitary() {
        use crate::hilbert::{ConfigGrid, GridAxis};
        use std::sync::Arc;
        let g = Arc::new(ConfigGrid::new(vec![GridAxis::new("x", -1.0, 1.0, 16).unwrap()]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = QuantumState::from_fn(g.clone(), |x| C64::new(1.0 + x[0], 0.5 * x[0] * x[0])).normalized().unwrap();
        let h = sample_gue(16, 1.0, &mut rng);
        assert_eq!(kick(&psi, &h, 0.0, 1.0).unwrap().amplitudes(), psi.amplitudes());
        let mut cur = psi.clone();
        for _ in 0..1000 {
            let h = sample_gue(16, 1.0, &mut rng);
            cur = kick(&cur, &h, 0.3, 0.1).unwrap();
        }
        assert!((cur.norm() - 1.0).abs() < 1e-10);
        let wrong = sample_gue(8, 1.0, &mut rng);
        assert!(kick(&psi, &wrong, 0.1, 0.1).is_err());
    }

    #[test]
    fn semicircle_cdf_limits() {
        assert_eq!(semicircle_cdf(-3.0, 2.0), 0.0);
        assert!((semicircle_cdf(0.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((semicircle_cdf(2.0, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_sample_ks_detects_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let c: Vec<f64> = b.iter().map(|x: &f64| x + 0.5).collect();
        assert!(ks_two_sample(&a, &b).1 > 0.01);
        assert!(ks_two_sample(&a, &c).1 < 1e-6);
        let (d, _) = ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]);
        assert_eq!(d, 0.0);
    }
}
