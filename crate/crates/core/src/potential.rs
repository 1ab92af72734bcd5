//! One-dimensional polynomial potentials.

use serde::{Deserialize, Serialize};

/// V(x) = Σ_n c_n xⁿ.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    /// ½ k x²
    pub fn harmonic(k: f64) -> Self {
        Polynomial::new(vec![0.0, 0.0, 0.5 * k])
    }

    /// x⁴/4
    pub fn quartic() -> Self {
        Polynomial::new(vec![0.0, 0.0, 0.0, 0.0, 0.25])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }

    pub fn is_at_most_quadratic(&self) -> bool {
        self.degree() <= 2
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(n, c)| n as f64 * c).collect())
    }

    /// E[V(a + σZ)] for standard normal Z, from exact Gaussian moments.
    pub fn gaussian_mean(&self, a: f64, sigma: f64) -> f64 {
        // E[(a+σZ)^n] = Σ_k C(n,k) a^{n-k} σ^k E[Z^k], E[Z^k] = (k-1)!! for even k
        let mut total = 0.0;
        for (n, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let mut binom = 1.0;
            let mut moment = 0.0;
            let mut z_moment = 1.0;
            for k in 0..=n {
                if k > 0 {
                    binom *= (n - k + 1) as f64 / k as f64;
                }
                if k % 2 == 0 {
                    if k >= 2 {
                        z_moment *= (k - 1) as f64;
                    }
                    moment += binom * a.powi((n - k) as i32) * sigma.powi(k as i32) * z_moment;
                }
            }
            total += c * moment;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_derivative() {
        let v = Polynomial::new(vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(v.eval(2.0), 1.0 - 4.0 + 24.0);
        assert_eq!(v.derivative().eval(2.0), -2.0 + 36.0);
        assert_eq!(v.degree(), 3);
        assert!(Polynomial::harmonic(2.0).is_at_most_quadratic());
    }

    #[test]
    fn gaussian_mean_of_quartic_force() {
        let f = Polynomial::quartic().derivative();
        let (a, s) = (1.3, 0.4);
        assert!((f.gaussian_mean(a, s) - (a.powi(3) + 3.0 * a * s * s)).abs() < 1e-14);
        let v = Polynomial::quartic();
        let expected = 0.25 * (a.powi(4) + 6.0 * a * a * s * s + 3.0 * s.powi(4));
        assert!((v.gaussian_mean(a, s) - expected).abs() < 1e-14);
    }
}
