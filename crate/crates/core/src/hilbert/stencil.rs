//! One-dimensional derivative matrices applied along a single grid axis.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::grid::ConfigGrid;

/// Discretization of ∂ and ∂² along an axis. Both vanish outside the grid
/// (Dirichlet-zero walls).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// 3-point central differences; second order.
    #[default]
    Fd3,
    /// Sinc discrete-variable representation (Colbert–Miller); spectrally
    /// accurate for band-limited states.
    Sinc,
}

#[derive(Debug, Clone)]
pub(crate) enum AxisMatrix {
    /// Tridiagonal Toeplitz matrix given by (diagonal, lower, upper).
    Tridiagonal { diag: f64, lower: f64, upper: f64 },
    /// Row-major n×n matrix.
    Dense { n: usize, rows: Vec<f64> },
}

impl AxisMatrix {
    pub(crate) fn first_derivative(stencil: Stencil, n: usize, dx: f64) -> Self {
        match stencil {
            Stencil::Fd3 => AxisMatrix::Tridiagonal { diag: 0.0, lower: -0.5 / dx, upper: 0.5 / dx },
            Stencil::Sinc => AxisMatrix::dense(n, |i, j| {
                if i == j {
                    0.0
                } else {
                    let d = i as f64 - j as f64;
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    sign / (d * dx)
                }
            }),
        }
    }

    pub(crate) fn second_derivative(stencil: Stencil, n: usize, dx: f64) -> Self {
        let h2 = dx * dx;
        match stencil {
            Stencil::Fd3 => AxisMatrix::Tridiagonal { diag: -2.0 / h2, lower: 1.0 / h2, upper: 1.0 / h2 },
            Stencil::Sinc => AxisMatrix::dense(n, |i, j| {
                if i == j {
                    -std::f64::consts::PI.powi(2) / (3.0 * h2)
                } else {
                    let d = i as f64 - j as f64;
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    -2.0 * sign / (d * d * h2)
                }
            }),
        }
    }

    fn dense(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rows.push(f(i, j));
            }
        }
        AxisMatrix::Dense { n, rows }
    }

    #[cfg(test)]
    pub(crate) fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            AxisMatrix::Tridiagonal { diag, lower, upper } => {
                if i == j {
                    *diag
                } else if i == j + 1 {
                    *lower
                } else if j == i + 1 {
                    *upper
                } else {
                    0.0
                }
            }
            AxisMatrix::Dense { n, rows } => rows[i * n + j],
        }
    }

    /// out += scale · (M ⊗ along axis k) input
    pub(crate) fn apply_along(&self, grid: &ConfigGrid, k: usize, input: &[C64], out: &mut [C64], scale: C64) {
        let (outer, n, inner) = grid.line_layout(k);
        let mut line = vec![C64::new(0.0, 0.0); n];
        for o in 0..outer {
            let base = o * n * inner;
            for r in 0..inner {
                let start = base + r;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = input[start + j * inner];
                }
                match self {
                    AxisMatrix::Tridiagonal { diag, lower, upper } => {
                        for i in 0..n {
                            let mut acc = line[i] * *diag;
                            if i > 0 {
                                acc += line[i - 1] * *lower;
                            }
                            if i + 1 < n {
                                acc += line[i + 1] * *upper;
                            }
                            out[start + i * inner] += scale * acc;
                        }
                    }
                    AxisMatrix::Dense { n: dim, rows } => {
                        debug_assert_eq!(*dim, n);
                        for i in 0..n {
                            let row = &rows[i * n..(i + 1) * n];
                            let mut re = 0.0;
                            let mut im = 0.0;
                            for (w, z) in row.iter().zip(&line) {
                                re += w * z.re;
                                im += w * z.im;
                            }
                            out[start + i * inner] += scale * C64::new(re, im);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_matrices_have_expected_symmetry() {
        for stencil in [Stencil::Fd3, Stencil::Sinc] {
            let d1 = AxisMatrix::first_derivative(stencil, 12, 0.3);
            let d2 = AxisMatrix::second_derivative(stencil, 12, 0.3);
            for i in 0..12 {
                for j in 0..12 {
                    assert_eq!(d1.entry(i, j), -d1.entry(j, i));
                    assert_eq!(d2.entry(i, j), d2.entry(j, i));
                }
            }
        }
    }
}
