use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::hilbert::{inner, QuantumState};
use crate::Result;

/// Real Gram matrix G_jk = Re⟨T_j|T_k⟩ with its spectral condition number.
#[derive(Debug, Clone)]
pub struct Gram {
    pub matrix: DMatrix<f64>,
    /// λ_max/λ_min, infinite when G is singular.
    pub condition: f64,
    pub min_eigenvalue: f64,
}

impl Gram {
    fn from_matrix(matrix: DMatrix<f64>) -> Self {
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym).eigenvalues;
        let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        Gram { matrix, condition, min_eigenvalue: min }
    }
}

pub fn gram(basis: &[QuantumState]) -> Result<Gram> {
    let d = basis.len();
    let mut g = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in j..d {
            let v = inner(&basis[j], &basis[k])?.re;
            g[(j, k)] = v;
            g[(k, j)] = v;
        }
    }
    Ok(Gram::from_matrix(g))
}

/// Removes from each T_j its real component along the phase direction iΨ:
/// T_j − iΨ·Re⟨iΨ|T_j⟩/‖Ψ‖².
pub fn horizontal_basis(psi: &QuantumState, basis: &[QuantumState]) -> Result<Vec<QuantumState>> {
    let ipsi = psi.scaled(C64::i());
    let nn = psi.norm_sqr();
    basis
        .iter()
        .map(|t| {
            let c = inner(&ipsi, t)?.re / nn;
            let mut h = t.clone();
            h.axpy(C64::new(-c, 0.0), &ipsi)?;
            Ok(h)
        })
        .collect()
}

/// Gram matrix of the horizontal tangent vectors, the metric the projection
/// solves with.
pub fn horizontal_gram(psi: &QuantumState, basis: &[QuantumState]) -> Result<Gram> {
    gram(&horizontal_basis(psi, basis)?)
}
