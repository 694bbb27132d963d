//! Shannon and von Neumann entropies, base 2, with `0·log 0 = 0`.

use nalgebra::SymmetricEigen;

use super::matrix::CMatrix;
use super::QuantumError;

const DISTRIBUTION_TOL: f64 = 1e-10;

pub(crate) fn shannon_unchecked(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// `-Σ p log₂ p` of a probability distribution.
pub fn shannon_entropy(p: &[f64]) -> Result<f64, QuantumError> {
    if p.iter().any(|&x| x < -DISTRIBUTION_TOL || !x.is_finite()) {
        return Err(QuantumError::InvalidDistribution);
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(QuantumError::InvalidDistribution);
    }
    Ok(shannon_unchecked(p))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    let ev: Vec<f64> = hermitian_eigenvalues(rho)
        .into_iter()
        .map(|x| x.max(0.0))
        .collect();
    shannon_unchecked(&ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shannon_cases() {
        assert!((shannon_entropy(&[0.25; 4]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-12);
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
        assert!(shannon_entropy(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn maximally_mixed_qubit() {
        let rho = CMatrix::identity(2, 2) * super::super::matrix::c(0.5, 0.0);
        assert!((von_neumann_entropy(&rho) - 1.0).abs() < 1e-12);
    }
}
