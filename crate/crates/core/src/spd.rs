//! Log-Euclidean geometry on symmetric positive-definite matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{MfdhError, Result};

/// Relative asymmetry tolerated before a matrix is rejected as non-symmetric.
const SYMMETRY_TOL: f64 = 1e-8;

fn check_symmetric(c: &DMatrix<f64>) -> Result<()> {
    if !c.is_square() {
        return Err(MfdhError::ManifoldDomain(format!(
            "expected a square matrix, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(MfdhError::ManifoldDomain("non-finite entry".into()));
    }
    let scale = c.amax().max(1.0);
    let asym = (c - c.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(MfdhError::ManifoldDomain(format!(
            "matrix is not symmetric (max |C - C^T| = {asym:e})"
        )));
    }
    Ok(())
}

/// Applies `f` to the spectrum of a symmetric matrix and symmetrizes the result.
fn spectral_map(c: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let sym = (c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mapped = eig.eigenvalues.map(f);
    let u = &eig.eigenvectors;
    let mut out = u * DMatrix::from_diagonal(&mapped) * u.transpose();
    symmetrize_in_place(&mut out);
    out
}

pub(crate) fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Principal matrix logarithm of an SPD matrix.
pub fn log_map(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(c)?;
    let sym = (c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(MfdhError::ManifoldDomain(format!(
            "smallest eigenvalue {min:e} is not positive"
        )));
    }
    let logs = eig.eigenvalues.map(f64::ln);
    let u = &eig.eigenvectors;
    let mut out = u * DMatrix::from_diagonal(&logs) * u.transpose();
    symmetrize_in_place(&mut out);
    Ok(out)
}

/// Matrix exponential of a symmetric matrix; inverse of [`log_map`].
pub fn exp_map(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(s)?;
    Ok(spectral_map(s, f64::exp))
}

/// Frobenius distance between matrix logarithms.
pub fn led_distance(c1: &DMatrix<f64>, c2: &DMatrix<f64>) -> Result<f64> {
    if c1.shape() != c2.shape() {
        return Err(MfdhError::DimensionMismatch {
            context: "log-Euclidean distance",
            expected: c1.nrows(),
            actual: c2.nrows(),
        });
    }
    let l1 = log_map(c1)?;
    let l2 = log_map(c2)?;
    Ok((l1 - l2).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn log_of_identity_is_zero() {
        let l = log_map(&DMatrix::identity(4, 4)).unwrap();
        assert!(l.amax() < 1e-15);
    }

    #[test]
    fn log_of_diagonal() {
        let c = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![E, E * E]));
        let l = log_map(&c).unwrap();
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0]));
        assert!((l - want).amax() < 1e-14);
    }

    #[test]
    fn led_identity_vs_scaled() {
        let d = led_distance(&DMatrix::identity(2, 2), &(DMatrix::identity(2, 2) * E)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-14);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        assert_eq!(led_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_spd() {
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(log_map(&neg), Err(MfdhError::ManifoldDomain(_))));
        let sing = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(log_map(&sing), Err(MfdhError::ManifoldDomain(_))));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0]);
        assert!(matches!(log_map(&asym), Err(MfdhError::ManifoldDomain(_))));
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert!(log_map(&rect).is_err());
    }
}
