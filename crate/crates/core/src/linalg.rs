//! Small dense-matrix helpers shared across the crate.
//!
//! All matrices at play are dense and at most a few dozen rows, so everything
//! here is a thin layer over nalgebra's LU and Schur machinery.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// ∞-norm (maximum absolute row sum).
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest absolute entry; used for elementwise route comparisons.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `m` raised to a nonnegative integer power.
pub fn mat_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut acc = DMatrix::<f64>::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        acc = &acc * m;
    }
    acc
}

/// Inverse with a condition-number estimate guard (‖A‖∞ · ‖A⁻¹‖∞).
pub fn checked_inverse(m: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    let norm_a = inf_norm(m);
    let inv = m.clone().lu().try_inverse().ok_or_else(|| Error::Singular {
        context: context.to_string(),
        cond: f64::INFINITY,
    })?;
    let cond = norm_a * inf_norm(&inv);
    if !cond.is_finite() || cond > tol::COND_LIMIT {
        return Err(Error::Singular {
            context: context.to_string(),
            cond,
        });
    }
    Ok(inv)
}

/// Spectral radius via the (real) Schur form.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a real matrix as complex numbers.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Greedy multiset match: largest distance after pairing each expected value
/// with its closest remaining computed value.
pub fn multiset_distance(expected: &[Complex64], computed: &[Complex64]) -> f64 {
    assert_eq!(expected.len(), computed.len());
    let mut remaining: Vec<Complex64> = computed.to_vec();
    let mut worst: f64 = 0.0;
    for e in expected {
        let (idx, dist) = remaining
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty multiset");
        worst = worst.max(dist);
        remaining.swap_remove(idx);
    }
    worst
}

/// Monic polynomial with the given roots, as coefficients `c[0] + c[1] z + …
/// + c[n] z^n` (so `c[n] = 1`), built by incremental factor multiplication.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &root in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * root;
        }
        coeffs = next;
    }
    coeffs
}

/// Horner evaluation of a complex polynomial (coefficients low to high).
pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Drop imaginary parts that are below `tol::IMAG_RESIDUE`, failing loudly if
/// any value carries more than that.
pub fn real_parts(values: &[Complex64], context: &str) -> Result<Vec<f64>> {
    let worst = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst >= tol::IMAG_RESIDUE {
        return Err(Error::residual(
            format!("{context}: imaginary residue"),
            worst,
            tol::IMAG_RESIDUE,
        ));
    }
    Ok(values.iter().map(|z| z.re).collect())
}

/// Same check for a complex matrix.
pub fn real_matrix(m: &DMatrix<Complex64>, imag_tol: f64, context: &str) -> Result<DMatrix<f64>> {
    let worst = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst >= imag_tol {
        return Err(Error::residual(
            format!("{context}: imaginary residue"),
            worst,
            imag_tol,
        ));
    }
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re))
}

/// Row vector of ones.
pub fn ones(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_from_roots_expands_products() {
        // (z - 2)(z + 3) = z^2 + z - 6
        let roots = [Complex64::new(2.0, 0.0), Complex64::new(-3.0, 0.0)];
        let c = poly_from_roots(&roots);
        assert!((c[0].re + 6.0).abs() < 1e-15);
        assert!((c[1].re - 1.0).abs() < 1e-15);
        assert!((c[2].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conjugate_roots_give_real_coefficients() {
        let roots = [Complex64::new(0.3, 0.4), Complex64::new(0.3, -0.4)];
        let c = poly_from_roots(&roots);
        let real = real_parts(&c, "test").unwrap();
        // z^2 - 0.6 z + 0.25
        assert!((real[0] - 0.25).abs() < 1e-15);
        assert!((real[1] + 0.6).abs() < 1e-15);
    }

    #[test]
    fn inf_norm_is_max_row_sum() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 0.25]);
        assert_eq!(inf_norm(&m), 3.0);
    }

    #[test]
    fn spectral_radius_of_known_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 4.0 / 81.0, 1.0 / 3.0]);
        // eigenvalues 4/9 and -1/9
        assert!((spectral_radius(&m) - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn checked_inverse_rejects_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(checked_inverse(&m, "test").is_err());
    }
}
