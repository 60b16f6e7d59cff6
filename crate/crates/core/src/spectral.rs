//! Spectral machinery behind the aggregated chain.
//!
//! The one-cycle Toeplitz symbol factors through the quadratics
//! `s_j(z) = (p z + q)^2 - ω^(j-1) z` over the ell-th roots of unity ω. Each
//! quadratic contributes a root pair (σ_j, μ_j) with |σ_j| ≤ 1 < |μ_j|; the
//! σ's generate the first-passage matrix G and the reciprocals of the μ's
//! generate the rate matrix R, both as powers of companion matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::ModelParams;
use crate::tol;

/// Roots of one quadratic factor `s_j`.
#[derive(Debug, Clone, Copy)]
pub struct RootPair {
    /// 1-based factor index j.
    pub index: usize,
    /// Root with |σ| ≤ 1.
    pub sigma: Complex64,
    /// Root with |μ| > 1.
    pub mu: Complex64,
}

/// Everything the aggregated pipeline needs about the factorization.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Primitive ell-th root of unity.
    pub omega: Complex64,
    pub pairs: Vec<RootPair>,
    /// Coefficients of `r(z) = z^ell - Σ r_i z^i = Π (z - 1/μ_i)`.
    pub r_coeffs: Vec<f64>,
    /// Coefficients of `g(z) = z^ell - Σ x_i z^i = Π (z - σ_i)`, stored the
    /// same way (x_i multiplies z^i).
    pub g_coeffs: Vec<f64>,
}

impl SpectralData {
    pub fn compute(m: &ModelParams) -> Result<Self> {
        let pairs = sigma_mu(m)?;
        let r_coeffs = r_coefficients(&pairs)?;
        let g_coeffs = g_coefficients(&pairs)?;
        Ok(SpectralData {
            omega: Complex64::from_polar(1.0, 2.0 * PI / m.ell() as f64),
            pairs,
            r_coeffs,
            g_coeffs,
        })
    }

    pub fn ell(&self) -> usize {
        self.pairs.len()
    }
}

/// The ell-th roots of unity `ω^(j-1)` for j = 1..=ell, each evaluated
/// directly from its own angle.
pub fn unit_roots(ell: usize) -> Vec<Complex64> {
    (0..ell)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / ell as f64))
        .collect()
}

/// Solve all quadratics `p²z² + (2pq - ω^(j-1))z + q² = 0`.
///
/// The larger-magnitude root is computed first with the cancellation-free
/// branch of the quadratic formula; the small root follows from the product
/// of roots `q²/p²` (σ can be tiny for small p, where the textbook formula
/// loses digits).
pub fn sigma_mu(m: &ModelParams) -> Result<Vec<RootPair>> {
    let (p, q) = (m.p(), m.q());
    let a = Complex64::new(p * p, 0.0);
    let product = Complex64::new((q / p) * (q / p), 0.0);
    unit_roots(m.ell())
        .into_iter()
        .enumerate()
        .map(|(k, omega_pow)| {
            let b = Complex64::new(2.0 * p * q, 0.0) - omega_pow;
            let c = Complex64::new(q * q, 0.0);
            let mut s = (b * b - 4.0 * a * c).sqrt();
            if (b.conj() * s).re < 0.0 {
                s = -s;
            }
            let mu = -(b + s) / (2.0 * a);
            let sigma = product / mu;
            let (sigma, mu) = order_pair(sigma, mu);
            if sigma.norm() > 1.0 + tol::IMAG_RESIDUE || mu.norm() < 1.0 + tol::IMAG_RESIDUE {
                return Err(Error::Ambiguous {
                    context: format!(
                        "sigma_mu: root pair j={} straddles the unit circle",
                        k + 1
                    ),
                    margin: (sigma.norm() - 1.0).abs().min((mu.norm() - 1.0).abs()),
                    tol: tol::IMAG_RESIDUE,
                });
            }
            Ok(RootPair {
                index: k + 1,
                sigma,
                mu,
            })
        })
        .collect()
}

/// Order by modulus, ties by real part. Ties cannot occur for p < q; the
/// rule only pins determinism.
fn order_pair(x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    let (nx, ny) = (x.norm(), y.norm());
    if nx < ny || (nx == ny && x.re <= y.re) {
        (x, y)
    } else {
        (y, x)
    }
}

/// Coefficients r_0..r_{ell-1} of `r(z) = z^ell - Σ r_i z^i = Π (z - 1/μ_i)`.
pub fn r_coefficients(pairs: &[RootPair]) -> Result<Vec<f64>> {
    let roots: Vec<Complex64> = pairs.iter().map(|rp| rp.mu.inv()).collect();
    negated_lower_coefficients(&roots, "r_coefficients")
}

/// Coefficients of `g(z) = Π (z - σ_i)` in the same `z^ell - Σ x_i z^i`
/// layout.
pub fn g_coefficients(pairs: &[RootPair]) -> Result<Vec<f64>> {
    let roots: Vec<Complex64> = pairs.iter().map(|rp| rp.sigma).collect();
    negated_lower_coefficients(&roots, "g_coefficients")
}

/// Expand `Π (z - root)` and return the negated non-leading coefficients, so
/// the polynomial reads `z^n - Σ x_i z^i`. Roots come in conjugate pairs, so
/// the result must be real up to rounding.
fn negated_lower_coefficients(roots: &[Complex64], context: &str) -> Result<Vec<f64>> {
    let monic = linalg::poly_from_roots(roots);
    let lower: Vec<Complex64> = monic[..roots.len()].iter().map(|c| -c).collect();
    linalg::real_parts(&lower, context)
}

/// Companion-matrix layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompanionForm {
    /// Superdiagonal of ones, coefficient row at the bottom.
    BottomRow,
    /// Coefficient row at the top, subdiagonal of ones.
    TopRow,
}

/// Companion matrix of `z^n - Σ x_i z^i` in the requested layout. Singular
/// exactly when `x[0] = 0`.
pub fn companion(x: &[f64], form: CompanionForm) -> DMatrix<f64> {
    let n = x.len();
    assert!(n > 0, "companion of an empty vector");
    let mut c = DMatrix::zeros(n, n);
    match form {
        CompanionForm::BottomRow => {
            for i in 0..n - 1 {
                c[(i, i + 1)] = 1.0;
            }
            for (j, &v) in x.iter().enumerate() {
                c[(n - 1, j)] = v;
            }
        }
        CompanionForm::TopRow => {
            for (j, &v) in x.iter().enumerate() {
                c[(0, j)] = v;
            }
            for i in 1..n {
                c[(i, i - 1)] = 1.0;
            }
        }
    }
    c
}
