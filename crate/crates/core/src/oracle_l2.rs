//! Exact closed forms for the half-cycle-2 aggregated chain.
//!
//! For `ell = 2` the stationary equations admit a complete solution by
//! generating functions: the boundary probabilities, the geometric decay
//! coefficient, the denominator roots, the hitting/return probabilities of
//! the free walk and the clump rates all have printed closed forms in
//! `theta = sqrt(1 + 4pq)`. This module evaluates them verbatim and serves
//! as an independent ground truth for the matrix pipeline.

use crate::error::{Error, Result};

/// All closed-form quantities for `ell = 2` at a given `p`.
#[derive(Debug, Clone, Copy)]
pub struct ExactL2 {
    pub p: f64,
    pub theta: f64,
    /// Denominator roots of the generating function, |z1| < 1 < z2 < |z3|.
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    /// Stationary probabilities of queue lengths 0 and 1.
    pub pi0: f64,
    pub pi1: f64,
    /// Decay coefficient: `pi_j ~ a_decay · (p²/q²)^j`.
    pub a_decay: f64,
    /// Return probability to the current state of the free walk…
    pub nu0: f64,
    /// …and hitting probabilities of 0 from -1, +1, +2.
    pub nu1: f64,
    pub nu_m1: f64,
    pub nu_m2: f64,
    /// Tail mass `Σ_{j≥2} pi_j = F(1)`.
    pub l_tail: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::invalid(format!("p = {p} must lie in (0, 0.5)")));
    }
    Ok(())
}

impl ExactL2 {
    pub fn new(p: f64) -> Result<Self> {
        check_p(p)?;
        let (pi0, pi1, a_decay) = exact_boundary(p);
        let (z1, z2, z3) = exact_roots(p);
        let (nu0, nu1, nu_m1, nu_m2) = exact_nu(p);
        let q = 1.0 - p;
        let theta = (1.0 + 4.0 * p * q).sqrt();
        // L = lim_{z→1} F(z)
        let l_tail = (2.0 * p.powi(3) * (1.0 + q) * pi0
            - (2.0 * (q - p) - q.powi(4)) * pi1)
            / (2.0 * (q - p));
        Ok(ExactL2 {
            p,
            theta,
            z1,
            z2,
            z3,
            pi0,
            pi1,
            a_decay,
            nu0,
            nu1,
            nu_m1,
            nu_m2,
            l_tail,
        })
    }
}

/// Boundary probabilities and decay coefficient:
/// `pi0 = (q-p)(3-2p-θ) / (2q⁴)`,
/// `pi1 = (q-p)[-1-p-2pq+(1+p)θ] / q⁵`,
/// `A(p) = (q-p)[1+(q-p)θ] / (4q⁴)`.
pub fn exact_boundary(p: f64) -> (f64, f64, f64) {
    let q = 1.0 - p;
    let theta = (1.0 + 4.0 * p * q).sqrt();
    let pi0 = (q - p) * (3.0 - 2.0 * p - theta) / (2.0 * q.powi(4));
    let pi1 = (q - p) * (-1.0 - p - 2.0 * p * q + (1.0 + p) * theta) / q.powi(5);
    let a = (q - p) * (1.0 + (q - p) * theta) / (4.0 * q.powi(4));
    (pi0, pi1, a)
}

/// Denominator roots: `z1 = (-1-2pq+θ)/(2p²)`, `z2 = q²/p²`,
/// `z3 = (-1-2pq-θ)/(2p²)`.
pub fn exact_roots(p: f64) -> (f64, f64, f64) {
    let q = 1.0 - p;
    let theta = (1.0 + 4.0 * p * q).sqrt();
    let z1 = (-1.0 - 2.0 * p * q + theta) / (2.0 * p * p);
    let z2 = (q / p) * (q / p);
    let z3 = (-1.0 - 2.0 * p * q - theta) / (2.0 * p * p);
    (z1, z2, z3)
}

/// Hitting/return probabilities of the free one-cycle walk around 0.
pub fn exact_nu(p: f64) -> (f64, f64, f64, f64) {
    let q = 1.0 - p;
    let theta = (1.0 + 4.0 * p * q).sqrt();
    let qp2 = (q - p) * (q - p);
    let nu0 = (-1.0 + 2.0 * p + 8.0 * p.powi(2) - 8.0 * p.powi(3) + qp2 * theta) / (4.0 * p * q);
    let common = 1.0 - 8.0 * p.powi(2) + 16.0 * p.powi(3) - 8.0 * p.powi(4) - (q - p) * theta;
    let nu1 = common / (8.0 * p * q.powi(3));
    let nu_m1 = common / (8.0 * p.powi(3) * q);
    let nu_m2 = (-1.0 - 2.0 * p + 12.0 * p.powi(2) - 24.0 * p.powi(4) + 24.0 * p.powi(5)
        - 8.0 * p.powi(6)
        + (q - p) * (1.0 + 2.0 * p - 4.0 * p * p) * theta)
        / (8.0 * p.powi(5) * q);
    (nu0, nu1, nu_m1, nu_m2)
}

/// Numerator polynomial of the generating function, coefficients low to
/// high: `N(z) = {p³(4-3p+pz)·pi0 + [-1+6p²-8p³+3p⁴+(4-3p)p³z+p⁴z²]·pi1}·z²`.
fn numerator_coeffs(p: f64, pi0: f64, pi1: f64) -> [f64; 5] {
    let p3 = p.powi(3);
    let p4 = p.powi(4);
    let c0 = p3 * (4.0 - 3.0 * p) * pi0 + (-1.0 + 6.0 * p * p - 8.0 * p3 + 3.0 * p4) * pi1;
    let c1 = p4 * pi0 + (4.0 - 3.0 * p) * p3 * pi1;
    let c2 = p4 * pi1;
    [0.0, 0.0, c0, c1, c2]
}

/// Denominator polynomial `D(z) = (q² - p²z)(q² + (1+2pq)z + p²z²)`,
/// coefficients low to high.
fn denominator_coeffs(p: f64) -> [f64; 4] {
    let q = 1.0 - p;
    let q2 = q * q;
    let p2 = p * p;
    let lin = 1.0 + 2.0 * p * q;
    [
        q2 * q2,
        q2 * lin - p2 * q2,
        q2 * p2 - p2 * lin,
        -p2 * p2,
    ]
}

/// Tail generating function `F(z) = Σ_{j≥2} pi_j z^j` as a rational
/// function. Rejects evaluation too close to a pole.
pub fn exact_f(p: f64, z: f64) -> Result<f64> {
    check_p(p)?;
    let (pi0, pi1, _) = exact_boundary(p);
    let num = numerator_coeffs(p, pi0, pi1);
    let den = denominator_coeffs(p);
    let horner = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &ci| acc * z + ci);
    let d = horner(&den);
    if d.abs() < 1e-12 {
        return Err(Error::Singular {
            context: format!("exact_f: z = {z} is within 1e-12 of a pole"),
            cond: 1.0 / d.abs(),
        });
    }
    Ok(horner(&num) / d)
}

/// Taylor coefficients of `F` at 0 (orders `0..=order`) by polynomial long
/// division of the numerator by the denominator.
pub fn f_series(p: f64, order: usize) -> Result<Vec<f64>> {
    check_p(p)?;
    let order = order.min(12);
    let (pi0, pi1, _) = exact_boundary(p);
    let num = numerator_coeffs(p, pi0, pi1);
    let den = denominator_coeffs(p);
    let mut coeffs = vec![0.0; order + 1];
    for j in 0..=order {
        let mut acc = if j < num.len() { num[j] } else { 0.0 };
        for i in 1..den.len().min(j + 1) {
            acc -= den[i] * coeffs[j - i];
        }
        coeffs[j] = acc / den[0];
    }
    Ok(coeffs)
}

/// Clump-rate coefficients multiplying `pi_j`: the cycle-start parse gives
/// `(q-p)[1+(q-p)θ]/(2q²)` and the mid-cycle parse `(q-p)[1+(q-p)θ]/(2p²)`.
pub fn clump_rates(p: f64) -> (f64, f64) {
    let q = 1.0 - p;
    let theta = (1.0 + 4.0 * p * q).sqrt();
    let shared = (q - p) * (1.0 + (q - p) * theta);
    (shared / (2.0 * q * q), shared / (2.0 * p * p))
}
