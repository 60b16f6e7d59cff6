//! Numerical solution of the detailed per-slot chain.
//!
//! Unlike the aggregated chain, the detailed blocks admit no closed-form
//! rate matrix, so G is computed with a quadratically convergent doubling
//! scheme (logarithmic reduction), R follows from the standard identity
//! `R = A₁(I - A₀ - A₁G)⁻¹`, and H is the G matrix of the level-reversed
//! chain. The same solver applied to the aggregated blocks provides a route
//! fully independent of the spectral pipeline.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{detail_blocks, BlockKind, BlockSet, ModelParams};
use crate::tol;

/// Iteration cap for the doubling scheme (each step squares the error).
const MAX_DOUBLING_STEPS: usize = 200;

/// G, R and H of one QBD block triple.
#[derive(Debug, Clone)]
pub struct QbdTriple {
    pub g: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

fn identity(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

fn g_residual(bs: &BlockSet, g: &DMatrix<f64>) -> f64 {
    let n = bs.size();
    linalg::inf_norm(&(&bs.a_minus + (&bs.a_zero - identity(n)) * g + &bs.a_plus * g * g))
}

/// Logarithmic reduction for the first-passage matrix G.
fn logarithmic_reduction_g(bs: &BlockSet) -> Result<DMatrix<f64>> {
    let n = bs.size();
    let inv = linalg::checked_inverse(&(identity(n) - &bs.a_zero), "logarithmic reduction: I - A0")?;
    let mut up = &inv * &bs.a_plus;
    let mut down = &inv * &bs.a_minus;
    let mut g = down.clone();
    let mut t = up.clone();
    let mut residual = g_residual(bs, &g);
    for _ in 0..MAX_DOUBLING_STEPS {
        if residual < tol::QBD_SOLVER {
            return Ok(g);
        }
        let mix = &up * &down + &down * &up;
        let m = linalg::checked_inverse(&(identity(n) - &mix), "logarithmic reduction: I - U")?;
        let up2 = &m * (&up * &up);
        let down2 = &m * (&down * &down);
        g += &t * &down2;
        t *= &up2;
        up = up2;
        down = down2;
        let next = g_residual(bs, &g);
        if next >= residual && residual < 1e-11 {
            // stagnated at rounding level
            return Ok(g);
        }
        residual = next;
    }
    if residual < tol::RESIDUAL {
        return Ok(g);
    }
    Err(Error::NoConvergence {
        context: "logarithmic reduction".into(),
        iterations: MAX_DOUBLING_STEPS,
        residual,
    })
}

/// Level-reversed copy of a block triple (up and down swapped).
fn reversed(bs: &BlockSet) -> BlockSet {
    BlockSet {
        a_minus: bs.a_plus.clone(),
        a_zero: bs.a_zero.clone(),
        a_plus: bs.a_minus.clone(),
        b: bs.b.clone(),
        kind: bs.kind,
    }
}

/// Solve one block triple for (G, R, H) with residual guarantees.
pub fn solve_qbd(bs: &BlockSet) -> Result<QbdTriple> {
    let n = bs.size();
    let g = logarithmic_reduction_g(bs)?;
    let res_g = g_residual(bs, &g);
    if res_g >= tol::RESIDUAL {
        return Err(Error::residual("solve_qbd: G equation", res_g, tol::RESIDUAL));
    }

    let r = &bs.a_plus
        * linalg::checked_inverse(
            &(identity(n) - &bs.a_zero - &bs.a_plus * &g),
            "solve_qbd: I - A0 - A1·G",
        )?;
    let res_r = linalg::inf_norm(
        &(&r * &r * &bs.a_minus + &r * (&bs.a_zero - identity(n)) + &bs.a_plus),
    );
    if res_r >= tol::RESIDUAL {
        return Err(Error::residual("solve_qbd: R equation", res_r, tol::RESIDUAL));
    }

    let h = logarithmic_reduction_g(&reversed(bs))?;
    let res_h = linalg::inf_norm(
        &(&bs.a_minus * &h * &h + (&bs.a_zero - identity(n)) * &h + &bs.a_plus),
    );
    if res_h >= tol::RESIDUAL {
        return Err(Error::residual("solve_qbd: H equation", res_h, tol::RESIDUAL));
    }

    Ok(QbdTriple { g, r, h })
}

/// Plain functional iteration `G ← (I-A₀)⁻¹(A₋₁ + A₁G²)`; linearly
/// convergent, kept as an independent verification of the doubling scheme.
pub fn functional_iteration_g(bs: &BlockSet, target: f64, max_iter: usize) -> Result<DMatrix<f64>> {
    let n = bs.size();
    let inv = linalg::checked_inverse(&(identity(n) - &bs.a_zero), "functional iteration: I - A0")?;
    let mut g = DMatrix::zeros(n, n);
    for _ in 0..max_iter {
        g = &inv * (&bs.a_minus + &bs.a_plus * &g * &g);
        if g_residual(bs, &g) < target {
            return Ok(g);
        }
    }
    Err(Error::NoConvergence {
        context: "functional iteration".into(),
        iterations: max_iter,
        residual: g_residual(bs, &g),
    })
}

/// Explicit left Perron data of the detailed rate matrix:
/// `η̂ = ρ²` and `û = (ρ^ell, …, ρ, 1, ρ, …, ρ^(ell-1))`, verified against
/// `ûᵀ𝒜(ρ²) = 0` with `𝒜(z) = z²A₋₁ + z(A₀-I) + A₁`.
pub fn detail_eta_u(m: &ModelParams) -> Result<(f64, DVector<f64>)> {
    let ell = m.ell();
    let rho = m.rho();
    let eta = rho * rho;
    let u = DVector::from_iterator(
        2 * ell,
        (0..2 * ell).map(|i| {
            let k = if i <= ell { ell - i } else { i - ell };
            rho.powi(k as i32)
        }),
    );
    let bs = detail_blocks(m);
    let a_of_eta =
        eta * eta * &bs.a_minus + eta * (&bs.a_zero - identity(2 * ell)) + &bs.a_plus;
    let res = (u.transpose() * a_of_eta)
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if res >= tol::RESIDUAL {
        return Err(Error::residual("detail_eta_u: ûᵀ𝒜(ρ²)", res, tol::RESIDUAL));
    }
    Ok((eta, u))
}

/// Right eigenvector of R̂ for η̂ by shifted inverse iteration, scaled so
/// that `ûᵀv̂ = 1`.
pub fn right_perron_v(
    r_hat: &DMatrix<f64>,
    eta_hat: f64,
    u_hat: &DVector<f64>,
) -> Result<DVector<f64>> {
    let start = DVector::from_element(r_hat.nrows(), 1.0);
    right_perron_v_from(r_hat, eta_hat, u_hat, &start)
}

/// Same, from a caller-chosen starting vector (the normalization pins the
/// result, so any start with a component along v̂ gives the same answer).
pub fn right_perron_v_from(
    r_hat: &DMatrix<f64>,
    eta_hat: f64,
    u_hat: &DVector<f64>,
    start: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = r_hat.nrows();
    let shift = eta_hat * (1.0 + 1e-8);
    let lu = (r_hat - shift * identity(n)).lu();
    let mut v = start.clone();
    v /= v.amax();
    for _ in 0..50 {
        let mut w = lu.solve(&v).ok_or_else(|| Error::Singular {
            context: "right_perron_v: shifted solve".into(),
            cond: f64::INFINITY,
        })?;
        // normalize and pin the sign on the largest entry
        let (imax, _) = w.iter().enumerate().fold((0, 0.0f64), |acc, (i, x)| {
            if x.abs() > acc.1 {
                (i, x.abs())
            } else {
                acc
            }
        });
        w /= w[imax];
        let res = (r_hat * &w - eta_hat * &w)
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max);
        v = w;
        if res < tol::EIGENVECTOR {
            let scale = (u_hat.transpose() * &v)[(0, 0)];
            if scale.abs() < 1e-14 {
                return Err(Error::Singular {
                    context: "right_perron_v: ûᵀv̂ vanishes".into(),
                    cond: f64::INFINITY,
                });
            }
            return Ok(v / scale);
        }
    }
    Err(Error::NoConvergence {
        context: "right_perron_v: inverse iteration".into(),
        iterations: 50,
        residual: f64::NAN,
    })
}

/// Fully solved detailed chain.
#[derive(Debug, Clone)]
pub struct DetailedSolution {
    pub params: ModelParams,
    pub blocks: BlockSet,
    pub r_hat: DMatrix<f64>,
    pub g_hat: DMatrix<f64>,
    pub h_hat: DMatrix<f64>,
    /// Spectral radius of R̂, equal to ρ².
    pub eta_hat: f64,
    /// Explicit left Perron eigenvector of R̂.
    pub u_hat: DVector<f64>,
    /// Right eigenvector with ûᵀv̂ = 1.
    pub v_hat: DVector<f64>,
    /// Decay coefficient: `π̂_k ~ ĉ·ρ^(2k)`.
    pub c_hat: f64,
    /// Boundary row vector `γ₀ᵀ = (1/2ell)·1ᵀ(I - R̂)`.
    pub gamma0: DVector<f64>,
    /// Clump constant of the detailed maximum.
    pub chi_hat: f64,
}

/// Per-level stationary data of the detailed chain.
#[derive(Debug, Clone)]
pub struct DetailedStationary {
    /// γ_k = γ₀ R̂^k, one phase-indexed vector per level.
    pub gamma: Vec<Vec<f64>>,
    /// Marginal level probabilities `π̂_k = γ_kᵀ·1`.
    pub pi_hat: Vec<f64>,
    /// Mass beyond k_max.
    pub tail_mass: f64,
}

impl DetailedSolution {
    pub fn solve(m: &ModelParams) -> Result<Self> {
        let blocks = detail_blocks(m);
        debug_assert_eq!(blocks.kind, BlockKind::Detailed);
        let triple = solve_qbd(&blocks)?;
        let (eta_hat, u_hat) = detail_eta_u(m)?;

        let sr = linalg::spectral_radius(&triple.r);
        if (sr - eta_hat).abs() >= 1e-10 {
            return Err(Error::residual(
                "detailed solve: spectral radius of R̂ vs ρ²",
                (sr - eta_hat).abs(),
                1e-10,
            ));
        }

        let v_hat = right_perron_v(&triple.r, eta_hat, &u_hat)?;
        let two_ell = 2.0 * m.ell() as f64;
        let vsum = v_hat.sum();
        let c_hat = (1.0 - eta_hat) / two_ell * vsum * u_hat.sum();
        if c_hat <= 0.0 {
            return Err(Error::invalid(format!("detailed solve: ĉ = {c_hat} not positive")));
        }

        let n = blocks.size();
        let gamma0 =
            (RowDVector::from_element(n, 1.0 / two_ell) * (identity(n) - &triple.r)).transpose();

        let kernel = &blocks.a_zero + &blocks.a_plus * &triple.g + &blocks.a_minus * &triple.h;
        let chi_hat = (1.0 - eta_hat)
            * vsum
            * (u_hat.transpose() * (identity(n) - kernel) * linalg::ones(n))[(0, 0)];
        if chi_hat <= 0.0 {
            return Err(Error::invalid(format!("detailed solve: χ̂ = {chi_hat} not positive")));
        }

        Ok(DetailedSolution {
            params: *m,
            blocks,
            r_hat: triple.r,
            g_hat: triple.g,
            h_hat: triple.h,
            eta_hat,
            u_hat,
            v_hat,
            c_hat,
            gamma0,
            chi_hat,
        })
    }

    /// Level distribution up to `k_max`, with the analytic tail.
    pub fn stationary(&self, k_max: usize) -> Result<DetailedStationary> {
        if k_max < 1 {
            return Err(Error::invalid("stationary: k_max must be ≥ 1"));
        }
        let n = self.blocks.size();
        let mut gamma = Vec::with_capacity(k_max + 1);
        let mut pi_hat = Vec::with_capacity(k_max + 1);
        let mut block = self.gamma0.transpose();
        for _ in 0..=k_max {
            gamma.push(block.iter().copied().collect::<Vec<f64>>());
            pi_hat.push(block.sum());
            block = &block * &self.r_hat;
        }
        let inv = linalg::checked_inverse(&(identity(n) - &self.r_hat), "stationary: I - R̂")?;
        let tail_mass = (&block * inv * linalg::ones(n))[(0, 0)];
        Ok(DetailedStationary {
            gamma,
            pi_hat,
            tail_mass,
        })
    }
}
