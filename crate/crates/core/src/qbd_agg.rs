//! Matrix-analytic solution of the aggregated chain.
//!
//! Everything here comes in closed form through the spectral factorization:
//! R and H are powers of companion matrices built from the r-coefficients,
//! G from the g-coefficients, the boundary vector is `c · e1ᵀ R`, and the
//! decay and clump constants are products over the outer roots μ_j. A
//! complex Vandermonde route recomputes R as an independent cross-check.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{agg_blocks, BlockSet, ModelParams};
use crate::spectral::{companion, CompanionForm, SpectralData};
use crate::tol;

/// Fully solved aggregated chain.
#[derive(Debug, Clone)]
pub struct QbdSolution {
    pub params: ModelParams,
    pub blocks: BlockSet,
    pub spectral: SpectralData,
    /// Rate matrix: minimal nonnegative solution of R²A₋₁ + R(A₀-I) + A₁ = 0.
    pub r: DMatrix<f64>,
    /// First passage one level down (stochastic).
    pub g: DMatrix<f64>,
    /// First passage one level up (substochastic).
    pub h: DMatrix<f64>,
    /// Expected sojourn counts of the free walk in a level window.
    pub w: DMatrix<f64>,
    /// Spectral radius of R, equal to ρ^(2·ell).
    pub eta: f64,
    /// Left Perron eigenvector of R with first component 1.
    pub u: DVector<f64>,
    /// Boundary probabilities of queue lengths 0..ell-1.
    pub pi0: DVector<f64>,
    /// Scalar c with π₀ᵀ = c·e1ᵀR, c = -Π(1-μ_ν).
    pub c_const: f64,
    /// Decay constant: π_n ~ decay_c · ρ^(2n).
    pub decay_c: f64,
    /// Clump constant χ_ell(p).
    pub chi: f64,
    /// Max elementwise gap between the companion-power and Vandermonde
    /// routes for R (populated for ell ≤ 12).
    pub route_discrepancy: Option<f64>,
}

/// Largest ell for which the Vandermonde cross-check runs; beyond that the
/// node matrix is too ill-conditioned to be informative.
pub const VANDERMONDE_MAX_ELL: usize = 12;

/// R by the reference route: transpose of the ell-th power of the bottom-row
/// companion matrix of the r-coefficients. Returns the matrix together with
/// the discrepancy against the Vandermonde route when that route ran.
pub fn compute_r(m: &ModelParams, sd: &SpectralData) -> Result<(DMatrix<f64>, Option<f64>)> {
    let c = companion(&sd.r_coeffs, CompanionForm::BottomRow);
    let r = linalg::mat_power(&c, m.ell()).transpose();
    let blocks = agg_blocks(m);
    let res = quadratic_residual(&blocks.a_minus, &blocks.a_zero, &blocks.a_plus, &r);
    if res >= tol::RESIDUAL {
        return Err(Error::residual("compute_r: rate-matrix equation", res, tol::RESIDUAL));
    }
    let discrepancy = if m.ell() <= VANDERMONDE_MAX_ELL {
        let rv = vandermonde_r(m, sd)?;
        let gap = linalg::max_abs_diff(&r, &rv);
        if gap >= tol::VANDERMONDE {
            return Err(Error::RouteMismatch {
                context: "compute_r: companion-power vs Vandermonde".into(),
                discrepancy: gap,
                tol: tol::VANDERMONDE,
            });
        }
        Some(gap)
    } else {
        None
    };
    Ok((r, discrepancy))
}

/// R by the spectral route: `V⁻¹ Dᵉˡˡ V` with Vandermonde nodes 1/μ_j, in
/// complex arithmetic. Verification only.
pub fn vandermonde_r(m: &ModelParams, sd: &SpectralData) -> Result<DMatrix<f64>> {
    let ell = m.ell();
    let nodes: Vec<Complex64> = sd.pairs.iter().map(|rp| rp.mu.inv()).collect();
    let v = DMatrix::<Complex64>::from_fn(ell, ell, |i, j| nodes[i].powu(j as u32));
    let d_pow = DMatrix::<Complex64>::from_fn(ell, ell, |i, j| {
        if i == j {
            nodes[i].powu(ell as u32)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let rhs = &d_pow * &v;
    let solved = v.lu().solve(&rhs).ok_or_else(|| Error::Singular {
        context: "vandermonde_r: node matrix".into(),
        cond: f64::INFINITY,
    })?;
    linalg::real_matrix(&solved, 1e-10, "vandermonde_r")
}

/// G as the ell-th power of the bottom-row companion of the g-coefficients.
pub fn compute_g(m: &ModelParams, sd: &SpectralData) -> Result<DMatrix<f64>> {
    let c = companion(&sd.g_coeffs, CompanionForm::BottomRow);
    let g = linalg::mat_power(&c, m.ell());
    let blocks = agg_blocks(m);
    // A₋₁ + (A₀-I)G + A₁G² = 0
    let res = linalg::inf_norm(
        &(&blocks.a_minus + (&blocks.a_zero - identity(m.ell())) * &g
            + &blocks.a_plus * &g * &g),
    );
    if res >= tol::RESIDUAL {
        return Err(Error::residual("compute_g: first-passage equation", res, tol::RESIDUAL));
    }
    Ok(g)
}

/// H as the ell-th power of the top-row companion of the reversed
/// r-coefficients (h_{ell-j} = r_j).
pub fn compute_h(m: &ModelParams, sd: &SpectralData) -> Result<DMatrix<f64>> {
    let mut h_coeffs = sd.r_coeffs.clone();
    h_coeffs.reverse();
    let c = companion(&h_coeffs, CompanionForm::TopRow);
    let h = linalg::mat_power(&c, m.ell());
    let blocks = agg_blocks(m);
    // A₋₁H² + (A₀-I)H + A₁ = 0
    let res = linalg::inf_norm(
        &(&blocks.a_minus * &h * &h + (&blocks.a_zero - identity(m.ell())) * &h
            + &blocks.a_plus),
    );
    if res >= tol::RESIDUAL {
        return Err(Error::residual("compute_h: up-passage equation", res, tol::RESIDUAL));
    }
    Ok(h)
}

/// ∞-norm residual of `R²A₋₁ + R(A₀-I) + A₁`.
pub fn quadratic_residual(
    a_minus: &DMatrix<f64>,
    a_zero: &DMatrix<f64>,
    a_plus: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> f64 {
    let n = a_zero.nrows();
    linalg::inf_norm(&(r * r * a_minus + r * (a_zero - identity(n)) + a_plus))
}

fn identity(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

/// Boundary vector `π₀ᵀ = c·e1ᵀR` with `c = -Π(1-μ_ν)`; verifies both
/// boundary equations before returning.
pub fn boundary_pi0(
    m: &ModelParams,
    blocks: &BlockSet,
    sd: &SpectralData,
    r: &DMatrix<f64>,
) -> Result<(DVector<f64>, f64)> {
    let prod: Complex64 = sd
        .pairs
        .iter()
        .map(|rp| Complex64::new(1.0, 0.0) - rp.mu)
        .product();
    if prod.im.abs() >= tol::IMAG_RESIDUE * prod.norm().max(1.0) {
        return Err(Error::residual(
            "boundary_pi0: imaginary residue in c",
            prod.im.abs(),
            tol::IMAG_RESIDUE,
        ));
    }
    let c_const = -prod.re;
    let pi0 = RowDVector::from_iterator(m.ell(), r.row(0).iter().map(|x| c_const * x));

    // π₀ᵀ(B + RA₋₁ - I) = 0
    let balance = &pi0 * (&blocks.b + r * &blocks.a_minus - identity(m.ell()));
    let res_a = balance.iter().map(|x| x.abs()).fold(0.0, f64::max);
    // π₀ᵀ(I-R)⁻¹1 = 1
    let inv = linalg::checked_inverse(&(identity(m.ell()) - r), "boundary_pi0: I - R")?;
    let res_b = ((&pi0 * inv * linalg::ones(m.ell()))[(0, 0)] - 1.0).abs();
    let res = res_a.max(res_b);
    if res >= tol::RESIDUAL {
        return Err(Error::residual("boundary_pi0: boundary equations", res, tol::RESIDUAL));
    }
    if pi0.iter().any(|&x| x <= 0.0) {
        return Err(Error::invalid("boundary_pi0: non-positive boundary probability"));
    }
    Ok((pi0.transpose(), c_const))
}

/// Decay constant `c(ell, p) = (μ₁-1)μ₁⁻¹ Π_{ν≥2} (1-μ_ν)(μ₁-μ_ν)⁻¹`.
pub fn decay_constant(sd: &SpectralData) -> Result<f64> {
    let mu1 = sd.pairs[0].mu;
    let one = Complex64::new(1.0, 0.0);
    let mut acc = (mu1 - one) / mu1;
    for rp in &sd.pairs[1..] {
        acc *= (one - rp.mu) / (mu1 - rp.mu);
    }
    if acc.im.abs() >= tol::IMAG_RESIDUE {
        return Err(Error::residual(
            "decay_constant: imaginary residue",
            acc.im.abs(),
            tol::IMAG_RESIDUE,
        ));
    }
    if acc.re <= 0.0 {
        return Err(Error::invalid(format!(
            "decay_constant: non-positive value {}",
            acc.re
        )));
    }
    Ok(acc.re)
}

/// Expected-visits matrix `W = (I - (A₀ + A₁G + A₋₁H))⁻¹` of the free walk.
pub fn sojourn_w(blocks: &BlockSet, g: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = blocks.size();
    let kernel = &blocks.a_zero + &blocks.a_plus * g + &blocks.a_minus * h;
    let w = linalg::checked_inverse(&(identity(n) - &kernel), "sojourn_w")?;
    // Neumann fixed point: W = I + kernel·W
    let res = linalg::max_abs_diff(&w, &(identity(n) + &kernel * &w));
    if res >= tol::RESIDUAL {
        return Err(Error::residual("sojourn_w: Neumann identity", res, tol::RESIDUAL));
    }
    Ok(w)
}

/// Clump constant `χ = c(ell,p) · uᵀ(I - (A₀ + A₁G + A₋₁H))·1`.
pub fn chi(
    m: &ModelParams,
    blocks: &BlockSet,
    g: &DMatrix<f64>,
    h: &DMatrix<f64>,
    decay_c: f64,
) -> Result<f64> {
    let u = perron_left_u(m);
    let n = blocks.size();
    let kernel = &blocks.a_zero + &blocks.a_plus * g + &blocks.a_minus * h;
    let value = decay_c * (u.transpose() * (identity(n) - kernel) * linalg::ones(n))[(0, 0)];
    if value <= 0.0 {
        return Err(Error::invalid(format!("chi: non-positive value {value}")));
    }
    Ok(value)
}

/// Left Perron eigenvector of R: `(1, ρ², …, ρ^(2(ell-1)))`.
pub fn perron_left_u(m: &ModelParams) -> DVector<f64> {
    let rho2 = m.rho() * m.rho();
    DVector::from_iterator(m.ell(), (0..m.ell()).map(|i| rho2.powi(i as i32)))
}

/// Scalar stationary probabilities with explicitly reported tail mass.
#[derive(Debug, Clone)]
pub struct StationaryDist {
    /// π_0, π_1, …, π_{ell(k_max+1)-1}.
    pub probs: Vec<f64>,
    /// Mass beyond the returned states: π₀ᵀR^(k_max+1)(I-R)⁻¹·1.
    pub tail_mass: f64,
}

impl QbdSolution {
    /// Solve the whole aggregated pipeline for one instance.
    pub fn solve(m: &ModelParams) -> Result<Self> {
        let blocks = agg_blocks(m);
        let spectral = SpectralData::compute(m)?;
        let (r, route_discrepancy) = compute_r(m, &spectral)?;
        let g = compute_g(m, &spectral)?;
        let h = compute_h(m, &spectral)?;
        let w = sojourn_w(&blocks, &g, &h)?;
        let (pi0, c_const) = boundary_pi0(m, &blocks, &spectral, &r)?;
        let decay_c = decay_constant(&spectral)?;
        let chi = chi(m, &blocks, &g, &h, decay_c)?;
        let eta = linalg::spectral_radius(&r);
        let u = perron_left_u(m);

        // uᵀR = ρ^(2·ell)·uᵀ
        let rho2l = m.rho().powi(2 * m.ell() as i32);
        let drift = (u.transpose() * &r - rho2l * u.transpose())
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max);
        if drift >= tol::RESIDUAL {
            return Err(Error::residual("solve: left Perron residual", drift, tol::RESIDUAL));
        }

        Ok(QbdSolution {
            params: *m,
            blocks,
            spectral,
            r,
            g,
            h,
            w,
            eta,
            u,
            pi0,
            c_const,
            decay_c,
            chi,
            route_discrepancy,
        })
    }

    /// Flattened scalar stationary probabilities for levels 0..=k_max.
    pub fn stationary(&self, k_max: usize) -> Result<StationaryDist> {
        if k_max < 1 {
            return Err(Error::invalid("stationary: k_max must be ≥ 1"));
        }
        let ell = self.params.ell();
        let mut probs = Vec::with_capacity(ell * (k_max + 1));
        let mut block = self.pi0.transpose();
        for _ in 0..=k_max {
            probs.extend(block.iter().copied());
            block = &block * &self.r;
        }
        let inv = linalg::checked_inverse(
            &(DMatrix::identity(ell, ell) - &self.r),
            "stationary: I - R",
        )?;
        let tail_mass = (&block * inv * linalg::ones(ell))[(0, 0)];
        Ok(StationaryDist { probs, tail_mass })
    }
}
