//! Central tolerance constants.
//!
//! Every residual check, cross-route comparison and imaginary-part truncation
//! in the crate reads its threshold from here, so reproducibility is governed
//! by a single knob per category.

/// Defining matrix equations (quadratics for R, G, H; boundary system) must be
/// satisfied to this ∞-norm residual.
pub const RESIDUAL: f64 = 1e-12;

/// Independent computation routes for the same quantity must agree to this
/// elementwise tolerance.
pub const CROSS_CHECK: f64 = 1e-8;

/// Complex expressions that are real by symmetry (conjugate root pairs) may
/// carry at most this much imaginary residue before being truncated to `f64`.
pub const IMAG_RESIDUE: f64 = 1e-12;

/// Eigenvalue multiset comparisons (numerical eigensolver vs closed form).
pub const EIGENVALUE: f64 = 1e-9;

/// The companion-power and Vandermonde routes for R; the Vandermonde route is
/// increasingly ill-conditioned in ell, hence looser than `RESIDUAL`.
pub const VANDERMONDE: f64 = 1e-8;

/// Inverse-iteration eigenvector residual.
pub const EIGENVECTOR: f64 = 1e-10;

/// Largest acceptable condition-number estimate for dense solves.
pub const COND_LIMIT: f64 = 1e12;

/// Stopping residual for the quadratically convergent QBD solver.
pub const QBD_SOLVER: f64 = 1e-14;
