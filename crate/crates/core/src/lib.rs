//! Matrix-analytic and extreme-value analysis of the discrete-time
//! traffic-light queue.
//!
//! Cars arrive Bernoulli(p) per slot while the light alternates between
//! `ell` red and `ell` green slots. The queue is a quasi-birth-and-death
//! process at two resolutions: per slot ([`qbd_detail`]) and per cycle
//! ([`qbd_agg`], where everything has closed form through the spectral
//! factorization in [`spectral`]). [`extremes`] turns the clump constants
//! into the Gumbel-type law of the maximum queue length, [`oracle_l2`]
//! carries the exact `ell = 2` ground truth, and [`sim`] provides seeded
//! Monte Carlo validation.

pub mod error;
pub mod extremes;
pub mod linalg;
pub mod model;
pub mod oracle_l2;
pub mod qbd_agg;
pub mod qbd_detail;
pub mod sim;
pub mod spectral;
pub mod tol;

pub use error::{Error, Result};
