//! Problem instance and transition structures of the traffic-light queue.
//!
//! Cars arrive Bernoulli(p) per time slot; the light alternates between `ell`
//! red slots and `ell` green slots. Two Markov chains describe the queue:
//!
//! * the *detailed* chain tracks the queue length and the position of the
//!   light within its cycle, one step per time slot (blocks of size `2·ell`);
//! * the *aggregated* chain samples the queue at the end of each red+green
//!   cycle, so one step covers `2·ell` slots (blocks of size `ell`).
//!
//! Both are quasi-birth-and-death processes; this module builds their block
//! triples plus boundary block, the one-cycle jump law, and finite
//! truncations of the per-slot red/green transition operators used to
//! cross-validate the aggregated blocks.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Validated problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    q: f64,
    ell: usize,
    rho: f64,
}

impl ModelParams {
    /// Build an instance with arrival probability `p` and half-cycle length
    /// `ell`. Stability requires `p < q`, so `p` must lie in (0, 1/2).
    pub fn new(p: f64, ell: usize) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) || !p.is_finite() {
            return Err(Error::invalid(format!(
                "p = {p} out of range: the stable queue requires p < q, i.e. p in (0, 0.5)"
            )));
        }
        if ell < 1 {
            return Err(Error::invalid("ell must be ≥ 1"));
        }
        let q = 1.0 - p;
        Ok(ModelParams {
            p,
            q,
            ell,
            rho: p / q,
        })
    }

    /// Arrival probability per time slot.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Complement `1 - p`.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Number of red slots (= green slots) per cycle.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Traffic intensity `p/q`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Cycle length `2·ell`.
    pub fn cycle(&self) -> usize {
        2 * self.ell
    }
}

/// One-cycle displacement law: `probs[j + ell]` is the probability that the
/// queue changes by `j` over a full cycle, away from the boundary.
#[derive(Debug, Clone)]
pub struct JumpLaw {
    ell: usize,
    probs: Vec<f64>,
}

impl JumpLaw {
    /// Probability of displacement `j`; zero outside `-ell..=ell`.
    pub fn prob(&self, j: i64) -> f64 {
        let ell = self.ell as i64;
        if j < -ell || j > ell {
            0.0
        } else {
            self.probs[(j + ell) as usize]
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// All displacement probabilities, indexed `-ell..=ell`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Exact binomial coefficient; sizes here stay far below u128 overflow.
fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Displacement law over one cycle: `p_j = C(2ell, ell+j) p^(ell+j) q^(ell-j)`.
pub fn jump_law(m: &ModelParams) -> JumpLaw {
    let ell = m.ell();
    let n = 2 * ell as u32;
    let probs = (0..=2 * ell)
        .map(|idx| {
            let k = idx as u32; // k = ell + j
            binomial(n, k) as f64 * m.p().powi(k as i32) * m.q().powi((n - k) as i32)
        })
        .collect();
    JumpLaw { ell, probs }
}

/// Which chain a block triple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Aggregated,
    Detailed,
}

/// QBD block triple plus boundary block.
///
/// `a_minus`, `a_zero`, `a_plus` are the within-level-window transition
/// blocks one level down, same level, one level up; `b` is the level-zero
/// boundary block.
#[derive(Debug, Clone)]
pub struct BlockSet {
    pub a_minus: DMatrix<f64>,
    pub a_zero: DMatrix<f64>,
    pub a_plus: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub kind: BlockKind,
}

impl BlockSet {
    /// Block dimension (`ell` for aggregated, `2·ell` for detailed).
    pub fn size(&self) -> usize {
        self.a_zero.nrows()
    }

    /// `a_minus + a_zero + a_plus`, the transition matrix of the free walk.
    pub fn level_sum(&self) -> DMatrix<f64> {
        &self.a_minus + &self.a_zero + &self.a_plus
    }
}

/// Blocks of the aggregated chain: `ell × ell` banded slices of the scalar
/// Toeplitz law, entry `(i, j)` of the block at offset `d` being
/// `p_{d·ell + j - i}`. The boundary block folds the down-mass of each row
/// into the first column.
pub fn agg_blocks(m: &ModelParams) -> BlockSet {
    let ell = m.ell();
    let law = jump_law(m);
    let block = |d: i64| {
        DMatrix::from_fn(ell, ell, |i, j| {
            law.prob(d * ell as i64 + j as i64 - i as i64)
        })
    };
    let a_minus = block(-1);
    let a_zero = block(0);
    let a_plus = block(1);
    let mut b = a_zero.clone();
    for i in 0..ell {
        b[(i, 0)] += a_minus.row(i).sum();
    }
    BlockSet {
        a_minus,
        a_zero,
        a_plus,
        b,
        kind: BlockKind::Aggregated,
    }
}

/// Blocks of the detailed per-slot chain (`2·ell × 2·ell`). The phase always
/// advances cyclically; a red slot adds a car with probability `p`, a green
/// slot removes one with probability `q`. At level zero the removal folds
/// into staying put, hence `b = a_minus + a_zero`.
pub fn detail_blocks(m: &ModelParams) -> BlockSet {
    let ell = m.ell();
    let n = 2 * ell;
    let mut a_minus = DMatrix::zeros(n, n);
    let mut a_zero = DMatrix::zeros(n, n);
    let mut a_plus = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        if i < ell {
            a_plus[(i, j)] = m.p();
            a_zero[(i, j)] = m.q();
        } else {
            a_minus[(i, j)] = m.q();
            a_zero[(i, j)] = m.p();
        }
    }
    let b = &a_minus + &a_zero;
    BlockSet {
        a_minus,
        a_zero,
        a_plus,
        b,
        kind: BlockKind::Detailed,
    }
}

/// Finite truncations of the per-slot transition operators: `U` for a red
/// slot (stay `q` / up `p`), `V` for a green slot (down `q` / stay `p`, with
/// level 0 absorbing).
///
/// Only rows `0..n - 2·ell - 1` of `U^ell V^ell` are meaningful: the last row
/// of `U` loses its up-mass to the truncation and is left as is rather than
/// renormalized.
pub fn uv_truncated(m: &ModelParams, n_levels: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n_levels < 2 * m.ell() + 2 {
        return Err(Error::invalid(format!(
            "n_levels = {n_levels} too small: need at least 2·ell + 2 = {}",
            2 * m.ell() + 2
        )));
    }
    let n = n_levels;
    let mut u = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    for i in 0..n {
        u[(i, i)] = m.q();
        if i + 1 < n {
            u[(i, i + 1)] = m.p();
        }
    }
    v[(0, 0)] = 1.0;
    for i in 1..n {
        v[(i, i - 1)] = m.q();
        v[(i, i)] = m.p();
    }
    Ok((u, v))
}
