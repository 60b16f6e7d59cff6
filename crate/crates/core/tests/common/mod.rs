//! Shared brute-force machinery for integration tests: explicitly truncated
//! transition matrices and plain power iteration, entirely independent of
//! the matrix-analytic pipeline.

use traffic_qbd::model::{jump_law, ModelParams};

pub const LEVELS: usize = 300;

/// Sparse row representation of a truncated stochastic matrix.
pub struct SparseChain {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseChain {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Power iteration x ← xP until the sup-norm change drops below `target`.
    pub fn stationary(&self, target: f64) -> Vec<f64> {
        let n = self.n();
        let mut x = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        for _ in 0..5_000_000usize {
            next.iter_mut().for_each(|v| *v = 0.0);
            for (i, row) in self.rows.iter().enumerate() {
                let xi = x[i];
                for &(j, p) in row {
                    next[j] += xi * p;
                }
            }
            let change = x
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            std::mem::swap(&mut x, &mut next);
            if change < target {
                let total: f64 = x.iter().sum();
                x.iter_mut().for_each(|v| *v /= total);
                return x;
            }
        }
        panic!("power iteration did not converge");
    }
}

/// Truncated scalar chain of the aggregated process: one state per queue
/// length, jumps by the one-cycle law, up-mass at the truncation edge folded
/// back onto the edge state.
pub fn truncated_aggregated(m: &ModelParams) -> SparseChain {
    let law = jump_law(m);
    let ell = m.ell() as i64;
    let n = LEVELS + 1;
    let rows = (0..n)
        .map(|from| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for j in -ell..=ell {
                let p = law.prob(j);
                if p == 0.0 {
                    continue;
                }
                let to = (from as i64 + j).clamp(0, LEVELS as i64) as usize;
                match row.iter_mut().find(|(t, _)| *t == to) {
                    Some((_, acc)) => *acc += p,
                    None => row.push((to, p)),
                }
            }
            row
        })
        .collect();
    SparseChain { rows }
}

/// Truncated detailed chain: states (level, phase), phase advancing
/// cyclically, arrivals on red and departures on green, up-moves at the
/// truncation edge folded back.
pub fn truncated_detailed(m: &ModelParams) -> SparseChain {
    let two_ell = m.cycle();
    let idx = |level: usize, phase: usize| level * two_ell + phase;
    let n = (LEVELS + 1) * two_ell;
    let mut rows = vec![Vec::new(); n];
    for level in 0..=LEVELS {
        for phase in 0..two_ell {
            let next_phase = (phase + 1) % two_ell;
            let row = &mut rows[idx(level, phase)];
            if phase < m.ell() {
                let up = (level + 1).min(LEVELS);
                row.push((idx(up, next_phase), m.p()));
                row.push((idx(level, next_phase), m.q()));
            } else {
                let down = level.saturating_sub(1);
                row.push((idx(down, next_phase), m.q()));
                row.push((idx(level, next_phase), m.p()));
            }
        }
    }
    SparseChain { rows }
}
