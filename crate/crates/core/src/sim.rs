//! Seeded Monte Carlo simulation of the traffic-light walk.
//!
//! One path steps the queue one time slot at a time: a red slot adds a car
//! with probability p, a green slot removes one with probability q (the
//! removal is a no-op at level 0, which also absorbs the pass-through rule
//! for arrivals during green). The *detailed* maximum tracks every slot; the
//! *aggregated* maximum only looks at the queue at cycle ends.
//!
//! Replication r draws from a substream derived from (seed, r), so results
//! are bit-identical regardless of execution order or thread count.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Which maximum a simulation records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Maximum of the queue sampled at cycle ends.
    Aggregated,
    /// Maximum of the queue over every time slot.
    Detailed,
}

/// Simulation request.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    /// Horizon in time slots.
    pub horizon: u64,
    pub reps: u64,
    pub seed: u64,
    pub mode: SimMode,
    pub initial_level: u64,
    /// Position of the light in its cycle at time 0, 1-based in 1..=2·ell
    /// (1 = first red slot).
    pub initial_phase: usize,
}

impl SimConfig {
    pub fn new(horizon: u64, reps: u64, seed: u64, mode: SimMode) -> Self {
        SimConfig {
            horizon,
            reps,
            seed,
            mode,
            initial_level: 0,
            initial_phase: 1,
        }
    }

    fn validate(&self, m: &ModelParams) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::invalid("sim: horizon must be ≥ 1"));
        }
        if self.reps < 1 {
            return Err(Error::invalid("sim: reps must be ≥ 1"));
        }
        if self.initial_phase < 1 || self.initial_phase > m.cycle() {
            return Err(Error::invalid(format!(
                "sim: initial_phase {} out of 1..={}",
                self.initial_phase,
                m.cycle()
            )));
        }
        Ok(())
    }
}

/// 64-bit finalizer (splitmix64) used to derive replication substreams.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream seed for replication `rep` of a run seeded with `seed`.
pub fn substream_seed(seed: u64, rep: u64) -> u64 {
    mix64(seed ^ mix64(rep))
}

/// Queue level and light phase, stepping one slot per call.
#[derive(Debug, Clone, Copy)]
pub struct WalkState {
    level: u64,
    phase: usize, // 0-based
    ell: usize,
    thr_arrival: u64,
    thr_departure: u64,
}

impl WalkState {
    pub fn new(m: &ModelParams, initial_level: u64, initial_phase: usize) -> Result<Self> {
        if initial_phase < 1 || initial_phase > m.cycle() {
            return Err(Error::invalid(format!(
                "walk: initial_phase {} out of 1..={}",
                initial_phase,
                m.cycle()
            )));
        }
        let scale = (u64::MAX as f64) + 1.0;
        Ok(WalkState {
            level: initial_level,
            phase: initial_phase - 1,
            ell: m.ell(),
            thr_arrival: (m.p() * scale) as u64,
            thr_departure: (m.q() * scale) as u64,
        })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// 1-based phase in 1..=2·ell; red for phase ≤ ell.
    pub fn phase(&self) -> usize {
        self.phase + 1
    }

    pub fn is_red(&self) -> bool {
        self.phase < self.ell
    }

    /// Advance one time slot.
    #[inline]
    pub fn step(&mut self, rng: &mut ChaCha8Rng) {
        let u = rng.next_u64();
        if self.phase < self.ell {
            if u < self.thr_arrival {
                self.level += 1;
            }
        } else if u < self.thr_departure {
            self.level = self.level.saturating_sub(1);
        }
        self.phase += 1;
        if self.phase == 2 * self.ell {
            self.phase = 0;
        }
    }
}

/// Integer-valued empirical distribution.
#[derive(Debug, Clone, Default)]
pub struct Histogram {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl Histogram {
    pub fn record(&mut self, value: u64) {
        *self.counts.entry(value).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (&v, &c) in &other.counts {
            *self.counts.entry(v).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&v, &c)| (v, c))
    }

    pub fn max_value(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// Empirical P[X ≤ k].
    pub fn cdf_at(&self, k: i64) -> f64 {
        if self.total == 0 || k < 0 {
            return 0.0;
        }
        let below: u64 = self
            .counts
            .range(..=(k as u64))
            .map(|(_, &c)| c)
            .sum();
        below as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        let sum: f64 = self.counts.iter().map(|(&v, &c)| v as f64 * c as f64).sum();
        sum / self.total as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.total as f64;
        let mean = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .map(|(&v, &c)| c as f64 * (v as f64 - mean).powi(2))
            .sum();
        ss / (n - 1.0)
    }
}

fn one_path_maxima(m: &ModelParams, cfg: &SimConfig, rep: u64) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(cfg.seed, rep));
    let mut walk = WalkState::new(m, cfg.initial_level, cfg.initial_phase)
        .expect("config validated by caller");
    let cycle = m.cycle() as u64;
    let mut max_detail = walk.level();
    let mut max_agg = walk.level();
    for t in 1..=cfg.horizon {
        walk.step(&mut rng);
        let lvl = walk.level();
        if lvl > max_detail {
            max_detail = lvl;
        }
        if t % cycle == 0 && lvl > max_agg {
            max_agg = lvl;
        }
    }
    (max_agg, max_detail)
}

/// Distribution of the horizon maximum over independent replications.
pub fn simulate_max(m: &ModelParams, cfg: &SimConfig) -> Result<Histogram> {
    cfg.validate(m)?;
    let maxima: Vec<u64> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let (agg, detail) = one_path_maxima(m, cfg, rep);
            match cfg.mode {
                SimMode::Aggregated => agg,
                SimMode::Detailed => detail,
            }
        })
        .collect();
    let mut hist = Histogram::default();
    for v in maxima {
        hist.record(v);
    }
    Ok(hist)
}

/// Aggregated and detailed maxima of the *same* paths, one pair per
/// replication.
pub fn simulate_matched(m: &ModelParams, cfg: &SimConfig) -> Result<Vec<(u64, u64)>> {
    cfg.validate(m)?;
    Ok((0..cfg.reps)
        .into_par_iter()
        .map(|rep| one_path_maxima(m, cfg, rep))
        .collect())
}

/// Long-run occupancy of the detailed chain.
#[derive(Debug, Clone)]
pub struct Occupancy {
    /// Visit counts per level after burn-in.
    pub counts: Vec<u64>,
    /// Relative frequencies.
    pub freq: Vec<f64>,
    /// Empirical CDF per level.
    pub cdf: Vec<f64>,
    /// Standard error of each CDF value, by batch means over `batches`
    /// contiguous segments (the time series is autocorrelated, so the naive
    /// binomial error would be optimistic).
    pub se_cdf: Vec<f64>,
    /// Standard error of each frequency, same batch-means estimate.
    pub se_freq: Vec<f64>,
    /// Samples kept after burn-in.
    pub samples: u64,
    /// Slots discarded as burn-in.
    pub burn_in: u64,
    pub batches: usize,
}

/// Simulate `steps` slots of the detailed chain and return level-occupancy
/// frequencies with batch-means standard errors. The first 1% of the path is
/// discarded as burn-in.
pub fn simulate_occupancy(m: &ModelParams, steps: u64, seed: u64) -> Result<Occupancy> {
    if steps < 100_000 {
        return Err(Error::invalid("simulate_occupancy: steps must be ≥ 1e5"));
    }
    const BATCHES: usize = 100;
    let burn_in = steps / 100;
    let kept = steps - burn_in;
    let batch_len = kept / BATCHES as u64;
    let kept = batch_len * BATCHES as u64; // trim the remainder

    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, 0));
    let mut walk = WalkState::new(m, 0, 1)?;
    for _ in 0..burn_in {
        walk.step(&mut rng);
    }
    let mut batch_counts: Vec<Vec<u64>> = vec![Vec::new(); BATCHES];
    for counts in batch_counts.iter_mut() {
        for _ in 0..batch_len {
            walk.step(&mut rng);
            let lvl = walk.level() as usize;
            if counts.len() <= lvl {
                counts.resize(lvl + 1, 0);
            }
            counts[lvl] += 1;
        }
    }

    let levels = batch_counts.iter().map(Vec::len).max().unwrap_or(0);
    let mut counts = vec![0u64; levels];
    for bc in &batch_counts {
        for (lvl, &c) in bc.iter().enumerate() {
            counts[lvl] += c;
        }
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / kept as f64).collect();
    let mut cdf = Vec::with_capacity(levels);
    let mut acc = 0.0;
    for &f in &freq {
        acc += f;
        cdf.push(acc);
    }

    // batch means: sd over batches of the per-batch statistic, / sqrt(B)
    let se_over_batches = |stat: &dyn Fn(&[u64], usize) -> f64| -> Vec<f64> {
        (0..levels)
            .map(|lvl| {
                let vals: Vec<f64> = batch_counts
                    .iter()
                    .map(|bc| stat(bc, lvl) / batch_len as f64)
                    .collect();
                let mean = vals.iter().sum::<f64>() / BATCHES as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                    / (BATCHES as f64 - 1.0);
                (var / BATCHES as f64).sqrt()
            })
            .collect()
    };
    let se_freq = se_over_batches(&|bc: &[u64], lvl: usize| {
        bc.get(lvl).copied().unwrap_or(0) as f64
    });
    let se_cdf = se_over_batches(&|bc: &[u64], lvl: usize| {
        bc.iter().take(lvl + 1).map(|&c| c as f64).sum::<f64>()
    });

    Ok(Occupancy {
        counts,
        freq,
        cdf,
        se_cdf,
        se_freq,
        samples: kept,
        burn_in,
        batches: BATCHES,
    })
}

/// Kolmogorov–Smirnov distance between an empirical distribution and an
/// analytic CDF `P[X ≤ k]`, over the integer lattice.
pub fn ks_distance(hist: &Histogram, analytic: impl Fn(i64) -> f64) -> f64 {
    let top = hist.max_value().unwrap_or(0) as i64 + 1;
    (0..=top)
        .map(|k| (hist.cdf_at(k) - analytic(k)).abs())
        .fold(0.0, f64::max)
}
