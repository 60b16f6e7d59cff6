//! Statistical validation of the simulator against the analytic pipeline.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use traffic_qbd::model::{jump_law, ModelParams};
use traffic_qbd::qbd_detail::DetailedSolution;
use traffic_qbd::sim::{
    simulate_matched, simulate_occupancy, substream_seed, SimConfig, SimMode, WalkState,
};

#[test]
fn matched_paths_keep_cycle_max_below_slot_max() {
    // M ≤ M̂ pathwise, and the mean gap approaches ell/2.
    let m = ModelParams::new(0.4, 2).unwrap();
    let mut cfg = SimConfig::new(1_000_000, 400, 42, SimMode::Detailed);
    cfg.initial_phase = 1;
    let pairs = simulate_matched(&m, &cfg).unwrap();
    assert!(pairs.iter().all(|&(agg, det)| agg <= det));
    let mean_gap: f64 =
        pairs.iter().map(|&(a, d)| (d - a) as f64).sum::<f64>() / pairs.len() as f64;
    assert!(
        (mean_gap - 1.0).abs() < 0.2,
        "ell=2: mean(M̂ - M) = {mean_gap}, want ell/2 = 1 ± 0.2"
    );
}

#[test]
fn cycle_transition_frequencies_follow_jump_law() {
    // Away from the boundary the one-cycle displacement is the free law;
    // pool transitions from all start states ≥ ell and compare per
    // displacement within 3 binomial standard errors.
    let m = ModelParams::new(0.4, 2).unwrap();
    let law = jump_law(&m);
    let ell = m.ell() as i64;
    let cycles = 400_000u64;

    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(4242, 0));
    // start high enough to supply plenty of off-boundary cycles
    let mut walk = WalkState::new(&m, 3, 1).unwrap();
    let mut counts = vec![0u64; (2 * ell + 1) as usize];
    let mut total = 0u64;
    for _ in 0..cycles {
        let from = walk.level();
        for _ in 0..m.cycle() {
            walk.step(&mut rng);
        }
        let to = walk.level();
        if from >= m.ell() as u64 {
            let j = to as i64 - from as i64;
            counts[(j + ell) as usize] += 1;
            total += 1;
        }
    }
    assert!(total > cycles / 10, "too few off-boundary cycles: {total}");
    for j in -ell..=ell {
        let expected = law.prob(j);
        let freq = counts[(j + ell) as usize] as f64 / total as f64;
        let se = (expected * (1.0 - expected) / total as f64).sqrt();
        assert!(
            (freq - expected).abs() < 3.0 * se,
            "j={j}: freq={freq:.6} expected={expected:.6} (3se={:.6})",
            3.0 * se
        );
    }
}

#[test]
fn occupancy_matches_detailed_stationary_at_small_scale() {
    let m = ModelParams::new(0.4, 2).unwrap();
    let det = DetailedSolution::solve(&m).unwrap();
    let st = det.stationary(200).unwrap();
    let occ = simulate_occupancy(&m, 2_000_000, 42).unwrap();
    let mut analytic_cdf = 0.0;
    for k in 0..occ.cdf.len() {
        analytic_cdf += st.pi_hat[k];
        // at this path length, levels below ~1e-4 see only a handful of
        // excursion clumps and their batch variance is not yet estimable
        if st.pi_hat[k] <= 1e-4 {
            break;
        }
        let gap = (occ.cdf[k] - analytic_cdf).abs();
        assert!(
            gap < 3.0 * occ.se_cdf[k],
            "k={k}: |{} - {analytic_cdf}| vs 3se={:.2e}",
            occ.cdf[k],
            3.0 * occ.se_cdf[k]
        );
    }
    // the early level frequencies are also within 3 batch-means SEs
    for k in 0..6 {
        let gap = (occ.freq[k] - st.pi_hat[k]).abs();
        assert!(gap < 3.0 * occ.se_freq[k], "freq k={k}");
    }
}

#[test]
fn occupancy_level_zero_fraction_for_short_cycles() {
    // ell = 1: the chain spends most of its time empty; check the exact π̂₀.
    let m = ModelParams::new(0.4, 1).unwrap();
    let det = DetailedSolution::solve(&m).unwrap();
    let st = det.stationary(50).unwrap();
    let occ = simulate_occupancy(&m, 1_000_000, 7).unwrap();
    let gap = (occ.freq[0] - st.pi_hat[0]).abs();
    assert!(gap < 3.0 * occ.se_freq[0], "gap={gap:.2e}");
}
