//! Brute-force stationary oracle: build the truncated transition matrix of
//! each chain explicitly, run plain power iteration to convergence, and
//! compare against the matrix-analytic pipeline.

mod common;

use common::{truncated_aggregated, truncated_detailed, LEVELS};
use traffic_qbd::model::ModelParams;
use traffic_qbd::qbd_agg::QbdSolution;
use traffic_qbd::qbd_detail::DetailedSolution;

#[test]
fn aggregated_pipeline_matches_power_iteration() {
    for ell in 1..=3usize {
        for p in [0.1, 0.2, 0.3, 0.4] {
            let m = ModelParams::new(p, ell).unwrap();
            let oracle = truncated_aggregated(&m).stationary(1e-14);
            let sol = QbdSolution::solve(&m).unwrap();
            let k_max = LEVELS / ell + 1;
            let st = sol.stationary(k_max).unwrap();
            let mut worst: f64 = 0.0;
            for s in 0..=LEVELS {
                worst = worst.max((oracle[s] - st.probs[s]).abs());
            }
            assert!(worst < 1e-10, "p={p} ell={ell}: sup gap {worst:e}");
        }
    }
}

#[test]
fn detailed_pipeline_matches_power_iteration() {
    for ell in 1..=3usize {
        for p in [0.1, 0.4] {
            let m = ModelParams::new(p, ell).unwrap();
            let oracle = truncated_detailed(&m).stationary(1e-14);
            let det = DetailedSolution::solve(&m).unwrap();
            let st = det.stationary(LEVELS).unwrap();
            let two_ell = m.cycle();
            let mut worst: f64 = 0.0;
            for level in 0..=LEVELS {
                // phase-resolved comparison against the gamma blocks
                for phase in 0..two_ell {
                    let gap = (oracle[level * two_ell + phase] - st.gamma[level][phase]).abs();
                    worst = worst.max(gap);
                }
                let marginal: f64 = (0..two_ell).map(|ph| oracle[level * two_ell + ph]).sum();
                worst = worst.max((marginal - st.pi_hat[level]).abs());
            }
            assert!(worst < 1e-10, "p={p} ell={ell}: sup gap {worst:e}");
        }
    }
}

#[test]
fn detailed_phase_marginal_is_uniform() {
    // the light spends 1/(2·ell) of its time in each phase
    let m = ModelParams::new(0.4, 2).unwrap();
    let oracle = truncated_detailed(&m).stationary(1e-14);
    let two_ell = m.cycle();
    for phase in 0..two_ell {
        let mass: f64 = (0..=LEVELS).map(|lvl| oracle[lvl * two_ell + phase]).sum();
        assert!(
            (mass - 1.0 / two_ell as f64).abs() < 1e-12,
            "phase {phase}: {mass}"
        );
    }
}
