//! The half-cycle-2 closed forms against the matrix pipeline, across the
//! parameter grid.

use traffic_qbd::extremes::chi_closed_form;
use traffic_qbd::model::ModelParams;
use traffic_qbd::oracle_l2::{clump_rates, exact_boundary, exact_roots, f_series, ExactL2};
use traffic_qbd::qbd_agg::QbdSolution;

fn p_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 * 0.05).collect()
}

#[test]
fn boundary_and_decay_match_closed_forms() {
    for p in p_grid() {
        let m = ModelParams::new(p, 2).unwrap();
        let sol = QbdSolution::solve(&m).unwrap();
        let (pi0, pi1, a) = exact_boundary(p);
        assert!((sol.pi0[0] - pi0).abs() < 1e-12, "p={p}: pi0");
        assert!((sol.pi0[1] - pi1).abs() < 1e-12, "p={p}: pi1");
        assert!((sol.decay_c - a).abs() < 1e-12, "p={p}: decay");
    }
}

#[test]
fn denominator_roots_are_the_root_pairs() {
    for p in p_grid() {
        let m = ModelParams::new(p, 2).unwrap();
        let sol = QbdSolution::solve(&m).unwrap();
        let (z1, z2, z3) = exact_roots(p);
        let pairs = &sol.spectral.pairs;
        assert!((pairs[0].mu.re - z2).abs() < 1e-12 * z2, "p={p}: z2 vs mu1");
        assert!((pairs[1].sigma.re - z1).abs() < 1e-12, "p={p}: z1 vs sigma2");
        assert!(
            (pairs[1].mu.re - z3).abs() < 1e-12 * z3.abs(),
            "p={p}: z3 vs mu2"
        );
        assert!(pairs[1].sigma.im.abs() < 1e-14);
    }
}

#[test]
fn generating_function_series_matches_stationary_tail() {
    for p in [0.1, 0.25, 0.4] {
        let m = ModelParams::new(p, 2).unwrap();
        let sol = QbdSolution::solve(&m).unwrap();
        let st = sol.stationary(10).unwrap();
        let series = f_series(p, 6).unwrap();
        for j in 2..=6 {
            assert!(
                (series[j] - st.probs[j]).abs() < 1e-9,
                "p={p} order {j}: {} vs {}",
                series[j],
                st.probs[j]
            );
        }
    }
}

#[test]
fn clump_rate_ties_chi_to_decay_constant() {
    // the printed clump-rate coefficient is exactly χ₂/c(2, p)
    for p in p_grid() {
        let m = ModelParams::new(p, 2).unwrap();
        let sol = QbdSolution::solve(&m).unwrap();
        let (lam, lam_prime) = clump_rates(p);
        assert!(
            (lam - sol.chi / sol.decay_c).abs() < 1e-12 * lam,
            "p={p}: λ coefficient"
        );
        let z2 = exact_roots(p).1;
        assert!((lam_prime / lam - z2).abs() < 1e-11 * z2, "p={p}: λ'/λ");
    }
}

#[test]
fn exponential_argument_equals_quarter_chi2() {
    // (q-p)²[1+(q-p)θ]²/(32 q⁶) = χ₂(p)/4
    for p in p_grid() {
        let q = 1.0 - p;
        let theta = (1.0 + 4.0 * p * q).sqrt();
        let lhs = (q - p).powi(2) * (1.0 + (q - p) * theta).powi(2) / (32.0 * q.powi(6));
        let rhs = chi_closed_form(2, p).unwrap() / 4.0;
        assert!((lhs - rhs).abs() < 1e-13, "p={p}: {lhs} vs {rhs}");
    }
}

#[test]
fn tail_mass_matches_pipeline() {
    for p in [0.1, 0.3, 0.45] {
        let e = ExactL2::new(p).unwrap();
        let m = ModelParams::new(p, 2).unwrap();
        let sol = QbdSolution::solve(&m).unwrap();
        let st = sol.stationary(400).unwrap();
        let tail: f64 = st.probs[2..].iter().sum::<f64>() + st.tail_mass;
        assert!((e.l_tail - tail).abs() < 1e-12, "p={p}: {} vs {tail}", e.l_tail);
    }
}
