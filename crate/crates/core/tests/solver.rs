mod common;

use common::{ftrl_objective, grid_1d_full, grid_oracle, linf};
use delayed_bobw::solver::{
    regularizer_value, solve_ftrl, solve_ftrl_with_multiplier, RegularizerParams, SimplexPoint,
    SUM_TOLERANCE,
};
use proptest::prelude::*;

fn params(eta_inv: f64, gamma_inv: f64, k: usize) -> RegularizerParams {
    RegularizerParams::new(eta_inv, gamma_inv, k).unwrap()
}

#[test]
fn regularizer_matches_high_precision_value() {
    // 50-digit decimal evaluation of the formula at x = (0.3, 0.7), eta_inv = 2,
    // gamma_inv = 3.
    let expected = -10.370123242321647;
    let x = SimplexPoint::new(vec![0.3, 0.7]).unwrap();
    let v = regularizer_value(&x, &params(2.0, 3.0, 2));
    assert!((v - expected).abs() < 1e-13, "{v}");
}

#[test]
fn tsallis_two_arms_matches_full_grid() {
    let losses = [0.0, 1.0];
    let x = solve_ftrl(&losses, &params(1.0, 0.0, 2)).unwrap();
    let oracle = grid_1d_full(&losses, 1.0, 0.0, 1e-7);
    assert!(linf(x.probs(), &oracle) <= 1e-4, "{:?} vs {oracle:?}", x.probs());
}

#[test]
fn hybrid_three_arms_matches_grid() {
    let losses = [0.0, 0.5, 2.0];
    let x = solve_ftrl(&losses, &params(2.0, 1.0, 3)).unwrap();
    let oracle = grid_oracle(&losses, 2.0, 1.0, 1e-4, 1e-7);
    assert!(linf(x.probs(), &oracle) <= 1e-4, "{:?} vs {oracle:?}", x.probs());
}

#[test]
fn solution_beats_nearby_points() {
    let losses = [3.0, 0.2, 7.5, 1.0];
    let p = params(1.3, 0.7, 4);
    let x = solve_ftrl(&losses, &p).unwrap();
    let base = ftrl_objective(&losses, 1.3, 0.7, x.probs());
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let mut y = x.probs().to_vec();
            let shift = 1e-4 * y[j];
            y[i] += shift;
            y[j] -= shift;
            assert!(ftrl_objective(&losses, 1.3, 0.7, &y) >= base - 1e-12);
        }
    }
}

fn losses_strategy() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=6).prop_flat_map(|k| prop::collection::vec(0.0f64..50.0, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn output_is_on_the_simplex(losses in losses_strategy(), eta in 0.05f64..20.0, gamma in 0.0f64..20.0) {
        let k = losses.len();
        let x = solve_ftrl(&losses, &params(eta, gamma, k)).unwrap();
        let sum: f64 = x.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() <= SUM_TOLERANCE);
        prop_assert!(x.probs().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn translation_invariance(losses in losses_strategy(), shift in -100.0f64..100.0, eta in 0.05f64..20.0, gamma in 0.0f64..20.0) {
        let k = losses.len();
        let p = params(eta, gamma, k);
        let a = solve_ftrl(&losses, &p).unwrap();
        let shifted: Vec<f64> = losses.iter().map(|l| l + shift).collect();
        let b = solve_ftrl(&shifted, &p).unwrap();
        prop_assert!(linf(a.probs(), b.probs()) <= 1e-9);
    }

    #[test]
    fn lower_loss_gets_more_mass(losses in losses_strategy(), eta in 0.05f64..20.0, gamma in 0.0f64..20.0) {
        let k = losses.len();
        let x = solve_ftrl(&losses, &params(eta, gamma, k)).unwrap();
        for i in 0..k {
            for j in 0..k {
                if losses[i] < losses[j] {
                    prop_assert!(x.prob(i) >= x.prob(j));
                }
            }
        }
    }

    #[test]
    fn stationarity_holds(losses in losses_strategy(), eta in 0.05f64..20.0, gamma in 0.0f64..20.0) {
        let k = losses.len();
        let p = params(eta, gamma, k);
        let sol = solve_ftrl_with_multiplier(&losses, &p).unwrap();
        let scale = sol.multiplier.abs().max(1.0);
        prop_assert!(sol.stationarity_residual(&losses, &p) <= 1e-8 * scale);
    }

    #[test]
    fn pure_tsallis_closed_form(losses in losses_strategy(), eta in 0.05f64..20.0) {
        let k = losses.len();
        let sol = solve_ftrl_with_multiplier(&losses, &params(eta, 0.0, k)).unwrap();
        for (&x, &l) in sol.point.probs().iter().zip(&losses) {
            prop_assert!(l > sol.multiplier);
            let closed = (eta / (l - sol.multiplier)).powi(2);
            prop_assert!((x - closed).abs() <= 1e-8 * closed.max(1e-300).max(x), "{x} vs {closed}");
        }
    }

    #[test]
    fn deterministic(losses in losses_strategy(), eta in 0.05f64..20.0, gamma in 0.0f64..20.0) {
        let p = params(eta, gamma, losses.len());
        prop_assert_eq!(solve_ftrl(&losses, &p).unwrap(), solve_ftrl(&losses, &p).unwrap());
    }
}
