//! One FTRL step: the play distribution for a few regularizer settings.
//!
//! cargo run --example solve_step

use delayed_bobw::solver::{regularizer_value, solve_ftrl_with_multiplier, RegularizerParams};

fn main() {
    let losses = [3.0, 1.0, 2.5, 0.0];
    for (eta_inv, gamma_inv) in [(1.0, 0.0), (1.0, 5.0), (10.0, 5.0), (10.0, 60.0)] {
        let params = RegularizerParams::new(eta_inv, gamma_inv, losses.len()).unwrap();
        let solution = solve_ftrl_with_multiplier(&losses, &params).unwrap();
        let x = &solution.point;
        println!(
            "eta^-1={eta_inv:<5} gamma^-1={gamma_inv:<5} x={:.4?} F(x)={:.4} mu={:.4} steps={} residual={:.1e}",
            x.probs(),
            regularizer_value(x, &params),
            solution.multiplier,
            solution.outer_steps,
            solution.stationarity_residual(&losses, &params),
        );
    }
}
