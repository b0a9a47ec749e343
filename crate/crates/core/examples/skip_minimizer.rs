//! The best skipped set for a delay sequence, compared with what the learner
//! actually accumulated on it.
//!
//! cargo run --release --example skip_minimizer

use delayed_bobw::baselines::NoIxConfig;
use delayed_bobw::diagnostics::{skip_objective_scale, skip_set_minimizer};
use delayed_bobw::harness::run_single;
use delayed_bobw::{build_environment, Algorithm, DelaySpec, EnvironmentConfig, LossSpec};

fn main() {
    let num_arms = 2;
    let horizon = 5_000;
    let config = EnvironmentConfig {
        num_arms,
        horizon,
        loss: LossSpec::Stochastic { means: vec![0.5, 0.7], allow_equal_means: false },
        delay: DelaySpec::OutlierFront { magnitude: None, count: None },
        seed: 2,
    };
    let env = build_environment(&config).unwrap();
    let best = skip_set_minimizer(&env.delays.realized, num_arms);
    println!("{best}");
    println!("skipped rounds {:?}", best.skipped);

    let record = run_single(&env, Algorithm::Bobw, NoIxConfig::default(), 1, &[horizon]).unwrap();
    let d_total = record.trace.metadata.cum_outstanding;
    println!(
        "learner: D_T={d_total}, sqrt(D_T K^(2/3) ln K)={:.3}, skips={}",
        (d_total as f64 * skip_objective_scale(num_arms)).sqrt(),
        record.trace.metadata.skips,
    );
}
