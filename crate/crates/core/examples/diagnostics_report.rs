//! Runs the learner once and applies every empirical check to the recorded
//! history.
//!
//! cargo run --release --example diagnostics_report

use delayed_bobw::baselines::NoIxConfig;
use delayed_bobw::diagnostics::{
    check_drift, check_total_outstanding_bound, lambda_sum_report, rearrangement_report,
    run_invariant_suite,
};
use delayed_bobw::harness::run_single;
use delayed_bobw::rng::{stream_rng, Stream};
use delayed_bobw::{build_environment, Algorithm, DelaySpec, EnvironmentConfig, LossSpec};

fn main() {
    let config = EnvironmentConfig {
        num_arms: 3,
        horizon: 3_000,
        loss: LossSpec::Stochastic { means: vec![0.3, 0.5, 0.6], allow_equal_means: false },
        delay: DelaySpec::UniformRandom { lo: 0, hi: 60 },
        seed: 4,
    };
    let env = build_environment(&config).unwrap();
    let record = run_single(&env, Algorithm::Bobw, NoIxConfig::default(), 7, &[config.horizon]).unwrap();
    let history = record.history.unwrap();

    let mut suite = run_invariant_suite(&history);
    suite.merge(&rearrangement_report(&history));
    suite.checks.push(check_drift(&history, 50_000, &mut stream_rng(7, 0, Stream::Diagnostics)));
    suite.checks.push(check_total_outstanding_bound(&history, &env.delays.realized));
    print!("{suite}");

    let lambda = lambda_sum_report(&history);
    println!(
        "lambda sum {:.4}, max outstanding {}, ratio {:.4}",
        lambda.sum, lambda.sigma_hat_max, lambda.ratio
    );
    println!("all checks passed: {}", suite.passed());
}
