//! Bobw, FTRL without implicit exploration, and delayed UCB on the same
//! stochastic instance and seeds; prints median regret per checkpoint.
//!
//! cargo run --release --example compare_baselines

use delayed_bobw::{aggregate, run_experiment, Algorithm, DelaySpec, EnvironmentConfig, ExperimentConfig, LossSpec};

fn main() {
    let environment = EnvironmentConfig {
        num_arms: 3,
        horizon: 8_000,
        loss: LossSpec::Stochastic { means: vec![0.4, 0.6, 0.65], allow_equal_means: false },
        delay: DelaySpec::UniformRandom { lo: 0, hi: 30 },
        seed: 1,
    };
    let checkpoints = vec![1_000, 2_000, 4_000, 8_000];
    println!("{:<12} {}", "algo", checkpoints.iter().map(|c| format!("{c:>9}")).collect::<String>());
    for algorithm in [Algorithm::Bobw, Algorithm::FtrlNoIx, Algorithm::UcbDelayed] {
        let mut config = ExperimentConfig::new(algorithm, environment.clone(), (1..=8).collect());
        config.checkpoints = checkpoints.clone();
        let summary = aggregate(&run_experiment(&config).unwrap()).unwrap();
        let medians: String = summary.rows.iter().map(|r| format!("{:>9.1}", r.median)).collect();
        println!("{:<12} {medians}", algorithm.name());
    }
}
