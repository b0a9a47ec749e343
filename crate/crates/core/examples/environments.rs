//! Builds each delay family and loss kind and prints what the learner would
//! face: realized delays, outstanding counts and the best arm.
//!
//! cargo run --example environments

use delayed_bobw::environment::{outstanding_series, AdversarialSource};
use delayed_bobw::{build_environment, DelaySpec, EnvironmentConfig, LossSpec};

fn main() {
    let horizon = 400;
    let delays = [
        DelaySpec::Constant { value: 20 },
        DelaySpec::UniformRandom { lo: 0, hi: 40 },
        DelaySpec::OutlierFront { magnitude: None, count: None },
        DelaySpec::SingleOutlier { magnitude: None },
    ];
    for delay in delays {
        let config = EnvironmentConfig {
            num_arms: 3,
            horizon,
            loss: LossSpec::Stochastic { means: vec![0.4, 0.5, 0.6], allow_equal_means: false },
            delay: delay.clone(),
            seed: 9,
        };
        let env = build_environment(&config).unwrap();
        let sigma = outstanding_series(&env.delays.realized);
        let total: usize = env.delays.realized.iter().sum();
        println!(
            "{delay:?}\n  first delays {:?}, total {total}, max outstanding {}",
            &env.delays.realized[..8],
            sigma.iter().max().unwrap_or(&0),
        );
    }

    let config = EnvironmentConfig {
        num_arms: 4,
        horizon,
        loss: LossSpec::Adversarial { source: AdversarialSource::TwoPhase },
        delay: DelaySpec::Constant { value: 0 },
        seed: 9,
    };
    let env = build_environment(&config).unwrap();
    let mut rng = delayed_bobw::rng::stream_rng(0, 0, delayed_bobw::rng::Stream::StochasticLosses);
    println!(
        "two-phase: best arm over the horizon {}, losses at t=1 {:?}, at t={horizon} {:?}",
        env.losses.best_arm(),
        env.loss_vector(1, &mut rng),
        env.loss_vector(horizon, &mut rng),
    );
}
