use delayed_bobw::baselines::{NoIxConfig, UcbDelayed};
use delayed_bobw::environment::{
    build_environment, AdversarialSource, DelaySpec, EnvironmentConfig, LossSpec,
};
use delayed_bobw::harness::{aggregate, order_statistic, run_experiment, run_single, Algorithm, ExperimentConfig};

fn stochastic(means: Vec<f64>, delay: DelaySpec, horizon: usize) -> EnvironmentConfig {
    EnvironmentConfig {
        num_arms: means.len(),
        horizon,
        loss: LossSpec::Stochastic {
            means,
            allow_equal_means: false,
        },
        delay,
        seed: 0,
    }
}

#[test]
fn ucb_pulls_bad_arm_logarithmically() {
    let env = build_environment(&stochastic(vec![0.1, 0.9], DelaySpec::Constant { value: 0 }, 10_000)).unwrap();
    let mut pulls: Vec<f64> = (1..=20)
        .map(|seed| {
            let run = run_single(&env, Algorithm::UcbDelayed, NoIxConfig::default(), seed, &[10_000]).unwrap();
            run.arms.iter().filter(|&&a| a == 1).count() as f64
        })
        .collect();
    pulls.sort_by(f64::total_cmp);
    let median = order_statistic(&pulls, 0.5);
    assert!(median <= 200.0, "median pulls {median}");
}

#[test]
fn ucb_round_robin_when_nothing_arrives() {
    let mut ucb = UcbDelayed::new(4);
    let arms: Vec<usize> = (0..12).map(|_| ucb.step(&[])).collect();
    assert_eq!(arms, [0, 1, 2, 3].repeat(3));
}

#[test]
fn ucb_regret_grows_with_delay() {
    let final_median = |delay: usize| {
        let mut config = ExperimentConfig::new(
            Algorithm::UcbDelayed,
            stochastic(vec![0.5, 0.7], DelaySpec::Constant { value: delay }, 5_000),
            (1..=20).collect(),
        );
        config.checkpoints = vec![5_000];
        aggregate(&run_experiment(&config).unwrap()).unwrap().rows[0].median
    };
    let (fast, slow) = (final_median(0), final_median(100));
    assert!(fast <= slow, "{fast} > {slow}");
}

#[test]
fn zero_delay_learners_share_trajectories() {
    let env = build_environment(&stochastic(vec![0.3, 0.6, 0.5], DelaySpec::Constant { value: 0 }, 2_000)).unwrap();
    for seed in 0..3 {
        let a = run_single(&env, Algorithm::Bobw, NoIxConfig::default(), seed, &[2_000]).unwrap();
        let b = run_single(&env, Algorithm::FtrlNoIx, NoIxConfig::default(), seed, &[2_000]).unwrap();
        assert_eq!(a.arms, b.arms);
        assert_eq!(a.trace, b.trace);
    }
}

#[test]
fn no_ix_adversarial_within_sanity_band() {
    let env = EnvironmentConfig {
        num_arms: 4,
        horizon: 40_000,
        loss: LossSpec::Adversarial {
            source: AdversarialSource::TwoPhase,
        },
        delay: DelaySpec::Constant { value: 50 },
        seed: 1,
    };
    let median = |algorithm| {
        let mut config = ExperimentConfig::new(algorithm, env.clone(), (1..=3).collect());
        config.checkpoints = vec![40_000];
        aggregate(&run_experiment(&config).unwrap()).unwrap().rows[0].median
    };
    let (full, no_ix) = (median(Algorithm::Bobw), median(Algorithm::FtrlNoIx));
    assert!(no_ix <= 3.0 * full && full <= 3.0 * no_ix, "bobw {full}, no-ix {no_ix}");
}
