use delayed_bobw::environment::{AdversarialSource, DelaySpec, EnvironmentConfig, LossSpec};
use delayed_bobw::harness::*;

fn config(algorithm: Algorithm, loss: LossSpec, delay: DelaySpec, horizon: usize) -> ExperimentConfig {
    let k = match &loss {
        LossSpec::Stochastic { means, .. } => means.len(),
        _ => 3,
    };
    ExperimentConfig::new(
        algorithm,
        EnvironmentConfig {
            num_arms: k,
            horizon,
            loss,
            delay,
            seed: 3,
        },
        vec![5, 1, 9, 2],
    )
}

fn bernoulli() -> LossSpec {
    LossSpec::Stochastic {
        means: vec![0.4, 0.6, 0.55],
        allow_equal_means: false,
    }
}

#[test]
fn identical_config_gives_identical_csv_bytes() {
    for algorithm in [Algorithm::Bobw, Algorithm::FtrlNoIx, Algorithm::UcbDelayed] {
        let mut cfg = config(algorithm, bernoulli(), DelaySpec::UniformRandom { lo: 0, hi: 20 }, 1_500);
        let serial = {
            cfg.parallel = Some(1);
            render_csv(&[run_experiment(&cfg).unwrap()])
        };
        cfg.parallel = Some(4);
        let parallel = render_csv(&[run_experiment(&cfg).unwrap()]);
        assert_eq!(serial, parallel);
        cfg.parallel = None;
        assert_eq!(serial, render_csv(&[run_experiment(&cfg).unwrap()]));
    }
}

#[test]
fn csv_schema_and_round_trip() {
    let cfg = config(Algorithm::Bobw, bernoulli(), DelaySpec::Constant { value: 4 }, 300);
    let trace = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_csv(&[trace.clone()], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = read_csv(&path).unwrap();
    assert_eq!(rows.len(), cfg.seeds.len() * cfg.checkpoints.len());
    let keys: Vec<(u64, usize)> = rows.iter().map(|r| (r.seed, r.checkpoint)).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    assert_eq!(keys, sorted);
    for row in &rows {
        let run = trace.runs.iter().find(|r| r.seed == row.seed).unwrap();
        let sample = run.samples.iter().find(|s| s.checkpoint == row.checkpoint).unwrap();
        assert_eq!(row.algo, "bobw");
        assert_eq!((row.num_arms, row.horizon), (3, 300));
        assert!((row.regret - sample.regret).abs() <= 1e-5 * sample.regret.abs().max(1.0));
        assert_eq!(
            (row.skips, row.sigma_hat_max, row.cum_outstanding),
            (sample.skips, sample.sigma_hat_max, sample.cum_outstanding)
        );
    }
}

#[test]
fn stochastic_regret_is_nondecreasing_and_metadata_matches() {
    let cfg = config(Algorithm::Bobw, bernoulli(), DelaySpec::Constant { value: 7 }, 2_000);
    let trace = run_experiment(&cfg).unwrap();
    for run in &trace.runs {
        assert!(run.samples.windows(2).all(|w| w[0].regret <= w[1].regret));
        let last = run.samples.last().unwrap();
        assert_eq!(last.checkpoint, 2_000);
        assert_eq!(last.skips, run.metadata.skips);
        assert_eq!(last.cum_outstanding, run.metadata.cum_outstanding);
        let c = 49.0 * 3f64.powf(2.0 / 3.0) * 3f64.ln();
        let threshold = (last.cum_outstanding as f64 / c).sqrt();
        assert!((run.metadata.final_threshold - threshold).abs() < 1e-9);
    }
}

#[test]
fn zero_adversary_has_zero_regret() {
    let cfg = config(
        Algorithm::Bobw,
        LossSpec::Adversarial {
            source: AdversarialSource::Zeros,
        },
        DelaySpec::Constant { value: 2 },
        200,
    );
    let trace = run_experiment(&cfg).unwrap();
    assert!(trace.runs.iter().flat_map(|r| &r.samples).all(|s| s.regret == 0.0));
}

#[test]
fn aggregate_single_seed_and_mismatch() {
    let mut cfg = config(Algorithm::UcbDelayed, bernoulli(), DelaySpec::Constant { value: 0 }, 100);
    cfg.seeds = vec![8];
    let trace = run_experiment(&cfg).unwrap();
    let summary = aggregate(&trace).unwrap();
    for (row, sample) in summary.rows.iter().zip(&trace.runs[0].samples) {
        assert_eq!((row.q1, row.median, row.q3), (sample.regret, sample.regret, sample.regret));
    }
    let mut broken = trace.clone();
    let mut extra = broken.runs[0].clone();
    extra.seed = 9;
    extra.samples.pop();
    broken.runs.push(extra);
    assert!(matches!(aggregate(&broken), Err(HarnessError::MismatchedCheckpoints)));
}

#[test]
fn aggregate_uses_exact_order_statistics() {
    let mut cfg = config(Algorithm::UcbDelayed, bernoulli(), DelaySpec::Constant { value: 0 }, 64);
    cfg.seeds = (1..=7).collect();
    cfg.checkpoints = vec![64];
    let trace = run_experiment(&cfg).unwrap();
    let mut values: Vec<f64> = trace.runs.iter().map(|r| r.samples[0].regret).collect();
    values.sort_by(f64::total_cmp);
    let row = aggregate(&trace).unwrap().rows[0];
    // n = 7: ranks 1, 3, 4 (0-based) by hand.
    assert_eq!((row.q1, row.median, row.q3), (values[1], values[3], values[4]));
}

#[test]
fn verify_mode_passes_clean_runs() {
    let mut cfg = config(Algorithm::Bobw, bernoulli(), DelaySpec::UniformRandom { lo: 0, hi: 40 }, 1_000);
    cfg.verify = true;
    let (_, reports) = run_experiment_with_reports(&cfg).unwrap();
    assert_eq!(reports.len(), cfg.seeds.len());
    assert!(reports.iter().all(|(_, r)| r.passed()));
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = config(Algorithm::Bobw, bernoulli(), DelaySpec::Constant { value: 0 }, 100);
    cfg.checkpoints = vec![10, 5];
    assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
    cfg.checkpoints = vec![101];
    assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
    cfg.checkpoints = vec![100];
    cfg.seeds.clear();
    assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
}
