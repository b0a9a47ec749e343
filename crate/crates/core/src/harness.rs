//! Experiment orchestration: drives a learner through an environment for a
//! list of seeds, samples pseudo-regret at checkpoints, aggregates across
//! seeds, and reads/writes the trace CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{ftrl_no_ix, NoIxConfig, UcbDelayed};
use crate::diagnostics::{self, SuiteReport};
use crate::environment::{
    build_environment, outstanding_series, EnvError, EnvironmentConfig, EnvironmentInstance,
    LossModel,
};
use crate::rng::{stream_rng, Stream};
use crate::scheduler::{
    Arrival, RoundRecord, RoundSummary, Scheduler, SchedulerConfig, SchedulerError,
};
use crate::solver::{sample_arm, SimplexPoint};

/// Column header of the trace CSV.
pub const CSV_HEADER: &str = "algo,K,T,seed,checkpoint,regret,skips,sigma_hat_max,cum_outstanding";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Environment(#[from] EnvError),
    #[error("seed {seed}, round {round}: {source}")]
    Run {
        seed: u64,
        round: usize,
        source: SchedulerError,
    },
    #[error("invariant violation in seed {seed}:\n{report}")]
    InvariantViolation { seed: u64, report: String },
    #[error("traces have mismatched checkpoints")]
    MismatchedCheckpoints,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    CsvParse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Bobw,
    FtrlNoIx,
    UcbDelayed,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Bobw => "bobw",
            Algorithm::FtrlNoIx => "ftrl_no_ix",
            Algorithm::UcbDelayed => "ucb_delayed",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "bobw" => Some(Algorithm::Bobw),
            "ftrl_no_ix" => Some(Algorithm::FtrlNoIx),
            "ucb_delayed" => Some(Algorithm::UcbDelayed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub environment: EnvironmentConfig,
    pub seeds: Vec<u64>,
    /// Sorted rounds at which regret is sampled; defaults to powers of two
    /// up to `T` plus `T`.
    pub checkpoints: Vec<usize>,
    /// Only used by `ftrl_no_ix`.
    pub no_ix: NoIxConfig,
    /// Run the invariant suite on every seed.
    pub verify: bool,
    pub output: Option<PathBuf>,
    /// Worker threads; `None` uses the rayon default.
    pub parallel: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, environment: EnvironmentConfig, seeds: Vec<u64>) -> Self {
        let checkpoints = default_checkpoints(environment.horizon);
        Self {
            algorithm,
            environment,
            seeds,
            checkpoints,
            no_ix: NoIxConfig::default(),
            verify: false,
            output: None,
            parallel: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let horizon = self.environment.horizon;
        if self.environment.num_arms < 2 {
            return Err(HarnessError::Config("num_arms must be at least 2".into()));
        }
        if horizon < 1 {
            return Err(HarnessError::Config("horizon must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(HarnessError::Config("at least one checkpoint is required".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config("checkpoints must be strictly increasing".into()));
        }
        if self.checkpoints[0] < 1 || *self.checkpoints.last().unwrap() > horizon {
            return Err(HarnessError::Config(format!(
                "checkpoints must lie in [1, {horizon}]"
            )));
        }
        Ok(())
    }
}

/// Powers of two below `horizon`, then `horizon`.
pub fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let mut points: Vec<usize> = std::iter::successors(Some(1usize), |p| p.checked_mul(2))
        .take_while(|&p| p < horizon)
        .collect();
    points.push(horizon);
    points
}

/// Pseudo-regret and accounting state at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointSample {
    pub checkpoint: usize,
    pub regret: f64,
    pub skips: usize,
    pub sigma_hat_max: u64,
    pub cum_outstanding: u64,
}

/// End-of-run metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetadata {
    pub skips: usize,
    pub sigma_hat_max: u64,
    pub cum_outstanding: u64,
    pub final_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedTrace {
    pub seed: u64,
    pub samples: Vec<CheckpointSample>,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub algorithm: Algorithm,
    pub num_arms: usize,
    pub horizon: usize,
    pub runs: Vec<SeedTrace>,
}

/// Everything the diagnostics need from an FTRL run.
#[derive(Debug, Clone)]
pub struct SchedulerHistory {
    pub num_arms: usize,
    pub threshold_constant: f64,
    /// `distributions[t - 1] = x_t`.
    pub distributions: Vec<SimplexPoint>,
    /// `trace[t - 1]` = accounting after round `t`.
    pub trace: Vec<RoundSummary>,
    pub ledger: Vec<RoundRecord>,
}

impl SchedulerHistory {
    pub fn horizon(&self) -> usize {
        self.trace.len()
    }

    /// `D_t`, with `D_0 = 0`.
    pub fn cum_outstanding(&self, t: usize) -> u64 {
        if t == 0 {
            0
        } else {
            self.trace[t - 1].cum_outstanding
        }
    }

    pub fn threshold(&self, t: usize) -> f64 {
        self.trace[t - 1].threshold
    }

    /// `d_hat_s`, or `None` if round `s` was still pending at the horizon.
    pub fn waited(&self, s: usize) -> Option<usize> {
        self.ledger[s - 1].waited
    }
}

/// One seed's full result.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub trace: SeedTrace,
    pub arms: Vec<usize>,
    /// Present for the FTRL learners.
    pub history: Option<SchedulerHistory>,
}

/// Running pseudo-regret bookkeeping.
struct RegretMeter<'a> {
    env: &'a EnvironmentInstance,
    stochastic_regret: f64,
    learner_loss: f64,
    arm_totals: Vec<f64>,
}

impl<'a> RegretMeter<'a> {
    fn new(env: &'a EnvironmentInstance) -> Self {
        Self {
            env,
            stochastic_regret: 0.0,
            learner_loss: 0.0,
            arm_totals: vec![0.0; env.num_arms],
        }
    }

    fn observe(&mut self, arm: usize, losses: &[f64]) {
        match &self.env.losses {
            LossModel::Stochastic { gaps, .. } => self.stochastic_regret += gaps[arm],
            LossModel::Adversarial { .. } => {
                self.learner_loss += losses[arm];
                for (total, l) in self.arm_totals.iter_mut().zip(losses) {
                    *total += l;
                }
            }
        }
    }

    fn regret(&self) -> f64 {
        match &self.env.losses {
            LossModel::Stochastic { .. } => self.stochastic_regret,
            LossModel::Adversarial { .. } => {
                let best = self.arm_totals.iter().copied().fold(f64::INFINITY, f64::min);
                self.learner_loss - best
            }
        }
    }
}

/// Drives one learner through `env` for one seed.
pub fn run_single(
    env: &EnvironmentInstance,
    algorithm: Algorithm,
    no_ix: NoIxConfig,
    seed: u64,
    checkpoints: &[usize],
) -> Result<RunRecord, HarnessError> {
    match algorithm {
        Algorithm::Bobw => run_scheduler(env, SchedulerConfig::default(), seed, checkpoints),
        Algorithm::FtrlNoIx => {
            let sched = ftrl_no_ix(env.num_arms, no_ix)
                .map_err(|source| HarnessError::Run { seed, round: 0, source })?;
            run_scheduler(env, *sched.config(), seed, checkpoints)
        }
        Algorithm::UcbDelayed => Ok(run_ucb(env, seed, checkpoints)),
    }
}

/// Drives a [`Scheduler`] with the given configuration.
pub fn run_scheduler(
    env: &EnvironmentInstance,
    config: SchedulerConfig,
    seed: u64,
    checkpoints: &[usize],
) -> Result<RunRecord, HarnessError> {
    let horizon = env.horizon;
    let fail = |round: usize| move |source: SchedulerError| HarnessError::Run { seed, round, source };
    let mut sched = Scheduler::new(env.num_arms, config).map_err(fail(0))?;
    let mut loss_rng = stream_rng(seed, 0, Stream::StochasticLosses);
    let mut arm_rng = stream_rng(seed, 0, Stream::ArmSampling);
    let mut meter = RegretMeter::new(env);
    let mut distributions: Vec<SimplexPoint> = Vec::with_capacity(horizon);
    let mut arms = Vec::with_capacity(horizon);
    let mut played_loss = Vec::with_capacity(horizon);
    let mut samples = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = checkpoints.iter().peekable();

    for t in 1..=horizon {
        let x = sched.begin_round().map_err(fail(t))?;
        let arm = sample_arm(&x, &mut arm_rng);
        sched.record_play(arm).map_err(fail(t))?;
        distributions.push(x);
        let losses = env.loss_vector(t, &mut loss_rng);
        meter.observe(arm, &losses);
        arms.push(arm);
        played_loss.push(losses[arm]);

        let origins = env.arrivals_at(t);
        sched.update_counts(origins).map_err(fail(t))?;
        let arrivals: Vec<Arrival> = origins
            .iter()
            .map(|&s| Arrival {
                origin: s,
                loss: played_loss[s - 1],
            })
            .collect();
        sched
            .deliver(&arrivals, |s| distributions.get(s - 1))
            .map_err(fail(t))?;
        sched.apply_skipping().map_err(fail(t))?;

        if next_checkpoint.peek() == Some(&&t) {
            next_checkpoint.next();
            let st = sched.state();
            samples.push(CheckpointSample {
                checkpoint: t,
                regret: meter.regret(),
                skips: st.skip_count,
                sigma_hat_max: st.sigma_hat_running_max,
                cum_outstanding: st.cum_outstanding,
            });
        }
        sched.finish_round().map_err(fail(t))?;
    }

    let st = sched.state();
    let metadata = RunMetadata {
        skips: st.skip_count,
        sigma_hat_max: st.sigma_hat_running_max,
        cum_outstanding: st.cum_outstanding,
        final_threshold: st.threshold,
    };
    let history = SchedulerHistory {
        num_arms: env.num_arms,
        threshold_constant: sched.threshold_constant(),
        distributions,
        trace: sched.trace().to_vec(),
        ledger: sched.ledger().to_vec(),
    };
    Ok(RunRecord {
        trace: SeedTrace {
            seed,
            samples,
            metadata,
        },
        arms,
        history: Some(history),
    })
}

/// Drives the delayed UCB baseline. It never skips; the CSV accounting
/// columns report the ground-truth outstanding counts instead.
pub fn run_ucb(env: &EnvironmentInstance, seed: u64, checkpoints: &[usize]) -> RunRecord {
    let horizon = env.horizon;
    let mut ucb = UcbDelayed::new(env.num_arms);
    let mut loss_rng = stream_rng(seed, 0, Stream::StochasticLosses);
    let mut meter = RegretMeter::new(env);
    let sigma = outstanding_series(&env.delays.realized);
    let mut arms = Vec::with_capacity(horizon);
    let mut played_loss = Vec::with_capacity(horizon);
    let mut pending: Vec<(usize, f64)> = Vec::new();
    let mut samples = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = checkpoints.iter().peekable();
    let mut sigma_max = 0u64;
    let mut cum = 0u64;

    for t in 1..=horizon {
        let arm = ucb.step(&pending);
        pending.clear();
        let losses = env.loss_vector(t, &mut loss_rng);
        meter.observe(arm, &losses);
        arms.push(arm);
        played_loss.push(losses[arm]);
        for &s in env.arrivals_at(t) {
            pending.push((arms[s - 1], played_loss[s - 1]));
        }
        sigma_max = sigma_max.max(sigma[t - 1] as u64);
        cum += sigma[t - 1] as u64;
        if next_checkpoint.peek() == Some(&&t) {
            next_checkpoint.next();
            samples.push(CheckpointSample {
                checkpoint: t,
                regret: meter.regret(),
                skips: 0,
                sigma_hat_max: sigma_max,
                cum_outstanding: cum,
            });
        }
    }
    RunRecord {
        trace: SeedTrace {
            seed,
            samples,
            metadata: RunMetadata {
                skips: 0,
                sigma_hat_max: sigma_max,
                cum_outstanding: cum,
                final_threshold: 0.0,
            },
        },
        arms,
        history: None,
    }
}

/// Runs every seed of the experiment. Seeds are independent units; results
/// come back in seed-list order regardless of parallelism.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RegretTrace, HarnessError> {
    run_experiment_with_reports(config).map(|(trace, _)| trace)
}

/// As [`run_experiment`], also returning per-seed invariant reports when
/// `config.verify` is set.
pub fn run_experiment_with_reports(
    config: &ExperimentConfig,
) -> Result<(RegretTrace, Vec<(u64, SuiteReport)>), HarnessError> {
    config.validate()?;
    let env = build_environment(&config.environment)?;
    let job = |seed: &u64| -> Result<(SeedTrace, Option<SuiteReport>), HarnessError> {
        let record = run_single(&env, config.algorithm, config.no_ix, *seed, &config.checkpoints)?;
        let report = match (&record.history, config.verify) {
            (Some(history), true) => Some(diagnostics::run_invariant_suite(history)),
            _ => None,
        };
        Ok((record.trace, report))
    };
    let results: Vec<Result<_, HarnessError>> = match config.parallel {
        Some(1) => config.seeds.iter().map(job).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(|| config.seeds.par_iter().map(job).collect()),
        None => config.seeds.par_iter().map(job).collect(),
    };

    let mut runs = Vec::with_capacity(results.len());
    let mut reports = Vec::new();
    for result in results {
        let (trace, report) = result?;
        if let Some(report) = report {
            if !report.passed() {
                return Err(HarnessError::InvariantViolation {
                    seed: trace.seed,
                    report: report.to_string(),
                });
            }
            reports.push((trace.seed, report));
        }
        runs.push(trace);
    }
    Ok((
        RegretTrace {
            algorithm: config.algorithm,
            num_arms: config.environment.num_arms,
            horizon: config.environment.horizon,
            runs,
        },
        reports,
    ))
}

/// Order statistics of one checkpoint across seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub checkpoint: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub num_arms: usize,
    pub horizon: usize,
    pub rows: Vec<SummaryRow>,
}

/// Exact order statistic at rank `floor(q * (n - 1))` of sorted values
/// (lower median for `q = 0.5`).
pub fn order_statistic(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).floor() as usize;
    sorted[idx]
}

/// Median and quartiles per checkpoint across the seeds of a trace.
pub fn aggregate(trace: &RegretTrace) -> Result<Summary, HarnessError> {
    let first = trace.runs.first().ok_or(HarnessError::MismatchedCheckpoints)?;
    let checkpoints: Vec<usize> = first.samples.iter().map(|s| s.checkpoint).collect();
    for run in &trace.runs {
        if run.samples.len() != checkpoints.len()
            || run.samples.iter().zip(&checkpoints).any(|(s, c)| s.checkpoint != *c)
        {
            return Err(HarnessError::MismatchedCheckpoints);
        }
    }
    let rows = checkpoints
        .iter()
        .enumerate()
        .map(|(idx, &checkpoint)| {
            let mut values: Vec<f64> = trace.runs.iter().map(|r| r.samples[idx].regret).collect();
            values.sort_by(f64::total_cmp);
            SummaryRow {
                checkpoint,
                q1: order_statistic(&values, 0.25),
                median: order_statistic(&values, 0.5),
                q3: order_statistic(&values, 0.75),
            }
        })
        .collect();
    Ok(Summary {
        algorithm: trace.algorithm,
        num_arms: trace.num_arms,
        horizon: trace.horizon,
        rows,
    })
}

/// Formats a real with 6 significant digits in the style of C's `%g`.
pub fn format_sig6(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let sci = format!("{value:.5e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("exponent");
    if !(-4..6).contains(&exponent) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exponent.abs());
    }
    let decimals = (5 - exponent).max(0) as usize;
    trim_zeros(&format!("{value:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One parsed row of the trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub algo: String,
    pub num_arms: usize,
    pub horizon: usize,
    pub seed: u64,
    pub checkpoint: usize,
    pub regret: f64,
    pub skips: usize,
    pub sigma_hat_max: u64,
    pub cum_outstanding: u64,
}

/// CSV text for the given traces: rows sorted by (algo, K, T, seed,
/// checkpoint), LF line endings.
pub fn render_csv(traces: &[RegretTrace]) -> String {
    let mut rows: Vec<(&'static str, usize, usize, u64, CheckpointSample)> = traces
        .iter()
        .flat_map(|trace| {
            trace.runs.iter().flat_map(move |run| {
                run.samples.iter().map(move |s| {
                    (trace.algorithm.name(), trace.num_arms, trace.horizon, run.seed, *s)
                })
            })
        })
        .collect();
    rows.sort_by(|a, b| (a.0, a.1, a.2, a.3, a.4.checkpoint).cmp(&(b.0, b.1, b.2, b.3, b.4.checkpoint)));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (algo, k, horizon, seed, s) in rows {
        let _ = writeln!(
            out,
            "{algo},{k},{horizon},{seed},{},{},{},{},{}",
            s.checkpoint,
            format_sig6(s.regret),
            s.skips,
            s.sigma_hat_max,
            s.cum_outstanding
        );
    }
    out
}

pub fn write_csv(traces: &[RegretTrace], path: &Path) -> Result<(), HarnessError> {
    fs::write(path, render_csv(traces)).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the aggregated table: `algo,K,T,checkpoint,q1,median,q3`.
pub fn write_summary_csv(summaries: &[Summary], path: &Path) -> Result<(), HarnessError> {
    let mut out = String::from("algo,K,T,checkpoint,q1,median,q3\n");
    for summary in summaries {
        for row in &summary.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                summary.algorithm.name(),
                summary.num_arms,
                summary.horizon,
                row.checkpoint,
                format_sig6(row.q1),
                format_sig6(row.median),
                format_sig6(row.q3)
            );
        }
    }
    fs::write(path, out).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text).map_err(|(line, message)| HarnessError::CsvParse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, (usize, String)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => return Err((1, format!("unexpected header `{header}`"))),
        None => return Err((1, "empty file".into())),
    }
    lines
        .map(|(idx, line)| {
            let line_no = idx + 1;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 9 {
                return Err((line_no, format!("expected 9 columns, got {}", cells.len())));
            }
            fn field<T: std::str::FromStr>(
                cell: &str,
                name: &str,
                line_no: usize,
            ) -> Result<T, (usize, String)> {
                cell.parse()
                    .map_err(|_| (line_no, format!("column `{name}`: cannot parse `{cell}`")))
            }
            Ok(CsvRow {
                algo: cells[0].to_string(),
                num_arms: field(cells[1], "K", line_no)?,
                horizon: field(cells[2], "T", line_no)?,
                seed: field(cells[3], "seed", line_no)?,
                checkpoint: field(cells[4], "checkpoint", line_no)?,
                regret: field(cells[5], "regret", line_no)?,
                skips: field(cells[6], "skips", line_no)?,
                sigma_hat_max: field(cells[7], "sigma_hat_max", line_no)?,
                cum_outstanding: field(cells[8], "cum_outstanding", line_no)?,
            })
        })
        .collect()
}
