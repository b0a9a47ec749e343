//! The `bobw` command line: `run`, `diagnose` and `minimize-skips`.
//!
//! Exit codes: 0 success, 1 invariant violation, 2 config error, 3 solver
//! failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{apply_env_overrides, load_config, parse_seeds};
use crate::diagnostics::{self, SuiteReport};
use crate::environment::{build_environment, read_delays_file};
use crate::harness::{self, Algorithm, ExperimentConfig, HarnessError};
use crate::scheduler::SchedulerError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bobw", about = "Delayed best-of-both-worlds bandit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunFlags {
    /// Experiment file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Seed list overriding the file, e.g. `1-20` or `3,5,8`.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Output path overriding the file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for seeds.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Run the invariant suite on every seed.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write the trace CSV (stdout without `--out`).
    Run {
        #[command(flatten)]
        flags: RunFlags,
        /// Also write the per-checkpoint quartile table here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run FTRL seeds and report the selected empirical checks.
    Diagnose {
        #[command(flatten)]
        flags: RunFlags,
        /// Comma-separated subset of drift,rearrange,lambda,skips,minimizer.
        #[arg(long, default_value = "drift,rearrange,lambda,skips")]
        checks: String,
        /// Pair budget of the drift check.
        #[arg(long, default_value_t = 100_000)]
        drift_budget: u64,
    },
    /// Minimize |S| + sqrt(D_{not S} K^{2/3} ln K) over skipped sets.
    MinimizeSkips {
        /// One delay per line.
        #[arg(long)]
        delays: PathBuf,
        #[arg(long)]
        arms: usize,
    },
}

const CHECKS: &[&str] = &["drift", "rearrange", "lambda", "skips", "minimizer"];

/// Maps an error to its exit code.
pub fn exit_code(err: &HarnessError) -> i32 {
    match err {
        HarnessError::Config(_)
        | HarnessError::Environment(_)
        | HarnessError::Io { .. }
        | HarnessError::CsvParse { .. } => EXIT_CONFIG,
        HarnessError::Run {
            source: SchedulerError::Solver(_),
            ..
        } => EXIT_SOLVER,
        HarnessError::Run { .. }
        | HarnessError::InvariantViolation { .. }
        | HarnessError::MismatchedCheckpoints => EXIT_INVARIANT,
    }
}

fn load(flags: &RunFlags, env: &[(String, String)]) -> Result<ExperimentConfig, HarnessError> {
    let mut config = load_config(&flags.config)?;
    apply_env_overrides(&mut config, env.iter().cloned())?;
    if let Some(seeds) = &flags.seeds {
        config.seeds = parse_seeds(seeds)?;
    }
    if let Some(out) = &flags.out {
        config.output = Some(out.clone());
    }
    if flags.parallel.is_some() {
        config.parallel = flags.parallel;
    }
    config.verify |= flags.verify;
    config.validate()?;
    Ok(config)
}

/// Runs the CLI on explicit arguments and environment, writing to the given
/// streams. Returns the exit code.
pub fn run_cli<I, T>(
    args: I,
    env: &[(String, String)],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = write!(stderr, "{err}");
            return if err.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run { flags, summary } => cmd_run(&flags, summary, env, stdout, stderr),
        Command::Diagnose {
            flags,
            checks,
            drift_budget,
        } => cmd_diagnose(&flags, &checks, drift_budget, env, stdout),
        Command::MinimizeSkips { delays, arms } => cmd_minimize(&delays, arms, stdout),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code(&err)
        }
    }
}

fn cmd_run(
    flags: &RunFlags,
    summary_path: Option<PathBuf>,
    env: &[(String, String)],
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, HarnessError> {
    let config = load(flags, env)?;
    let (trace, reports) = harness::run_experiment_with_reports(&config)?;
    match &config.output {
        Some(path) => harness::write_csv(std::slice::from_ref(&trace), path)?,
        None => {
            let _ = stdout.write_all(harness::render_csv(std::slice::from_ref(&trace)).as_bytes());
        }
    }
    let summary = harness::aggregate(&trace)?;
    if let Some(path) = summary_path {
        harness::write_summary_csv(std::slice::from_ref(&summary), &path)?;
    }
    if let Some(last) = summary.rows.last() {
        let _ = writeln!(
            stderr,
            "{} K={} T={} seeds={} final regret q1={:.3} median={:.3} q3={:.3}",
            trace.algorithm.name(),
            trace.num_arms,
            trace.horizon,
            trace.runs.len(),
            last.q1,
            last.median,
            last.q3
        );
    }
    let mut merged = SuiteReport::default();
    for (_, report) in &reports {
        merged.merge(report);
    }
    if !merged.checks.is_empty() {
        let _ = write!(stderr, "{merged}");
    }
    Ok(EXIT_OK)
}

fn cmd_diagnose(
    flags: &RunFlags,
    checks: &str,
    drift_budget: u64,
    env: &[(String, String)],
    stdout: &mut dyn Write,
) -> Result<i32, HarnessError> {
    let config = load(flags, env)?;
    let selected: Vec<&str> = checks.split(',').map(str::trim).filter(|c| !c.is_empty()).collect();
    if let Some(bad) = selected.iter().find(|c| !CHECKS.contains(c)) {
        return Err(HarnessError::Config(format!(
            "unknown check `{bad}` (expected one of {})",
            CHECKS.join(",")
        )));
    }
    if config.algorithm == Algorithm::UcbDelayed {
        return Err(HarnessError::Config(
            "diagnose needs an FTRL algorithm (bobw or ftrl_no_ix)".into(),
        ));
    }
    let env_instance = build_environment(&config.environment)?;
    let job = |&seed: &u64| -> Result<(SuiteReport, Vec<String>), HarnessError> {
        let record = harness::run_single(
            &env_instance,
            config.algorithm,
            config.no_ix,
            seed,
            &config.checkpoints,
        )?;
        let history = record.history.expect("FTRL runs record history");
        let mut suite = SuiteReport::default();
        let mut notes = Vec::new();
        for check in &selected {
            match *check {
                "drift" => {
                    let mut rng = crate::rng::stream_rng(seed, 0, crate::rng::Stream::Diagnostics);
                    suite.checks.push(diagnostics::check_drift(&history, drift_budget, &mut rng));
                }
                "rearrange" => suite.merge(&diagnostics::rearrangement_report(&history)),
                "lambda" => {
                    let l = diagnostics::lambda_sum_report(&history);
                    notes.push(format!(
                        "seed={seed} lambda_sum={:.6} sigma_hat_max={} ratio={:.6}",
                        l.sum, l.sigma_hat_max, l.ratio
                    ));
                }
                "skips" => suite.merge(&diagnostics::run_invariant_suite(&history)),
                "minimizer" => suite.checks.push(diagnostics::check_total_outstanding_bound(
                    &history,
                    &env_instance.delays.realized,
                )),
                _ => unreachable!("validated above"),
            }
        }
        Ok((suite, notes))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallel.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| config.seeds.par_iter().map(job).collect());
    let mut merged = SuiteReport::default();
    for result in results {
        let (suite, notes) = result?;
        merged.merge(&suite);
        for note in notes {
            let _ = writeln!(stdout, "{note}");
        }
    }
    let _ = write!(stdout, "{merged}");
    Ok(if merged.passed() { EXIT_OK } else { EXIT_INVARIANT })
}

fn cmd_minimize(
    delays: &std::path::Path,
    arms: usize,
    stdout: &mut dyn Write,
) -> Result<i32, HarnessError> {
    if arms < 2 {
        return Err(HarnessError::Config("--arms must be at least 2".into()));
    }
    let delays = read_delays_file(delays)?;
    let result = diagnostics::skip_set_minimizer(&delays, arms);
    let _ = writeln!(stdout, "{result}");
    let _ = writeln!(stdout, "skipped={:?}", result.skipped);
    Ok(EXIT_OK)
}

/// Entry point used by the `bobw` binary.
pub fn main_from_env() -> i32 {
    let env: Vec<(String, String)> = std::env::vars().collect();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli(std::env::args_os(), &env, &mut stdout.lock(), &mut stderr.lock())
}
