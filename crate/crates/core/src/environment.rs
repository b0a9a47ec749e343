//! Loss and delay models, the arrival schedule, and ground-truth quantities.
//!
//! Rounds are 1-based throughout. The arrival schedule lists, for each round
//! `t <= T`, the origin rounds `s` with `s + d_s = t`; observations landing
//! after the horizon are never delivered.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream_rng, Stream};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn invalid(field: &str, message: impl Into<String>) -> EnvError {
    EnvError::InvalidConfig {
        field: field.to_string(),
        message: message.into(),
    }
}

/// How losses are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    /// Bernoulli losses with the given means.
    Stochastic {
        means: Vec<f64>,
        /// Skip the unique-best-arm check (zero-gap sanity runs only).
        #[serde(default)]
        allow_equal_means: bool,
    },
    /// Oblivious adversarial sequence from a named generator or a file.
    Adversarial {
        #[serde(flatten)]
        source: AdversarialSource,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum AdversarialSource {
    /// Two halves with Bernoulli losses whose best arm flips between arms 0
    /// and 1; arm 0 stays best over the full horizon. First half means:
    /// arm 0 at 0.2, the rest at 0.6. Second half: arm 0 at 0.5, arm 1 at
    /// 0.3, the rest at 0.7.
    TwoPhase,
    /// Every loss is zero.
    Zeros,
    /// `K` comma-separated reals per line, one line per round.
    File { path: PathBuf },
    /// Inline `T x K` matrix.
    Matrix { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelaySpec {
    Constant {
        value: usize,
    },
    /// Independent uniform integers in `[lo, hi]`.
    UniformRandom {
        lo: usize,
        hi: usize,
    },
    /// The first `count` rounds (default `ceil(sqrt(T))`) have delay
    /// `magnitude` (default `T`), the rest zero.
    OutlierFront {
        magnitude: Option<usize>,
        count: Option<usize>,
    },
    /// Round 1 has delay `magnitude` (default `T`), the rest zero.
    SingleOutlier {
        magnitude: Option<usize>,
    },
    /// One nonnegative integer per line.
    FromFile {
        path: PathBuf,
    },
    Explicit {
        delays: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    pub num_arms: usize,
    pub horizon: usize,
    pub loss: LossSpec,
    pub delay: DelaySpec,
    /// Seed for the realized delays and adversarial sequences.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossModel {
    Stochastic {
        means: Vec<f64>,
        /// `mean_i - min_j mean_j`.
        gaps: Vec<f64>,
        best_arm: usize,
    },
    Adversarial {
        /// `sequence[t - 1][arm]`.
        sequence: Vec<Vec<f64>>,
        best_arm: usize,
    },
}

impl LossModel {
    pub fn best_arm(&self) -> usize {
        match self {
            LossModel::Stochastic { best_arm, .. } | LossModel::Adversarial { best_arm, .. } => {
                *best_arm
            }
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, LossModel::Stochastic { .. })
    }
}

/// Realized delays with derived quantities recomputed from them.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayModel {
    pub spec: DelaySpec,
    /// `realized[s - 1] = d_s`.
    pub realized: Vec<usize>,
    pub d_max: usize,
    pub total_delay: u64,
    pub sigma_max: usize,
}

impl DelayModel {
    pub fn from_realized(spec: DelaySpec, realized: Vec<usize>) -> Self {
        let d_max = realized.iter().copied().max().unwrap_or(0);
        let total_delay = realized.iter().map(|&d| d as u64).sum();
        let sigma_max = outstanding_series(&realized).into_iter().max().unwrap_or(0);
        Self {
            spec,
            realized,
            d_max,
            total_delay,
            sigma_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentInstance {
    pub num_arms: usize,
    pub horizon: usize,
    pub losses: LossModel,
    pub delays: DelayModel,
    /// `arrivals[t - 1]` = origins landing at round `t`, ascending.
    pub arrivals: Vec<Vec<usize>>,
}

impl EnvironmentInstance {
    pub fn arrivals_at(&self, t: usize) -> &[usize] {
        &self.arrivals[t - 1]
    }

    pub fn delay(&self, s: usize) -> usize {
        self.delays.realized[s - 1]
    }

    /// Loss of `arm` at round `t` (see [`loss_at`]).
    pub fn loss_at<R: Rng + ?Sized>(&self, t: usize, arm: usize, rng: &mut R) -> f64 {
        loss_at(self, t, arm, rng)
    }

    /// Full loss vector of round `t`. Stochastic draws consume exactly one
    /// uniform per arm in index order, so runs sharing a stream see the
    /// same realization regardless of which arm is played.
    pub fn loss_vector<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Vec<f64> {
        (0..self.num_arms).map(|arm| loss_at(self, t, arm, rng)).collect()
    }
}

/// Loss of `arm` at round `t`: a Bernoulli draw in the stochastic regime, the
/// fixed sequence entry in the adversarial one.
pub fn loss_at<R: Rng + ?Sized>(env: &EnvironmentInstance, t: usize, arm: usize, rng: &mut R) -> f64 {
    match &env.losses {
        LossModel::Stochastic { means, .. } => {
            let u: f64 = rng.gen();
            if u < means[arm] {
                1.0
            } else {
                0.0
            }
        }
        LossModel::Adversarial { sequence, .. } => sequence[t - 1][arm],
    }
}

/// `sigma_t = #{s <= t : s + d_s > t}` for `t = 1..=T`.
pub fn outstanding_series(delays: &[usize]) -> Vec<usize> {
    let horizon = delays.len();
    let mut diff = vec![0i64; horizon + 2];
    for (idx, &d) in delays.iter().enumerate() {
        let s = idx + 1;
        if d == 0 {
            continue;
        }
        // outstanding for t in [s, s + d - 1]
        let end = (s + d - 1).min(horizon);
        diff[s] += 1;
        diff[end + 1] -= 1;
    }
    let mut running = 0i64;
    (1..=horizon)
        .map(|t| {
            running += diff[t];
            running as usize
        })
        .collect()
}

/// Ground-truth outstanding series and its maximum, before any skipping.
pub fn ground_truth_sigma(env: &EnvironmentInstance) -> (Vec<usize>, usize) {
    let series = outstanding_series(&env.delays.realized);
    let max = series.iter().copied().max().unwrap_or(0);
    (series, max)
}

/// `arrivals[t - 1]` lists origins `s` with `s + d_s = t <= T`.
pub fn arrival_schedule(delays: &[usize]) -> Vec<Vec<usize>> {
    let horizon = delays.len();
    let mut schedule = vec![Vec::new(); horizon];
    for (idx, &d) in delays.iter().enumerate() {
        let s = idx + 1;
        let t = s + d;
        if t <= horizon {
            schedule[t - 1].push(s);
        }
    }
    schedule
}

pub fn build_environment(config: &EnvironmentConfig) -> Result<EnvironmentInstance, EnvError> {
    let k = config.num_arms;
    let horizon = config.horizon;
    if k < 2 {
        return Err(invalid("num_arms", format!("need at least 2 arms, got {k}")));
    }
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }

    let losses = match &config.loss {
        LossSpec::Stochastic {
            means,
            allow_equal_means,
        } => stochastic_model(means, k, *allow_equal_means)?,
        LossSpec::Adversarial { source } => {
            let sequence = match source {
                AdversarialSource::TwoPhase => two_phase_sequence(k, horizon, config.seed),
                AdversarialSource::Zeros => vec![vec![0.0; k]; horizon],
                AdversarialSource::File { path } => read_loss_file(path, k)?,
                AdversarialSource::Matrix { rows } => rows.clone(),
            };
            adversarial_model(sequence, k, horizon)?
        }
    };

    let realized = realize_delays(&config.delay, horizon, config.seed)?;
    let arrivals = arrival_schedule(&realized);
    Ok(EnvironmentInstance {
        num_arms: k,
        horizon,
        losses,
        delays: DelayModel::from_realized(config.delay.clone(), realized),
        arrivals,
    })
}

fn stochastic_model(means: &[f64], k: usize, allow_equal: bool) -> Result<LossModel, EnvError> {
    if means.len() != k {
        return Err(invalid(
            "loss.means",
            format!("expected {k} means, got {}", means.len()),
        ));
    }
    if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(invalid("loss.means", format!("mean {m} outside [0, 1]")));
    }
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    let best: Vec<usize> = (0..k).filter(|&i| means[i] == min).collect();
    if best.len() > 1 && !allow_equal {
        return Err(invalid(
            "loss.means",
            format!("best arm is not unique (arms {best:?})"),
        ));
    }
    Ok(LossModel::Stochastic {
        means: means.to_vec(),
        gaps: means.iter().map(|m| m - min).collect(),
        best_arm: best[0],
    })
}

fn adversarial_model(sequence: Vec<Vec<f64>>, k: usize, horizon: usize) -> Result<LossModel, EnvError> {
    if sequence.len() != horizon {
        return Err(invalid(
            "loss",
            format!("sequence has {} rounds, horizon is {horizon}", sequence.len()),
        ));
    }
    let mut totals = vec![0.0; k];
    for (idx, row) in sequence.iter().enumerate() {
        if row.len() != k {
            return Err(invalid(
                "loss",
                format!("round {} has {} entries, expected {k}", idx + 1, row.len()),
            ));
        }
        for (total, &l) in totals.iter_mut().zip(row) {
            if !(0.0..=1.0).contains(&l) {
                return Err(invalid(
                    "loss",
                    format!("round {}: loss {l} outside [0, 1]", idx + 1),
                ));
            }
            *total += l;
        }
    }
    let best_arm = (0..k)
        .min_by(|&a, &b| totals[a].total_cmp(&totals[b]))
        .unwrap_or(0);
    Ok(LossModel::Adversarial { sequence, best_arm })
}

/// The named two-phase generator; see [`AdversarialSource::TwoPhase`].
pub fn two_phase_sequence(k: usize, horizon: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0, Stream::AdversarialLosses);
    let switch = horizon / 2;
    (1..=horizon)
        .map(|t| {
            (0..k)
                .map(|arm| {
                    let mean = match (t <= switch, arm) {
                        (true, 0) => 0.2,
                        (true, _) => 0.6,
                        (false, 0) => 0.5,
                        (false, 1) => 0.3,
                        (false, _) => 0.7,
                    };
                    if rng.gen::<f64>() < mean {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn realize_delays(spec: &DelaySpec, horizon: usize, seed: u64) -> Result<Vec<usize>, EnvError> {
    let delays = match spec {
        DelaySpec::Constant { value } => vec![*value; horizon],
        DelaySpec::UniformRandom { lo, hi } => {
            if lo > hi {
                return Err(invalid("delay", format!("lo = {lo} exceeds hi = {hi}")));
            }
            let mut rng = stream_rng(seed, 0, Stream::Delays);
            (0..horizon).map(|_| rng.gen_range(*lo..=*hi)).collect()
        }
        DelaySpec::OutlierFront { magnitude, count } => {
            let count = count.unwrap_or_else(|| (horizon as f64).sqrt().ceil() as usize);
            let magnitude = magnitude.unwrap_or(horizon);
            (1..=horizon)
                .map(|s| if s <= count { magnitude } else { 0 })
                .collect()
        }
        DelaySpec::SingleOutlier { magnitude } => {
            let mut d = vec![0; horizon];
            d[0] = magnitude.unwrap_or(horizon);
            d
        }
        DelaySpec::FromFile { path } => read_delays_file(path)?,
        DelaySpec::Explicit { delays } => delays.clone(),
    };
    if delays.len() != horizon {
        return Err(invalid(
            "delay",
            format!("{} delays given for horizon {horizon}", delays.len()),
        ));
    }
    Ok(delays)
}

fn read_lines(path: &Path) -> Result<Vec<String>, EnvError> {
    let text = fs::read_to_string(path).map_err(|source| EnvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text.lines().map(str::to_string).collect())
}

/// Reads a delays file: one nonnegative integer per line.
pub fn read_delays_file(path: &Path) -> Result<Vec<usize>, EnvError> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(idx, line)| {
            line.trim().parse::<usize>().map_err(|e| EnvError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("`{line}`: {e}"),
            })
        })
        .collect()
}

/// Reads an adversarial loss file: `num_arms` comma-separated reals in
/// `[0, 1]` per line.
pub fn read_loss_file(path: &Path, num_arms: usize) -> Result<Vec<Vec<f64>>, EnvError> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(idx, line)| {
            let err = |message: String| EnvError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message,
            };
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| err(format!("`{v}`: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != num_arms {
                return Err(err(format!("expected {num_arms} values, got {}", row.len())));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(err(format!("loss {v} outside [0, 1]")));
            }
            Ok(row)
        })
        .collect()
}

pub fn write_delays_file(path: &Path, delays: &[usize]) -> Result<(), EnvError> {
    let mut out = String::with_capacity(delays.len() * 4);
    for d in delays {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_loss_file(path: &Path, rows: &[Vec<f64>]) -> Result<(), EnvError> {
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

fn write_text(path: &Path, text: &str) -> Result<(), EnvError> {
    let io = |source| EnvError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(text.as_bytes()).map_err(io)
}
