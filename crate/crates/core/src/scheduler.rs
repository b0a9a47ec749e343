//! Round-by-round state machine of the delayed-feedback FTRL learner.
//!
//! A round `t` is driven in four steps:
//!
//! 1. [`Scheduler::begin_round`] computes the play distribution `x_t` and the
//!    caller samples an arm, then reports it with [`Scheduler::record_play`];
//! 2. [`Scheduler::update_counts`] counts the active outstanding observations
//!    `sigma_hat_t`, accumulates `D_t` and refreshes the skipping threshold;
//! 3. [`Scheduler::deliver`] folds this round's arrivals into the cumulative
//!    loss estimates using the implicit-exploration denominator;
//! 4. [`Scheduler::apply_skipping`] drops the (at most one) outstanding
//!    observation whose waiting time reached the threshold.
//!
//! [`Scheduler::finish_round`] then advances to `t + 1`.
//!
//! Counting happens before delivery so that the estimators see the final
//! `D_t`. The set of origins landing at `t` is passed to `update_counts`
//! because those observations satisfy `s + d_s = t` and are therefore not
//! outstanding at `t`, even though their losses have not been applied yet.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::solver::{self, RegularizerParams, SimplexPoint, SolverError};

/// Leading constant of the default skipping threshold.
pub const THRESHOLD_SCALE: f64 = 49.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedulerError {
    #[error("invalid scheduler configuration: {0}")]
    InvalidConfig(String),
    #[error("round {0} already has a recorded play")]
    DoublePlay(usize),
    #[error("arm {arm} out of range for {num_arms} arms")]
    ArmOutOfRange { arm: usize, num_arms: usize },
    #[error("round {round}: operation called out of order ({detail})")]
    OutOfOrder { round: usize, detail: &'static str },
    #[error("arrival from unknown origin round {0}")]
    UnknownOrigin(usize),
    #[error("origin round {0} was already resolved")]
    AlreadyResolved(usize),
    #[error("loss {loss} from round {origin} is outside [0, 1]")]
    InvalidLoss { origin: usize, loss: f64 },
    #[error("no play distribution recorded for origin round {0}")]
    MissingDistribution(usize),
    #[error("round {round}: {} records qualify for skipping ({rounds:?})", rounds.len())]
    MultipleSkips { round: usize, rounds: Vec<usize> },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Lifecycle of a played round's observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundStatus {
    Outstanding,
    Arrived,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based round index `s`.
    pub round: usize,
    pub arm: usize,
    /// `D_s` once round `s`'s counting step completed.
    pub d_snapshot: u64,
    /// True delay, known once the observation arrives (also recorded for late
    /// arrivals of skipped rounds).
    pub delay: Option<usize>,
    /// Final waiting time `d_hat_s`, set on arrival or skip.
    pub waited: Option<usize>,
    pub status: RoundStatus,
}

impl RoundRecord {
    /// Round at which the record stopped being outstanding.
    pub fn resolved_at(&self) -> Option<usize> {
        self.waited.map(|w| self.round + w)
    }
}

/// Denominator constant `c` of the skipping threshold `sqrt(D_t / c)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum ThresholdRule {
    /// `49 K^{2/3} ln K`.
    Standard,
    /// Plain `ln K`.
    LogK,
    /// A fixed positive constant.
    Custom(f64),
}

impl ThresholdRule {
    pub fn constant(&self, num_arms: usize) -> f64 {
        let k = num_arms as f64;
        match *self {
            ThresholdRule::Standard => THRESHOLD_SCALE * k.powf(2.0 / 3.0) * k.ln(),
            ThresholdRule::LogK => k.ln(),
            ThresholdRule::Custom(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerConfig {
    /// When false the loss estimators use plain importance weighting.
    pub implicit_exploration: bool,
    pub threshold: ThresholdRule,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            implicit_exploration: true,
            threshold: ThresholdRule::Standard,
        }
    }
}

/// Implicit exploration term `exp(-D_t / (D_t - D_s))`.
///
/// Zero when `D_t = D_s` (the exponent tends to minus infinity) and when
/// `D_t = 0`.
pub fn implicit_exploration(d_at_play: u64, d_now: u64) -> f64 {
    debug_assert!(d_now >= d_at_play, "D is nondecreasing");
    if d_now == 0 || d_now <= d_at_play {
        return 0.0;
    }
    (-(d_now as f64) / (d_now - d_at_play) as f64).exp()
}

/// Per-round accounting snapshot, appended by [`Scheduler::apply_skipping`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundSummary {
    pub sigma_hat: u64,
    pub cum_outstanding: u64,
    pub threshold: f64,
    pub skipped: Option<usize>,
}

/// Values produced by the counting step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountUpdate {
    pub sigma_hat: u64,
    pub cum_outstanding: u64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    AwaitPlay,
    Played,
    Counted,
    Delivered,
    Skipped,
}

/// An observation landing at the current round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub origin: usize,
    /// `loss_{s, I_s}` in `[0, 1]`.
    pub loss: f64,
}

/// What happened to the arrivals handed to [`Scheduler::deliver`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeliveryOutcome {
    /// `(origin, arm, increment)` for each applied estimate.
    pub applied: Vec<(usize, usize, f64)>,
    /// Late arrivals of skipped rounds.
    pub discarded: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SchedulerState {
    /// Current round, 1-based.
    pub t: usize,
    pub cum_loss_est: Vec<f64>,
    pub skip_set: BTreeSet<usize>,
    pub cum_outstanding: u64,
    pub sigma_hat: u64,
    pub sigma_hat_running_max: u64,
    pub threshold: f64,
    pub skip_count: usize,
    pub ledger: Vec<RoundRecord>,
    outstanding: BTreeSet<usize>,
    phase: Phase,
}

impl SchedulerState {
    /// Rounds whose observation is still pending.
    pub fn outstanding_rounds(&self) -> impl Iterator<Item = usize> + '_ {
        self.outstanding.iter().copied()
    }
}

#[derive(Debug, Clone)]
pub struct Scheduler {
    num_arms: usize,
    config: SchedulerConfig,
    threshold_constant: f64,
    state: SchedulerState,
    trace: Vec<RoundSummary>,
}

impl Scheduler {
    pub fn new(num_arms: usize, config: SchedulerConfig) -> Result<Self, SchedulerError> {
        if num_arms < 2 {
            return Err(SchedulerError::InvalidConfig(format!(
                "at least 2 arms required, got {num_arms}"
            )));
        }
        let threshold_constant = config.threshold.constant(num_arms);
        if !(threshold_constant.is_finite() && threshold_constant > 0.0) {
            return Err(SchedulerError::InvalidConfig(format!(
                "threshold constant must be positive, got {threshold_constant}"
            )));
        }
        Ok(Self {
            num_arms,
            config,
            threshold_constant,
            state: SchedulerState {
                t: 1,
                cum_loss_est: vec![0.0; num_arms],
                skip_set: BTreeSet::new(),
                cum_outstanding: 0,
                sigma_hat: 0,
                sigma_hat_running_max: 0,
                threshold: 0.0,
                skip_count: 0,
                ledger: Vec::new(),
                outstanding: BTreeSet::new(),
                phase: Phase::AwaitPlay,
            },
            trace: Vec::new(),
        })
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.config
    }

    pub fn state(&self) -> &SchedulerState {
        &self.state
    }

    pub fn round(&self) -> usize {
        self.state.t
    }

    pub fn threshold_constant(&self) -> f64 {
        self.threshold_constant
    }

    /// Completed-round accounting, index `t - 1`.
    pub fn trace(&self) -> &[RoundSummary] {
        &self.trace
    }

    pub fn ledger(&self) -> &[RoundRecord] {
        &self.state.ledger
    }

    /// Learning rates for the current round: `eta^-1 = sqrt(t)` and
    /// `gamma^-1 = sqrt(49 D_{t-1} / ln K)`.
    pub fn regularizer_params(&self) -> RegularizerParams {
        let k = self.num_arms as f64;
        RegularizerParams {
            eta_inv: (self.state.t as f64).sqrt(),
            gamma_inv: (THRESHOLD_SCALE * self.state.cum_outstanding as f64 / k.ln()).sqrt(),
            num_arms: self.num_arms,
        }
    }

    /// Play distribution of the current round. Does not modify the state.
    pub fn begin_round(&self) -> Result<SimplexPoint, SchedulerError> {
        Ok(solver::solve_ftrl(
            &self.state.cum_loss_est,
            &self.regularizer_params(),
        )?)
    }

    pub fn record_play(&mut self, arm: usize) -> Result<(), SchedulerError> {
        let t = self.state.t;
        if self.state.phase != Phase::AwaitPlay {
            return Err(SchedulerError::DoublePlay(t));
        }
        if arm >= self.num_arms {
            return Err(SchedulerError::ArmOutOfRange {
                arm,
                num_arms: self.num_arms,
            });
        }
        self.state.ledger.push(RoundRecord {
            round: t,
            arm,
            d_snapshot: 0,
            delay: None,
            waited: None,
            status: RoundStatus::Outstanding,
        });
        self.state.outstanding.insert(t);
        self.state.phase = Phase::Played;
        Ok(())
    }

    /// Counting step. `arriving` lists the origin rounds whose observations
    /// land at the current round (as they will be passed to `deliver`).
    pub fn update_counts(&mut self, arriving: &[usize]) -> Result<CountUpdate, SchedulerError> {
        let t = self.state.t;
        if self.state.phase != Phase::Played {
            return Err(SchedulerError::OutOfOrder {
                round: t,
                detail: "update_counts needs a recorded play",
            });
        }
        let landing: BTreeSet<usize> = arriving
            .iter()
            .copied()
            .filter(|&s| s < t && self.state.outstanding.contains(&s))
            .collect();
        // `outstanding` still holds round t itself.
        let sigma_hat = (self.state.outstanding.len() - 1 - landing.len()) as u64;

        let st = &mut self.state;
        st.sigma_hat = sigma_hat;
        st.cum_outstanding += sigma_hat;
        st.sigma_hat_running_max = st.sigma_hat_running_max.max(sigma_hat);
        st.threshold = (st.cum_outstanding as f64 / self.threshold_constant).sqrt();
        st.ledger[t - 1].d_snapshot = st.cum_outstanding;
        st.phase = Phase::Counted;
        Ok(CountUpdate {
            sigma_hat,
            cum_outstanding: st.cum_outstanding,
            threshold: st.threshold,
        })
    }

    /// Applies the arrivals of the current round. `distribution` returns the
    /// play distribution of an origin round.
    pub fn deliver<'a, F>(
        &mut self,
        arrivals: &[Arrival],
        distribution: F,
    ) -> Result<DeliveryOutcome, SchedulerError>
    where
        F: Fn(usize) -> Option<&'a SimplexPoint>,
    {
        let t = self.state.t;
        if self.state.phase != Phase::Counted {
            return Err(SchedulerError::OutOfOrder {
                round: t,
                detail: "deliver needs update_counts first",
            });
        }
        let mut outcome = DeliveryOutcome::default();
        for arrival in arrivals {
            let s = arrival.origin;
            if s == 0 || s > t {
                return Err(SchedulerError::UnknownOrigin(s));
            }
            if !(0.0..=1.0).contains(&arrival.loss) {
                return Err(SchedulerError::InvalidLoss {
                    origin: s,
                    loss: arrival.loss,
                });
            }
            let record = &self.state.ledger[s - 1];
            match record.status {
                RoundStatus::Skipped => {
                    self.state.ledger[s - 1].delay = Some(t - s);
                    outcome.discarded.push(s);
                    continue;
                }
                RoundStatus::Arrived => return Err(SchedulerError::AlreadyResolved(s)),
                RoundStatus::Outstanding => {}
            }
            let arm = record.arm;
            let lambda = if self.config.implicit_exploration {
                implicit_exploration(record.d_snapshot, self.state.cum_outstanding)
            } else {
                0.0
            };
            let x = distribution(s).ok_or(SchedulerError::MissingDistribution(s))?;
            let increment = arrival.loss / x.prob(arm).max(lambda);
            self.state.cum_loss_est[arm] += increment;

            let record = &mut self.state.ledger[s - 1];
            record.status = RoundStatus::Arrived;
            record.delay = Some(t - s);
            record.waited = Some(t - s);
            self.state.outstanding.remove(&s);
            outcome.applied.push((s, arm, increment));
        }
        self.state.phase = Phase::Delivered;
        Ok(outcome)
    }

    /// Skips the outstanding observation whose waiting time reached the
    /// threshold, if any.
    pub fn apply_skipping(&mut self) -> Result<Option<usize>, SchedulerError> {
        let t = self.state.t;
        if self.state.phase != Phase::Delivered {
            return Err(SchedulerError::OutOfOrder {
                round: t,
                detail: "apply_skipping needs deliver first",
            });
        }
        let threshold = self.state.threshold;
        // Outstanding rounds are ordered, so qualifying ones form a prefix.
        let qualifying: Vec<usize> = self
            .state
            .outstanding
            .iter()
            .copied()
            .take_while(|&s| s < t && (t - s) as f64 >= threshold)
            .collect();
        if qualifying.len() > 1 {
            return Err(SchedulerError::MultipleSkips {
                round: t,
                rounds: qualifying,
            });
        }
        let skipped = qualifying.first().copied();
        if let Some(s) = skipped {
            let st = &mut self.state;
            st.outstanding.remove(&s);
            st.skip_set.insert(s);
            st.skip_count += 1;
            let record = &mut st.ledger[s - 1];
            record.status = RoundStatus::Skipped;
            record.waited = Some(t - s);
        }
        self.trace.push(RoundSummary {
            sigma_hat: self.state.sigma_hat,
            cum_outstanding: self.state.cum_outstanding,
            threshold,
            skipped,
        });
        self.state.phase = Phase::Skipped;
        Ok(skipped)
    }

    #[cfg(test)]
    fn bypass_skipping(&mut self) {
        self.trace.push(RoundSummary {
            sigma_hat: self.state.sigma_hat,
            cum_outstanding: self.state.cum_outstanding,
            threshold: self.state.threshold,
            skipped: None,
        });
        self.state.phase = Phase::Skipped;
    }

    pub fn finish_round(&mut self) -> Result<(), SchedulerError> {
        if self.state.phase != Phase::Skipped {
            return Err(SchedulerError::OutOfOrder {
                round: self.state.t,
                detail: "finish_round needs apply_skipping first",
            });
        }
        self.state.t += 1;
        self.state.phase = Phase::AwaitPlay;
        Ok(())
    }
}
