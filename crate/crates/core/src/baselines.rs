//! Reference learners: a queued-update UCB1 for delayed stochastic feedback,
//! and the delayed FTRL learner without implicit exploration.

use serde::{Deserialize, Serialize};

use crate::scheduler::{Scheduler, SchedulerConfig, SchedulerError, ThresholdRule};

/// Arrived-observation statistics of the delayed UCB learner.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    /// Arrived observations per arm.
    pub counts: Vec<u64>,
    /// Empirical mean loss per arm over arrived observations.
    pub means: Vec<f64>,
    /// Plays per arm, arrived or not.
    pub plays: Vec<u64>,
    /// Round about to be played, 1-based.
    pub t: usize,
}

/// UCB1 (loss form) that only updates on arrived observations.
///
/// Arms without any arrived observation are played first, fewest plays
/// first and lowest index on ties; afterwards the arm minimizing
/// `mean_i - sqrt(2 ln t / n_i)` is played.
#[derive(Debug, Clone)]
pub struct UcbDelayed {
    state: UcbState,
}

impl UcbDelayed {
    pub fn new(num_arms: usize) -> Self {
        Self {
            state: UcbState {
                counts: vec![0; num_arms],
                means: vec![0.0; num_arms],
                plays: vec![0; num_arms],
                t: 1,
            },
        }
    }

    pub fn state(&self) -> &UcbState {
        &self.state
    }

    /// Folds `(arm, loss)` arrivals that landed since the previous step and
    /// returns the arm for the current round.
    pub fn step(&mut self, arrivals: &[(usize, f64)]) -> usize {
        let st = &mut self.state;
        for &(arm, loss) in arrivals {
            st.counts[arm] += 1;
            st.means[arm] += (loss - st.means[arm]) / st.counts[arm] as f64;
        }
        let arm = match (0..st.counts.len())
            .filter(|&i| st.counts[i] == 0)
            .min_by_key(|&i| (st.plays[i], i))
        {
            Some(unobserved) => unobserved,
            None => {
                let log_t = (st.t as f64).ln();
                let index = |i: usize| st.means[i] - (2.0 * log_t / st.counts[i] as f64).sqrt();
                (0..st.counts.len())
                    .min_by(|&a, &b| index(a).total_cmp(&index(b)).then(a.cmp(&b)))
                    .unwrap_or(0)
            }
        };
        st.plays[arm] += 1;
        st.t += 1;
        arm
    }
}

/// Settings for the FTRL learner without implicit exploration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoIxConfig {
    pub threshold: ThresholdRule,
}

impl Default for NoIxConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdRule::Standard,
        }
    }
}

/// The scheduler with implicit exploration disabled (`lambda = 0`) and a
/// swappable skipping-threshold constant.
pub fn ftrl_no_ix(num_arms: usize, config: NoIxConfig) -> Result<Scheduler, SchedulerError> {
    Scheduler::new(
        num_arms,
        SchedulerConfig {
            implicit_exploration: false,
            threshold: config.threshold,
        },
    )
}
