//! Empirical checkers over recorded scheduler histories: greedy arrival
//! rearrangement, drift control, the implicit-exploration summation, the
//! skipped-set minimizer and a consolidated invariant suite.
//!
//! Every check is a falsifier: it reports how many instances it looked at,
//! how many violated the inequality, and the smallest slack observed
//! (`rhs - lhs`, negative on violation).

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::harness::SchedulerHistory;
use crate::scheduler::{implicit_exploration, RoundStatus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnosticsError {
    #[error("no free slot for round {origin} arriving at {arrival} within window {window}")]
    NoFreeSlot {
        origin: usize,
        arrival: usize,
        window: usize,
    },
    #[error("inconsistent schedule: {0}")]
    InconsistentSchedule(String),
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub instances: u64,
    pub violations: u64,
    /// Smallest `rhs - lhs` seen; `+inf` when nothing was checked.
    pub worst_margin: f64,
    pub first_counterexample: Option<String>,
}

impl CheckReport {
    pub fn new(name: &'static str) -> Self {
        Self {
            name,
            instances: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            first_counterexample: None,
        }
    }

    /// Records `lhs <= rhs`; `describe` is only evaluated on the first failure.
    pub fn record(&mut self, lhs: f64, rhs: f64, describe: impl FnOnce() -> String) {
        self.instances += 1;
        let margin = rhs - lhs;
        self.worst_margin = self.worst_margin.min(margin);
        if !(lhs <= rhs) {
            self.violations += 1;
            if self.first_counterexample.is_none() {
                self.first_counterexample = Some(describe());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Folds another report of the same check into this one.
    pub fn merge(&mut self, other: &CheckReport) {
        self.instances += other.instances;
        self.violations += other.violations;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        if self.first_counterexample.is_none() {
            self.first_counterexample = other.first_counterexample.clone();
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} check={} instances={} violations={} worst_margin={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.violations,
            format_margin(self.worst_margin)
        )?;
        if let Some(example) = &self.first_counterexample {
            write!(f, " first_counterexample=\"{example}\"")?;
        }
        Ok(())
    }
}

fn format_margin(m: f64) -> String {
    if m.is_infinite() {
        "inf".into()
    } else {
        format!("{m:.6}")
    }
}

/// A set of check reports; passes iff every check passes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckReport::passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Merges reports check by check (by name, keeping first-seen order).
    pub fn merge(&mut self, other: &SuiteReport) {
        for check in &other.checks {
            match self.checks.iter_mut().find(|c| c.name == check.name) {
                Some(existing) => existing.merge(check),
                None => self.checks.push(check.clone()),
            }
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        Ok(())
    }
}

/// Search window used for a threshold value: `max(1, ceil(d))`.
pub fn slot_window(threshold: f64) -> usize {
    (threshold.ceil() as usize).max(1)
}

/// Final waiting times `d_hat_s` of a run, `None` for rounds pending at the
/// horizon.
pub fn waiting_times(history: &SchedulerHistory) -> Vec<Option<usize>> {
    history.ledger.iter().map(|r| r.waited).collect()
}

/// Thresholds `d_max^t` for `t = 1..=T`.
pub fn thresholds(history: &SchedulerHistory) -> Vec<f64> {
    history.trace.iter().map(|r| r.threshold).collect()
}

/// Number of rounds each round contributed to the outstanding count over the
/// run: `d_hat - 1` for an arrival with positive delay, `0` for a zero-delay
/// arrival, `d_hat` for a skip, and `T - s` for a round pending at `T`.
/// These sum to `D_T`.
pub fn outstanding_contributions(history: &SchedulerHistory) -> Vec<u64> {
    let horizon = history.horizon();
    history
        .ledger
        .iter()
        .map(|r| match (r.status, r.waited) {
            (RoundStatus::Arrived, Some(w)) => w.saturating_sub(1) as u64,
            (RoundStatus::Skipped, Some(w)) => w as u64,
            _ => (horizon - r.round) as u64,
        })
        .collect()
}

/// Outstanding count at the start of each round, before arrivals:
/// `sigma'_t = #{r < t : r + d_hat_r >= t}` with pending rounds never
/// resolving. Returned for `t = 1..=T`.
pub fn arrival_outstanding_series(waited: &[Option<usize>]) -> Vec<u64> {
    let horizon = waited.len();
    let mut diff = vec![0i64; horizon + 2];
    for (idx, w) in waited.iter().enumerate() {
        let r = idx + 1;
        let last = match w {
            Some(w) => (r + w).min(horizon),
            None => horizon,
        };
        if last > r {
            diff[r + 1] += 1;
            diff[last + 1] -= 1;
        }
    }
    let mut running = 0i64;
    (1..=horizon)
        .map(|t| {
            running += diff[t];
            running as u64
        })
        .collect()
}

/// Running maximum of a series.
pub fn running_max(series: &[u64]) -> Vec<u64> {
    series
        .iter()
        .scan(0u64, |m, &v| {
            *m = (*m).max(v);
            Some(*m)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementResult {
    /// `pi[s - 1]`: new slot of round `s`'s arrival, `None` if never delivered.
    pub pi: Vec<Option<usize>>,
    /// `nu_new[j - 1]`: occupancy of slot `j`, for `j` in `1..=slots`.
    pub nu_new: Vec<u8>,
    /// `nu[t - 1]`: number of resolutions landing at round `t`.
    pub nu: Vec<u32>,
}

impl RearrangementResult {
    pub fn slots(&self) -> usize {
        self.nu_new.len()
    }
}

/// Greedy rearrangement: arrivals are taken in order of landing round (ties
/// by origin) and each is moved to the earliest free slot at or after its
/// landing round `t`, searching at most `max(1, ceil(d_max^t))` slots ahead.
/// The slot horizon is `T + max(1, ceil(d_max^T))`.
pub fn greedy_rearrangement(
    waited: &[Option<usize>],
    thresholds: &[f64],
) -> Result<RearrangementResult, DiagnosticsError> {
    let horizon = waited.len();
    if thresholds.len() != horizon {
        return Err(DiagnosticsError::InconsistentSchedule(format!(
            "{} waiting times but {} thresholds",
            horizon,
            thresholds.len()
        )));
    }
    let slots = horizon + thresholds.last().map_or(1, |&d| slot_window(d));
    let mut nu = vec![0u32; horizon];
    let mut landing: Vec<(usize, usize)> = Vec::with_capacity(horizon);
    for (idx, w) in waited.iter().enumerate() {
        let s = idx + 1;
        if let Some(w) = *w {
            let t = s + w;
            if t > horizon {
                return Err(DiagnosticsError::InconsistentSchedule(format!(
                    "round {s} resolves at {t} beyond horizon {horizon}"
                )));
            }
            nu[t - 1] += 1;
            landing.push((t, s));
        }
    }
    landing.sort_unstable();

    // next_free[j] points towards the first free slot >= j (path-compressed).
    let mut next_free: Vec<usize> = (0..=slots + 1).collect();
    fn find(next_free: &mut [usize], j: usize) -> usize {
        let mut root = j;
        while next_free[root] != root {
            root = next_free[root];
        }
        let mut cur = j;
        while next_free[cur] != root {
            let nxt = next_free[cur];
            next_free[cur] = root;
            cur = nxt;
        }
        root
    }

    let mut pi = vec![None; horizon];
    let mut nu_new = vec![0u8; slots];
    for (t, s) in landing {
        let window = slot_window(thresholds[t - 1]);
        let slot = find(&mut next_free, t);
        if slot > slots || slot > t + window {
            return Err(DiagnosticsError::NoFreeSlot {
                origin: s,
                arrival: t,
                window,
            });
        }
        pi[s - 1] = Some(slot);
        nu_new[slot - 1] = 1;
        next_free[slot] = slot + 1;
    }
    Ok(RearrangementResult { pi, nu_new, nu })
}

/// Checks occupancy, the displacement bound `pi(s) - (s + d_hat_s) <=
/// sigma_max^t` at the landing round `t`, and that slots `[1, T +
/// sigma_max^T]` hold at most `sigma_max^T + U` zeros, where `U` is the
/// number of rounds still pending at `T`.
pub fn check_rearrangement(
    result: &RearrangementResult,
    waited: &[Option<usize>],
    sigma_max: &[u64],
) -> SuiteReport {
    let horizon = waited.len();
    let mut occupancy = CheckReport::new("rearrange_occupancy");
    for (j, &v) in result.nu_new.iter().enumerate() {
        occupancy.record(v as f64, 1.0, || format!("slot {} holds {v}", j + 1));
    }
    let placed: u64 = result.nu_new.iter().map(|&v| v as u64).sum();
    let delivered: u64 = result.nu.iter().map(|&v| v as u64).sum();
    occupancy.record(
        (placed as f64 - delivered as f64).abs(),
        0.0,
        || format!("{placed} placed but {delivered} delivered"),
    );

    let mut displacement = CheckReport::new("rearrange_displacement");
    for (idx, (slot, w)) in result.pi.iter().zip(waited).enumerate() {
        if let (Some(slot), Some(w)) = (slot, w) {
            let s = idx + 1;
            let t = s + w;
            let bound = sigma_max[t - 1] as f64;
            let moved = (slot - t) as f64;
            displacement.record(moved, bound, || {
                format!("round {s} lands at {t}, placed at {slot}, sigma_max={bound}")
            });
        }
    }

    let mut zeros = CheckReport::new("rearrange_zero_slots");
    if horizon > 0 {
        let sigma_t = sigma_max[horizon - 1] as usize;
        let unresolved = waited.iter().filter(|w| w.is_none()).count();
        let end = (horizon + sigma_t).min(result.slots());
        let beyond = horizon + sigma_t - end;
        let zero_count = result.nu_new[..end].iter().filter(|&&v| v == 0).count() + beyond;
        let bound = (sigma_t + unresolved) as f64;
        zeros.record(zero_count as f64, bound, || {
            format!("{zero_count} empty slots in [1, {}], bound {bound}", horizon + sigma_t)
        });
    }
    SuiteReport {
        checks: vec![occupancy, displacement, zeros],
    }
}

/// Rearranges the run's arrivals and checks the result against the
/// running maximum of the arrival-time outstanding count.
pub fn rearrangement_report(history: &SchedulerHistory) -> SuiteReport {
    let waited = waiting_times(history);
    let sigma = running_max(&arrival_outstanding_series(&waited));
    match greedy_rearrangement(&waited, &thresholds(history)) {
        Ok(result) => check_rearrangement(&result, &waited, &sigma),
        Err(err) => {
            let mut report = CheckReport::new("rearrange_no_free_slot");
            report.record(1.0, 0.0, || err.to_string());
            SuiteReport {
                checks: vec![report],
            }
        }
    }
}

/// `lambda_{s,t}` from the recorded outstanding sums.
pub fn lambda_between(history: &SchedulerHistory, s: usize, t: usize) -> f64 {
    implicit_exploration(history.cum_outstanding(s), history.cum_outstanding(t))
}

/// Number of pairs `(s, t)` with `1 <= s <= t <= T` and `t - s <= d_max^t`.
pub fn drift_pair_count(history: &SchedulerHistory) -> u64 {
    (1..=history.horizon())
        .map(|t| drift_span(history, t) as u64 + 1)
        .sum()
}

fn drift_span(history: &SchedulerHistory, t: usize) -> usize {
    (history.threshold(t).floor() as usize).min(t - 1)
}

/// Checks `x_{t,i} <= 4 max(x_{s,i}, lambda_{s,t})` for every arm. All valid
/// pairs are enumerated when there are at most `budget` of them; otherwise
/// `budget` pairs are drawn (uniform `t`, then uniform `s` in the window).
pub fn check_drift<R: Rng + ?Sized>(
    history: &SchedulerHistory,
    budget: u64,
    rng: &mut R,
) -> CheckReport {
    let mut report = CheckReport::new("drift");
    let horizon = history.horizon();
    if horizon == 0 {
        return report;
    }
    let check_pair = |s: usize, t: usize, report: &mut CheckReport| {
        let lambda = lambda_between(history, s, t);
        let xs = history.distributions[s - 1].probs();
        let xt = history.distributions[t - 1].probs();
        for (i, (&a, &b)) in xt.iter().zip(xs).enumerate() {
            report.record(a, 4.0 * b.max(lambda), || {
                format!("s={s} t={t} arm={i} x_t={a:.6e} x_s={b:.6e} lambda={lambda:.6e}")
            });
        }
    };
    if drift_pair_count(history) <= budget {
        for t in 1..=horizon {
            for s in t - drift_span(history, t)..=t {
                check_pair(s, t, &mut report);
            }
        }
    } else {
        for _ in 0..budget {
            let t = rng.gen_range(1..=horizon);
            let s = t - rng.gen_range(0..=drift_span(history, t));
            check_pair(s, t, &mut report);
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSumReport {
    pub sum: f64,
    pub sigma_hat_max: u64,
    /// `sum / sigma_hat_max`, zero when `sigma_hat_max` is zero.
    pub ratio: f64,
}

/// `sum_t lambda_{t, t + d_hat_t} + lambda_{t, t + d_hat_t + sigma_max^t}`,
/// with indices past the horizon clamped to `T` and rounds pending at `T`
/// treated as waiting `T - t`.
pub fn lambda_sum_report(history: &SchedulerHistory) -> LambdaSumReport {
    let horizon = history.horizon();
    let mut sigma_max = 0u64;
    let mut sum = 0.0;
    for t in 1..=horizon {
        sigma_max = sigma_max.max(history.trace[t - 1].sigma_hat);
        let wait = history.waited(t).unwrap_or(horizon - t);
        let first = (t + wait).min(horizon);
        let second = (t + wait + sigma_max as usize).min(horizon);
        sum += lambda_between(history, t, first) + lambda_between(history, t, second);
    }
    LambdaSumReport {
        sum,
        sigma_hat_max: sigma_max,
        ratio: if sigma_max == 0 { 0.0 } else { sum / sigma_max as f64 },
    }
}

/// `K^{2/3} ln K`, the scale inside the skipped-set objective.
pub fn skip_objective_scale(num_arms: usize) -> f64 {
    let k = num_arms as f64;
    k.powf(2.0 / 3.0) * k.ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipMinimizer {
    /// Optimal `|S|`.
    pub skip_count: usize,
    /// `min_S |S| + sqrt(D_{not S} K^{2/3} ln K)`.
    pub value: f64,
    /// Rounds (1-based) of one optimal skipped set.
    pub skipped: Vec<usize>,
    pub total_delay: u64,
    pub max_delay: usize,
    /// `sqrt(D) <= min_S (|S| + sqrt(D_{not S})) + d_max`, with the
    /// unscaled objective.
    pub unscaled_bound_holds: bool,
}

impl fmt::Display for SkipMinimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "skip_count={} value={:.6} total_delay={} max_delay={} sqrt_total_bound={}",
            self.skip_count,
            self.value,
            self.total_delay,
            self.max_delay,
            if self.unscaled_bound_holds { "holds" } else { "VIOLATED" }
        )
    }
}

/// Best prefix of the descending delay order for `m + sqrt(scale * rest)`.
fn best_prefix(sorted_desc: &[u64], total: u64, scale: f64) -> (usize, f64) {
    let mut best = (0usize, (total as f64 * scale).sqrt());
    let mut removed = 0u64;
    for (m, &d) in sorted_desc.iter().enumerate() {
        removed += d;
        let value = (m + 1) as f64 + ((total - removed) as f64 * scale).sqrt();
        if value < best.1 {
            best = (m + 1, value);
        }
    }
    best
}

/// Exact minimizer of `|S| + sqrt(D_{not S} K^{2/3} ln K)` over skipped sets
/// `S`: for a fixed size the largest delays are skipped, so scanning prefixes
/// of the descending order suffices.
pub fn skip_set_minimizer(delays: &[usize], num_arms: usize) -> SkipMinimizer {
    let scale = skip_objective_scale(num_arms);
    let mut order: Vec<usize> = (0..delays.len()).collect();
    order.sort_by(|&a, &b| delays[b].cmp(&delays[a]).then(a.cmp(&b)));
    let sorted: Vec<u64> = order.iter().map(|&i| delays[i] as u64).collect();
    let total: u64 = sorted.iter().sum();
    let (skip_count, value) = best_prefix(&sorted, total, scale);
    let (_, unscaled) = best_prefix(&sorted, total, 1.0);
    let max_delay = delays.iter().copied().max().unwrap_or(0);
    let mut skipped: Vec<usize> = order[..skip_count].iter().map(|&i| i + 1).collect();
    skipped.sort_unstable();
    SkipMinimizer {
        skip_count,
        value,
        skipped,
        total_delay: total,
        max_delay,
        unscaled_bound_holds: (total as f64).sqrt() <= unscaled + max_delay as f64 + 1e-9,
    }
}

/// Compares `sqrt(D_T K^{2/3} ln K)` of a run with the offline minimizer over
/// its true delays.
pub fn check_total_outstanding_bound(
    history: &SchedulerHistory,
    delays: &[usize],
) -> CheckReport {
    let mut report = CheckReport::new("outstanding_vs_minimizer");
    let d_t = history.cum_outstanding(history.horizon());
    let lhs = (d_t as f64 * skip_objective_scale(history.num_arms)).sqrt();
    let minimizer = skip_set_minimizer(delays, history.num_arms);
    report.record(lhs, minimizer.value, || {
        format!(
            "D_T={d_t} gives {lhs:.6} > minimizer value {:.6} (|S|={})",
            minimizer.value, minimizer.skip_count
        )
    });
    report
}

/// No round resolves more than one skip (read from the ledger, so corrupted
/// histories are caught too).
pub fn check_one_skip_per_round(history: &SchedulerHistory) -> CheckReport {
    let mut report = CheckReport::new("one_skip_per_round");
    let mut per_round: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for record in &history.ledger {
        if record.status == RoundStatus::Skipped {
            if let Some(at) = record.resolved_at() {
                per_round.entry(at).or_default().push(record.round);
            }
        }
    }
    for t in 1..=history.horizon() {
        let skipped = per_round.get(&t).map_or(&[][..], Vec::as_slice);
        report.record(skipped.len() as f64, 1.0, || {
            format!("MultipleSkips at round {t}: rounds {skipped:?}")
        });
    }
    report
}

/// `D_t <= 2 D_s` whenever `t - s <= d_max^t`. `D` is nondecreasing, so only
/// the earliest valid `s` per `t` needs checking.
pub fn check_outstanding_doubling(history: &SchedulerHistory) -> CheckReport {
    let mut report = CheckReport::new("outstanding_doubling");
    for t in 1..=history.horizon() {
        let s = t - drift_span(history, t);
        let (ds, dt) = (history.cum_outstanding(s), history.cum_outstanding(t));
        report.record(dt as f64, 2.0 * ds as f64, || {
            format!("s={s} t={t} D_s={ds} D_t={dt}")
        });
    }
    report
}

/// `sum_{s < t} w_s <= 2 D_t` where `w_s` is round `s`'s full contribution to
/// the outstanding sum (see [`outstanding_contributions`]).
pub fn check_waiting_budget(history: &SchedulerHistory) -> CheckReport {
    let mut report = CheckReport::new("waiting_budget");
    let contributions = outstanding_contributions(history);
    let mut prefix = 0u64;
    for t in 1..=history.horizon() {
        let dt = history.cum_outstanding(t);
        report.record(prefix as f64, 2.0 * dt as f64, || {
            format!("t={t} sum_w={prefix} D_t={dt}")
        });
        prefix += contributions[t - 1];
    }
    report
}

/// `S* <= 2 c w` where `w` is the contribution of the last skipped round and
/// `c` the run's threshold constant.
pub fn check_skip_budget(history: &SchedulerHistory) -> CheckReport {
    let mut report = CheckReport::new("skip_budget");
    let contributions = outstanding_contributions(history);
    let last = history
        .ledger
        .iter()
        .filter(|r| r.status == RoundStatus::Skipped)
        .max_by_key(|r| r.resolved_at());
    let skips = history
        .ledger
        .iter()
        .filter(|r| r.status == RoundStatus::Skipped)
        .count();
    if let Some(last) = last {
        let w = contributions[last.round - 1];
        let bound = 2.0 * history.threshold_constant * w as f64;
        report.record(skips as f64, bound, || {
            format!("{skips} skips, last skipped round {} waited {w}", last.round)
        });
    } else {
        report.record(0.0, 0.0, String::new);
    }
    report
}

/// `D_T` equals the sum of per-round contributions and the trace's
/// `sigma_hat` values.
pub fn check_accounting(history: &SchedulerHistory) -> CheckReport {
    let mut report = CheckReport::new("accounting");
    let horizon = history.horizon();
    let d_t = history.cum_outstanding(horizon) as f64;
    let from_contributions: u64 = outstanding_contributions(history).iter().sum();
    let from_trace: u64 = history.trace.iter().map(|r| r.sigma_hat).sum();
    for (name, value) in [("contributions", from_contributions), ("sigma_hat", from_trace)] {
        report.record((value as f64 - d_t).abs(), 0.0, || {
            format!("sum of {name} = {value}, D_T = {d_t}")
        });
    }
    report
}

/// One-skip-per-round, `D` doubling, waiting-time budget, skip budget and
/// accounting consistency.
pub fn run_invariant_suite(history: &SchedulerHistory) -> SuiteReport {
    SuiteReport {
        checks: vec![
            check_one_skip_per_round(history),
            check_outstanding_doubling(history),
            check_waiting_budget(history),
            check_skip_budget(history),
            check_accounting(history),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rearrangement() {
        let waited = vec![Some(0); 5];
        let result = greedy_rearrangement(&waited, &[0.0; 5]).unwrap();
        assert_eq!(result.pi, (1..=5).map(Some).collect::<Vec<_>>());
        let sigma = running_max(&arrival_outstanding_series(&waited));
        assert_eq!(sigma, vec![0; 5]);
        let report = check_rearrangement(&result, &waited, &sigma);
        assert!(report.passed(), "{report}");
        assert_eq!(report.get("rearrange_displacement").unwrap().worst_margin, 0.0);
    }

    #[test]
    fn two_arrivals_at_round_two_split() {
        // Round 1 waits 1, round 2 waits 0: both land at 2.
        let waited = vec![Some(1), Some(0), None];
        let result = greedy_rearrangement(&waited, &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(result.pi, vec![Some(2), Some(3), None]);
        assert_eq!(result.nu, vec![0, 2, 0]);
    }

    #[test]
    fn no_free_slot_is_reported() {
        let waited = vec![Some(2), Some(1), Some(0)];
        let err = greedy_rearrangement(&waited, &[0.0; 3]).unwrap_err();
        assert!(matches!(err, DiagnosticsError::NoFreeSlot { origin: 3, arrival: 3, window: 1 }));
    }

    #[test]
    fn arrival_outstanding_counts() {
        // Round 1 resolves at 3, round 2 at 2, round 3 pending.
        let waited = vec![Some(2), Some(0), None, Some(0)];
        assert_eq!(arrival_outstanding_series(&waited), vec![0, 1, 1, 1]);
    }

    #[test]
    fn minimizer_small_cases() {
        let zero = skip_set_minimizer(&[0, 0, 0], 2);
        assert_eq!((zero.skip_count, zero.value), (0, 0.0));
        let m = skip_set_minimizer(&[100, 0, 0, 0], 2);
        let scale = 2f64.powf(2.0 / 3.0) * 2f64.ln();
        assert!((100.0 * scale).sqrt() > 1.0);
        assert_eq!((m.skip_count, m.value, m.skipped.clone()), (1, 1.0, vec![1]));
        assert!(m.unscaled_bound_holds);
    }

    #[test]
    fn report_format_is_one_line_per_check() {
        let mut a = CheckReport::new("a");
        a.record(1.0, 2.0, String::new);
        let mut b = CheckReport::new("b");
        b.record(3.0, 2.0, || "x".into());
        let suite = SuiteReport { checks: vec![a, b] };
        let text = suite.to_string();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("PASS check=a instances=1 violations=0 worst_margin=1.000000"));
        assert!(text.contains("FAIL check=b instances=1 violations=1 worst_margin=-1.000000"));
        assert!(!suite.passed());
    }
}
