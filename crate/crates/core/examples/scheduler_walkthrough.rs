//! Drives the delayed learner by hand for a short run and prints the
//! per-round accounting: outstanding count, cumulative count, skipping
//! threshold and skips.
//!
//! cargo run --example scheduler_walkthrough

use delayed_bobw::scheduler::Arrival;
use delayed_bobw::solver::{sample_arm, SimplexPoint};
use delayed_bobw::{Scheduler, SchedulerConfig, ThresholdRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let delays = [12, 0, 3, 7, 1, 0, 9, 2, 0, 4, 0, 0, 5, 0, 1, 0];
    let horizon = delays.len();
    let means = [0.3, 0.6, 0.7];
    // A small threshold constant so skipping is visible in a short run.
    let config = SchedulerConfig {
        implicit_exploration: true,
        threshold: ThresholdRule::Custom(0.5),
    };
    let mut sched = Scheduler::new(means.len(), config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut arrivals_at = vec![Vec::new(); horizon + 1];
    for (i, &d) in delays.iter().enumerate() {
        if i + 1 + d <= horizon {
            arrivals_at[i + 1 + d].push(i + 1);
        }
    }
    let mut distributions: Vec<SimplexPoint> = Vec::new();
    let mut played_loss = Vec::new();

    println!(" t arm sigma  D_t  d_max skipped arrived");
    for t in 1..=horizon {
        let x = sched.begin_round().unwrap();
        let arm = sample_arm(&x, &mut rng);
        sched.record_play(arm).unwrap();
        distributions.push(x);
        played_loss.push(if rng.gen_bool(means[arm]) { 1.0 } else { 0.0 });

        let origins = &arrivals_at[t];
        let counts = sched.update_counts(origins).unwrap();
        let arrivals: Vec<Arrival> = origins
            .iter()
            .map(|&s| Arrival { origin: s, loss: played_loss[s - 1] })
            .collect();
        sched.deliver(&arrivals, |s| distributions.get(s - 1)).unwrap();
        let skipped = sched.apply_skipping().unwrap();
        println!(
            "{t:>2} {arm:>3} {:>5} {:>4} {:>6.2} {:>7} {origins:?}",
            counts.sigma_hat,
            counts.cum_outstanding,
            counts.threshold,
            skipped.map_or("-".to_string(), |s| s.to_string()),
        );
        sched.finish_round().unwrap();
    }
    let st = sched.state();
    println!(
        "skips={} skip_set={:?} still outstanding={:?}",
        st.skip_count,
        st.skip_set,
        st.outstanding_rounds().collect::<Vec<_>>()
    );
    println!("cumulative loss estimates {:.3?}", st.cum_loss_est);
}
