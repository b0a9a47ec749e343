//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use delayed_bobw::environment::{AdversarialSource, DelaySpec, EnvironmentConfig, LossSpec};
use rand::Rng;

/// `<L, x> + F(x)` written out directly from the regularizer formula.
pub fn ftrl_objective(losses: &[f64], eta_inv: f64, gamma_inv: f64, x: &[f64]) -> f64 {
    x.iter()
        .zip(losses)
        .map(|(&xi, &l)| {
            let mut v = l * xi - 2.0 * eta_inv * xi.sqrt();
            if gamma_inv > 0.0 {
                v += gamma_inv * xi * (xi.ln() - 1.0);
            }
            v
        })
        .sum()
}

/// Exhaustive grid over `x_1 in (0, 1)` at `step` for two arms.
pub fn grid_1d_full(losses: &[f64], eta_inv: f64, gamma_inv: f64, step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    let mut best = (f64::INFINITY, 0.5);
    for j in 1..n {
        let x1 = j as f64 * step;
        let v = ftrl_objective(losses, eta_inv, gamma_inv, &[x1, 1.0 - x1]);
        if v < best.0 {
            best = (v, x1);
        }
    }
    vec![best.1, 1.0 - best.1]
}

/// Grid search over the simplex for `K` in {2, 3}: a full grid at `coarse`,
/// then successive local grids (radius 20 steps) down to `fine`. The
/// objective is strictly convex, so the local refinement cannot leave the
/// basin of the coarse minimizer.
pub fn grid_oracle(losses: &[f64], eta_inv: f64, gamma_inv: f64, coarse: f64, fine: f64) -> Vec<f64> {
    let k = losses.len();
    assert!(k == 2 || k == 3, "grid oracle supports 2 or 3 arms");
    let eval = |p: &[f64]| -> Option<f64> {
        let rest = 1.0 - p.iter().sum::<f64>();
        if p.iter().any(|&v| v <= 0.0) || rest <= 0.0 {
            return None;
        }
        let mut x = p.to_vec();
        x.push(rest);
        Some(ftrl_objective(losses, eta_inv, gamma_inv, &x))
    };
    let dims = k - 1;
    let n = (1.0 / coarse).round() as usize;
    let mut best = (f64::INFINITY, vec![0.0; dims]);
    if dims == 1 {
        for i in 1..n {
            let p = [i as f64 * coarse];
            if let Some(v) = eval(&p) {
                if v < best.0 {
                    best = (v, p.to_vec());
                }
            }
        }
    } else {
        for i in 1..n {
            for j in 1..n - i {
                let p = [i as f64 * coarse, j as f64 * coarse];
                if let Some(v) = eval(&p) {
                    if v < best.0 {
                        best = (v, p.to_vec());
                    }
                }
            }
        }
    }
    let mut step = coarse;
    while step > fine * 1.5 {
        step /= 10.0;
        let center = best.1.clone();
        let r = 20i64;
        if dims == 1 {
            for a in -r..=r {
                let p = [center[0] + a as f64 * step];
                if let Some(v) = eval(&p) {
                    if v < best.0 {
                        best = (v, p.to_vec());
                    }
                }
            }
        } else {
            for a in -r..=r {
                for b in -r..=r {
                    let p = [center[0] + a as f64 * step, center[1] + b as f64 * step];
                    if let Some(v) = eval(&p) {
                        if v < best.0 {
                            best = (v, p.to_vec());
                        }
                    }
                }
            }
        }
    }
    let mut x = best.1.clone();
    x.push(1.0 - best.1.iter().sum::<f64>());
    x
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Minimum of `|S| + sqrt(scale * sum_{s not in S} d_s)` over all subsets.
pub fn brute_force_skip_value(delays: &[usize], scale: f64) -> f64 {
    let n = delays.len();
    let total: u64 = delays.iter().map(|&d| d as u64).sum();
    (0u32..1 << n)
        .map(|mask| {
            let skipped: u64 = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| delays[i] as u64)
                .sum();
            mask.count_ones() as f64 + ((total - skipped) as f64 * scale).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `#{s in [t-1] : s + d_s > t}` by direct counting.
pub fn hand_count_sigma_hat(delays: &[usize], t: usize) -> usize {
    (1..t).filter(|&s| s + delays[s - 1] > t).count()
}

/// A random environment for the invariant corpora: random K, a random
/// delay family and either Bernoulli or two-phase losses.
pub fn random_environment<R: Rng>(rng: &mut R, horizon: usize, seed: u64) -> EnvironmentConfig {
    let num_arms = rng.gen_range(2..=5);
    let delay = match rng.gen_range(0..5) {
        0 => DelaySpec::Constant {
            value: rng.gen_range(0..=60),
        },
        1 => {
            let hi = rng.gen_range(0..=120);
            DelaySpec::UniformRandom {
                lo: rng.gen_range(0..=hi),
                hi,
            }
        }
        2 => DelaySpec::SingleOutlier { magnitude: None },
        3 => DelaySpec::OutlierFront {
            magnitude: Some(rng.gen_range(1..=horizon)),
            count: Some(rng.gen_range(1..=horizon / 10)),
        },
        _ => DelaySpec::Explicit {
            delays: (0..horizon)
                .map(|_| if rng.gen_bool(0.05) { rng.gen_range(0..=horizon) } else { rng.gen_range(0..=5) })
                .collect(),
        },
    };
    let loss = if rng.gen_bool(0.5) {
        let mut means: Vec<f64> = (0..num_arms).map(|i| 0.2 + 0.6 * i as f64 / num_arms as f64).collect();
        means.rotate_left(rng.gen_range(0..num_arms));
        LossSpec::Stochastic {
            means,
            allow_equal_means: false,
        }
    } else {
        LossSpec::Adversarial {
            source: AdversarialSource::TwoPhase,
        }
    };
    EnvironmentConfig {
        num_arms,
        horizon,
        loss,
        delay,
        seed,
    }
}
