//! FTRL over the probability simplex with the hybrid Tsallis + Shannon
//! regularizer
//!
//! ```text
//! F(x) = -2 * eta_inv * sum_i sqrt(x_i) + gamma_inv * sum_i x_i (ln x_i - 1)
//! ```
//!
//! The minimizer of `<L, x> + F(x)` is characterized by a single scalar
//! multiplier `mu` with `f'(x_i) = mu - L_i` for every coordinate, where
//! `f'(x) = -eta_inv / sqrt(x) + gamma_inv * ln x`. Because `f'` is strictly
//! increasing, each coordinate is a monotone one-dimensional root-find and the
//! total mass is increasing in `mu`; the outer loop searches `mu` until the
//! coordinates sum to one.

use rand::Rng;
use thiserror::Error;

/// Mass tolerance the solver guarantees on its output.
pub const SUM_TOLERANCE: f64 = 1e-10;
/// Outer search budget.
pub const MAX_OUTER_STEPS: usize = 200;
/// Inner (per-coordinate) Newton budget.
pub const MAX_INNER_STEPS: usize = 100;
/// Smallest probability the solver will return.
pub const MIN_PROBABILITY: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("FTRL solve did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid regularizer parameters: {0}")]
    InvalidParams(String),
    #[error("invalid loss vector: {0}")]
    InvalidLosses(String),
    #[error("invalid simplex point: {0}")]
    InvalidPoint(String),
}

/// A probability vector over `K` arms with strictly positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    probs: Vec<f64>,
}

impl SimplexPoint {
    /// Validates positivity and unit mass (within [`SUM_TOLERANCE`]).
    pub fn new(probs: Vec<f64>) -> Result<Self, SolverError> {
        if probs.is_empty() {
            return Err(SolverError::InvalidPoint("empty probability vector".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(SolverError::InvalidPoint(format!("entry {p} is not strictly positive")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(SolverError::InvalidPoint(format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(num_arms: usize) -> Self {
        Self {
            probs: vec![1.0 / num_arms as f64; num_arms],
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_arms(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, arm: usize) -> f64 {
        self.probs[arm]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.probs
    }
}

/// Inverse learning rates of the two regularizer components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizerParams {
    /// Tsallis inverse learning rate, `sqrt(t)` in the scheduler.
    pub eta_inv: f64,
    /// Negentropy inverse learning rate; zero disables the entropy term.
    pub gamma_inv: f64,
    pub num_arms: usize,
}

impl RegularizerParams {
    pub fn new(eta_inv: f64, gamma_inv: f64, num_arms: usize) -> Result<Self, SolverError> {
        let params = Self {
            eta_inv,
            gamma_inv,
            num_arms,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.num_arms < 2 {
            return Err(SolverError::InvalidParams(format!(
                "need at least 2 arms, got {}",
                self.num_arms
            )));
        }
        if !(self.eta_inv.is_finite() && self.eta_inv >= 0.0) {
            return Err(SolverError::InvalidParams(format!("eta_inv = {}", self.eta_inv)));
        }
        if !(self.gamma_inv.is_finite() && self.gamma_inv >= 0.0) {
            return Err(SolverError::InvalidParams(format!("gamma_inv = {}", self.gamma_inv)));
        }
        if self.eta_inv == 0.0 && self.gamma_inv == 0.0 {
            return Err(SolverError::InvalidParams("both learning rates are infinite".into()));
        }
        Ok(())
    }

    /// Derivative of the per-coordinate regularizer `f`.
    pub fn derivative(&self, x: f64) -> f64 {
        let mut d = -self.eta_inv / x.sqrt();
        if self.gamma_inv > 0.0 {
            d += self.gamma_inv * x.ln();
        }
        d
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let mut d = 0.5 * self.eta_inv / (x * x.sqrt());
        if self.gamma_inv > 0.0 {
            d += self.gamma_inv / x;
        }
        d
    }
}

/// Evaluates the hybrid regularizer at `x`.
pub fn regularizer_value(x: &SimplexPoint, params: &RegularizerParams) -> f64 {
    let tsallis: f64 = x.probs.iter().map(|p| p.sqrt()).sum();
    let mut value = -2.0 * params.eta_inv * tsallis;
    if params.gamma_inv > 0.0 {
        let entropy: f64 = x.probs.iter().map(|p| p * (p.ln() - 1.0)).sum();
        value += params.gamma_inv * entropy;
    }
    value
}

/// Result of an FTRL solve together with its Lagrange multiplier.
#[derive(Debug, Clone)]
pub struct FtrlSolution {
    pub point: SimplexPoint,
    pub multiplier: f64,
    pub outer_steps: usize,
}

impl FtrlSolution {
    /// Largest stationarity residual `|f'(x_i) + L_i - mu|` over coordinates.
    pub fn stationarity_residual(&self, losses: &[f64], params: &RegularizerParams) -> f64 {
        self.point
            .probs
            .iter()
            .zip(losses)
            .map(|(&x, &l)| (params.derivative(x) + l - self.multiplier).abs())
            .fold(0.0, f64::max)
    }
}

/// Returns `argmin_x <losses, x> + F(x)` over the simplex.
pub fn solve_ftrl(losses: &[f64], params: &RegularizerParams) -> Result<SimplexPoint, SolverError> {
    solve_ftrl_with_multiplier(losses, params).map(|s| s.point)
}

pub fn solve_ftrl_with_multiplier(
    losses: &[f64],
    params: &RegularizerParams,
) -> Result<FtrlSolution, SolverError> {
    params.validate()?;
    if losses.len() != params.num_arms {
        return Err(SolverError::InvalidLosses(format!(
            "expected {} losses, got {}",
            params.num_arms,
            losses.len()
        )));
    }
    if let Some(l) = losses.iter().find(|l| !l.is_finite()) {
        return Err(SolverError::InvalidLosses(format!("non-finite loss {l}")));
    }

    let k = params.num_arms as f64;
    let min_loss = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let max_loss = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut lo = min_loss + params.derivative(1.0 / k) - 1.0;
    let mut hi = max_loss + params.derivative(1.0) + 1.0;
    let mut width = 1.0;
    while mass(losses, params, lo)?.0 >= 1.0 {
        width *= 2.0;
        lo = min_loss + params.derivative(1.0 / k) - width;
        if !lo.is_finite() {
            return Err(SolverError::NonConvergence("lower bracket diverged".into()));
        }
    }
    width = 1.0;
    while mass(losses, params, hi)?.0 <= 1.0 {
        width *= 2.0;
        hi = max_loss + params.derivative(1.0) + width;
        if !hi.is_finite() {
            return Err(SolverError::NonConvergence("upper bracket diverged".into()));
        }
    }

    // Safeguarded Newton on mu: a Newton step is taken when it lands strictly
    // inside the current bracket, otherwise the bracket is bisected.
    let mut mu = min_loss + params.derivative(1.0 / k);
    if !(mu > lo && mu < hi) {
        mu = 0.5 * (lo + hi);
    }
    for step in 1..=MAX_OUTER_STEPS {
        let (sum, slope) = mass(losses, params, mu)?;
        let gap = sum - 1.0;
        if gap.abs() <= 4.0 * f64::EPSILON * k {
            return finish(losses, params, mu, step);
        }
        if gap < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        if hi - lo <= f64::EPSILON * mu.abs().max(1.0) {
            return finish(losses, params, mu, step);
        }
        let newton = if slope > 0.0 { mu - gap / slope } else { f64::NAN };
        mu = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    finish(losses, params, mu, MAX_OUTER_STEPS)
}

fn finish(
    losses: &[f64],
    params: &RegularizerParams,
    mu: f64,
    steps: usize,
) -> Result<FtrlSolution, SolverError> {
    let probs = losses
        .iter()
        .map(|&l| coordinate(params, mu - l).map(|(x, _)| x))
        .collect::<Result<Vec<_>, _>>()?;
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(SolverError::NonConvergence(format!(
            "mass {sum} after {steps} outer steps"
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= MIN_PROBABILITY)) {
        return Err(SolverError::NonConvergence(format!("coordinate underflow ({p})")));
    }
    Ok(FtrlSolution {
        point: SimplexPoint { probs },
        multiplier: mu,
        outer_steps: steps,
    })
}

/// Total mass and its derivative with respect to `mu`.
fn mass(losses: &[f64], params: &RegularizerParams, mu: f64) -> Result<(f64, f64), SolverError> {
    let mut sum = 0.0;
    let mut slope = 0.0;
    for &l in losses {
        let (x, dx) = coordinate(params, mu - l)?;
        sum += x;
        slope += dx;
    }
    Ok((sum, slope))
}

/// Solves `f'(x) = target` on `(0, 1]`, returning `x` and `dx/dtarget`.
/// Targets at or above `f'(1)` are clamped to `x = 1` with zero slope.
fn coordinate(params: &RegularizerParams, target: f64) -> Result<(f64, f64), SolverError> {
    let a = params.eta_inv;
    let b = params.gamma_inv;
    if target >= params.derivative(1.0) {
        return Ok((1.0, 0.0));
    }
    // Substituting w = x^{-1/2} >= 1 turns the equation into
    // h(w) = a w + 2 b ln w = -target with h increasing and concave.
    let r = -target;
    let x = if a == 0.0 {
        (-r / b).exp()
    } else if b == 0.0 {
        let w = r / a;
        1.0 / (w * w)
    } else {
        let w = concave_newton(a, b, r)?;
        1.0 / (w * w)
    };
    let slope = if x > 0.0 {
        1.0 / params.second_derivative(x)
    } else {
        0.0
    };
    Ok((x, slope))
}

fn concave_newton(a: f64, b: f64, r: f64) -> Result<f64, SolverError> {
    let h = |w: f64| a * w + 2.0 * b * w.ln();
    // r / a overshoots the root because 2 b ln w >= 0 on w >= 1.
    let mut lo = 1.0_f64;
    let mut hi = (r / a).max(1.0);
    let mut w = hi;
    for _ in 0..MAX_INNER_STEPS {
        let value = h(w) - r;
        if value == 0.0 {
            return Ok(w);
        }
        if value < 0.0 {
            lo = lo.max(w);
        } else {
            hi = hi.min(w);
        }
        let next = w - value / (a + 2.0 * b / w);
        let next = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if (next - w).abs() <= 4.0 * f64::EPSILON * w || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        w = next;
    }
    Err(SolverError::NonConvergence(format!(
        "inner solve for target {} exhausted {MAX_INNER_STEPS} steps",
        -r
    )))
}

/// Inverse-CDF sampling in index order; the first arm whose cumulative mass
/// strictly exceeds the uniform draw is returned.
pub fn sample_arm<R: Rng + ?Sized>(x: &SimplexPoint, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (arm, p) in x.probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return arm;
        }
    }
    x.probs.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(eta_inv: f64, gamma_inv: f64, k: usize) -> RegularizerParams {
        RegularizerParams::new(eta_inv, gamma_inv, k).unwrap()
    }

    #[test]
    fn regularizer_uniform_tsallis_only() {
        let v = regularizer_value(&SimplexPoint::uniform(2), &params(1.0, 0.0, 2));
        assert!((v - (-2.0 * 2.0_f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn regularizer_uniform_entropy_only() {
        let p = RegularizerParams {
            eta_inv: 0.0,
            gamma_inv: 1.0,
            num_arms: 2,
        };
        let v = regularizer_value(&SimplexPoint::uniform(2), &p);
        assert!((v - (0.5_f64.ln() - 1.0)).abs() < 1e-12);
        assert!((v + 1.693147).abs() < 1e-6);
    }

    #[test]
    fn constant_losses_give_uniform() {
        for k in 2..7 {
            for &c in &[0.0, 3.5, 1234.0] {
                let x = solve_ftrl(&vec![c; k], &params(2.0, 1.5, k)).unwrap();
                for p in x.probs() {
                    assert!((p - 1.0 / k as f64).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn pure_tsallis_k2_is_interior() {
        let sol = solve_ftrl_with_multiplier(&[0.0, 1.0], &params(1.0, 0.0, 2)).unwrap();
        let x = sol.point.probs();
        assert!(x[0] > x[1]);
        assert!((x[0] + x[1] - 1.0).abs() < SUM_TOLERANCE);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(RegularizerParams::new(1.0, 0.0, 1).is_err());
        assert!(RegularizerParams::new(-1.0, 0.0, 2).is_err());
        assert!(solve_ftrl(&[0.0, f64::NAN], &params(1.0, 0.0, 2)).is_err());
        assert!(solve_ftrl(&[0.0, 1.0, 2.0], &params(1.0, 0.0, 2)).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn entropy_only_matches_softmax() {
        let p = RegularizerParams {
            eta_inv: 0.0,
            gamma_inv: 2.0,
            num_arms: 3,
        };
        let losses = [0.0, 1.0, 3.0];
        let x = solve_ftrl(&losses, &p).unwrap();
        let z: f64 = losses.iter().map(|l| (-l / 2.0).exp()).sum();
        for (xi, l) in x.probs().iter().zip(losses) {
            assert!((xi - (-l / 2.0).exp() / z).abs() < 1e-10);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let x = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200).map(|_| sample_arm(&x, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn degenerate_distribution_sampling() {
        let eps = 1e-18;
        let x = SimplexPoint::new(vec![1.0 - eps, eps]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let first = (0..n).filter(|_| sample_arm(&x, &mut rng) == 0).count();
        assert!(first as f64 / n as f64 >= 1.0 - 2.0 * eps);
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let x = SimplexPoint::uniform(4);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[sample_arm(&x, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01);
        }
    }
}
