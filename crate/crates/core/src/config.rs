//! TOML experiment files and `BOBW_*` environment overrides.
//!
//! ```toml
//! algorithm = "bobw"          # bobw | ftrl_no_ix | ucb_delayed
//! arms = 2
//! horizon = 10000
//! seeds = [1, 2, 3]
//! checkpoints = [1000, 10000] # optional
//! output = "trace.csv"        # optional, relative to this file
//!
//! [loss]
//! kind = "stochastic"
//! means = [0.5, 0.7]
//!
//! [delay]
//! kind = "constant"
//! value = 50
//! ```
//!
//! Precedence is file, then environment, then command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::baselines::NoIxConfig;
use crate::environment::{AdversarialSource, DelaySpec, EnvironmentConfig, LossSpec};
use crate::harness::{default_checkpoints, Algorithm, ExperimentConfig, HarnessError};

/// Prefix of the environment variables read by [`apply_env_overrides`].
pub const ENV_PREFIX: &str = "BOBW_";

/// Scalar keys that can be overridden from the environment, as
/// `BOBW_<KEY>` with the key upper-cased.
pub const ENV_KEYS: &[&str] = &[
    "algorithm",
    "arms",
    "horizon",
    "seeds",
    "env_seed",
    "output",
    "verify",
    "parallel",
];

/// On-disk layout of an experiment file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub algorithm: Algorithm,
    pub arms: usize,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub loss: LossSpec,
    pub delay: DelaySpec,
    #[serde(default)]
    pub env_seed: u64,
    pub checkpoints: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub verify: bool,
    pub parallel: Option<usize>,
    #[serde(default)]
    pub no_ix: NoIxConfig,
}

impl ExperimentFile {
    pub fn into_config(self) -> ExperimentConfig {
        let environment = EnvironmentConfig {
            num_arms: self.arms,
            horizon: self.horizon,
            loss: self.loss,
            delay: self.delay,
            seed: self.env_seed,
        };
        ExperimentConfig {
            algorithm: self.algorithm,
            checkpoints: self
                .checkpoints
                .unwrap_or_else(|| default_checkpoints(self.horizon)),
            environment,
            seeds: self.seeds,
            no_ix: self.no_ix,
            verify: self.verify,
            output: self.output,
            parallel: self.parallel,
        }
    }
}

fn config_error(message: impl Into<String>) -> HarnessError {
    HarnessError::Config(message.into())
}

/// Parses a seed list: comma-separated integers and inclusive ranges such
/// as `1-20`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, HarnessError> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parse = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| config_error(format!("invalid seed `{s}`")))
        };
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (parse(lo)?, parse(hi)?);
                if lo > hi {
                    return Err(config_error(format!("empty seed range `{part}`")));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(parse(part)?),
        }
    }
    if seeds.is_empty() {
        return Err(config_error("empty seed list"));
    }
    Ok(seeds)
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig, HarnessError> {
    let file: ExperimentFile =
        toml::from_str(text).map_err(|e| config_error(format!("parse error: {e}")))?;
    let mut config = file.into_config();
    resolve_paths(&mut config, base_dir);
    Ok(config)
}

/// Reads a config file, resolving relative paths against its directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

fn resolve(base: &Path, path: &mut PathBuf) {
    if path.is_relative() {
        *path = base.join(&*path);
    }
}

fn resolve_paths(config: &mut ExperimentConfig, base: &Path) {
    if let Some(out) = config.output.as_mut() {
        resolve(base, out);
    }
    if let DelaySpec::FromFile { path } = &mut config.environment.delay {
        resolve(base, path);
    }
    if let LossSpec::Adversarial {
        source: AdversarialSource::File { path },
    } = &mut config.environment.loss
    {
        resolve(base, path);
    }
}

/// Applies `BOBW_*` overrides from `vars` (normally `std::env::vars()`).
/// Horizon overrides also reset checkpoints that no longer fit.
pub fn apply_env_overrides<I>(config: &mut ExperimentConfig, vars: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = (String, String)>,
{
    for (name, value) in vars {
        let Some(key) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let bad = |what: &str| config_error(format!("{name}={value}: expected {what}"));
        match key {
            "ALGORITHM" => {
                config.algorithm = Algorithm::parse(&value)
                    .ok_or_else(|| bad("bobw, ftrl_no_ix or ucb_delayed"))?;
            }
            "ARMS" => config.environment.num_arms = value.parse().map_err(|_| bad("an integer"))?,
            "HORIZON" => {
                let horizon: usize = value.parse().map_err(|_| bad("an integer"))?;
                config.environment.horizon = horizon;
                if config.checkpoints.last().is_some_and(|&c| c > horizon) {
                    config.checkpoints = default_checkpoints(horizon);
                }
            }
            "SEEDS" => config.seeds = parse_seeds(&value)?,
            "ENV_SEED" => config.environment.seed = value.parse().map_err(|_| bad("an integer"))?,
            "OUTPUT" => config.output = Some(PathBuf::from(value)),
            "VERIFY" => {
                config.verify = match value.as_str() {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    _ => return Err(bad("true/false or 1/0")),
                }
            }
            "PARALLEL" => config.parallel = Some(value.parse().map_err(|_| bad("an integer"))?),
            _ => return Err(config_error(format!("unknown override {name}"))),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
algorithm = "ftrl_no_ix"
arms = 3
horizon = 100
seeds = [4, 5]
output = "out/trace.csv"

[loss]
kind = "adversarial"
generator = "two_phase"

[delay]
kind = "from_file"
path = "delays.txt"

[no_ix]
threshold = { rule = "custom", value = 2.5 }
"#;

    #[test]
    fn parses_and_resolves_paths() {
        let config = parse_config(SAMPLE, Path::new("/cfg")).unwrap();
        assert_eq!(config.algorithm, Algorithm::FtrlNoIx);
        assert_eq!(config.environment.num_arms, 3);
        assert_eq!(config.checkpoints, vec![1, 2, 4, 8, 16, 32, 64, 100]);
        assert_eq!(config.output, Some(PathBuf::from("/cfg/out/trace.csv")));
        assert_eq!(
            config.environment.delay,
            DelaySpec::FromFile {
                path: PathBuf::from("/cfg/delays.txt")
            }
        );
        assert_eq!(
            config.environment.loss,
            LossSpec::Adversarial {
                source: AdversarialSource::TwoPhase
            }
        );
        assert_eq!(
            config.no_ix.threshold,
            crate::scheduler::ThresholdRule::Custom(2.5)
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = SAMPLE.replace("arms = 3", "arms = 3\nbogus = 1");
        assert!(matches!(
            parse_config(&text, Path::new(".")),
            Err(HarnessError::Config(_))
        ));
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1-3,7").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn env_overrides() {
        let mut config = parse_config(SAMPLE, Path::new("/cfg")).unwrap();
        let vars = [
            ("BOBW_HORIZON", "50"),
            ("BOBW_SEEDS", "1-2"),
            ("BOBW_ALGORITHM", "bobw"),
            ("PATH", "/bin"),
        ]
        .map(|(k, v)| (k.to_string(), v.to_string()));
        apply_env_overrides(&mut config, vars).unwrap();
        assert_eq!(config.environment.horizon, 50);
        assert_eq!(config.checkpoints.last(), Some(&50));
        assert_eq!(config.seeds, vec![1, 2]);
        assert_eq!(config.algorithm, Algorithm::Bobw);

        let bad = [("BOBW_ARMS".to_string(), "two".to_string())];
        assert!(apply_env_overrides(&mut config, bad).is_err());
        let unknown = [("BOBW_NOPE".to_string(), "1".to_string())];
        assert!(apply_env_overrides(&mut config, unknown).is_err());
    }
}
