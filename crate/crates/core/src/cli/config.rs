use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{Target, TrainConfig};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "RATNET_SEED";

/// Settings for `train-compare`, read from `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub target: Target,
    pub architecture: Vec<usize>,
    pub train_count: usize,
    pub val_count: usize,
    pub pole_bound: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            target: Target::Sin2d,
            architecture: vec![2, 50, 50, 50, 50, 1],
            train_count: 1000,
            val_count: 1000,
            pole_bound: crate::nn::DEFAULT_POLE_BOUND,
        }
    }
}

fn value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Parse { line, message: format!("bad value {raw:?} for {key}") })
}

impl ExperimentConfig {
    /// Unknown keys are rejected; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (index, raw_line) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, raw) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Parse { line, message: format!("expected key=value, got {content:?}") })?;
            match key {
                "seed" => config.train.seed = value(line, key, raw)?,
                "epochs" => config.train.epochs = value(line, key, raw)?,
                "batch_size" => config.train.batch_size = value(line, key, raw)?,
                "lr" | "learning_rate" => config.train.learning_rate = value(line, key, raw)?,
                "target" => {
                    config.target = raw.parse().map_err(|e: Error| Error::Parse { line, message: e.to_string() })?
                }
                "architecture" => {
                    config.architecture = raw
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(|s| value(line, key, s))
                        .collect::<Result<_>>()?
                }
                "train_count" => config.train_count = value(line, key, raw)?,
                "val_count" => config.val_count = value(line, key, raw)?,
                "pole_bound" => config.pole_bound = value(line, key, raw)?,
                other => return Err(Error::Parse { line, message: format!("unknown key {other:?}") }),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        let dims = &self.architecture;
        if dims.len() < 3 || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "architecture {dims:?} needs a hidden layer and positive widths"
            )));
        }
        if dims[0] != self.target.input_dim() || dims[dims.len() - 1] != 1 {
            return Err(Error::InvalidArgument(format!(
                "architecture {dims:?} must map {} inputs to 1 output",
                self.target.input_dim()
            )));
        }
        if self.train_count == 0 || self.val_count == 0 {
            return Err(Error::InvalidArgument("train and validation counts must be positive".into()));
        }
        Ok(())
    }

    /// Applies an override such as the value of [`SEED_ENV`].
    pub fn with_seed_override(mut self, raw: Option<&str>) -> Result<Self> {
        if let Some(raw) = raw {
            self.train.seed = raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}={raw:?} is not an unsigned integer")))?;
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let text = "# comparison\nseed = 4\nepochs=20  # short\nbatch_size = 10\nlr = 0.01\ntarget = sin2d\narchitecture = 2, 8, 8, 1\n\n";
        let config = ExperimentConfig::parse(text).unwrap();
        assert_eq!(config.train.seed, 4);
        assert_eq!(config.train.epochs, 20);
        assert_eq!(config.train.learning_rate, 0.01);
        assert_eq!(config.architecture, vec![2, 8, 8, 1]);
        assert_eq!(config.train_count, 1000);
    }

    #[test]
    fn reports_line_numbers() {
        assert_eq!(
            ExperimentConfig::parse("seed = 1\nepochs = many\n"),
            Err(Error::Parse { line: 2, message: "bad value \"many\" for epochs".into() })
        );
        assert!(matches!(ExperimentConfig::parse("colour = red"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ExperimentConfig::parse("seed 3"), Err(Error::Parse { line: 1, .. })));
        assert!(ExperimentConfig::parse("architecture = 3, 5, 1").is_err());
    }

    #[test]
    fn seed_override() {
        let config = ExperimentConfig::default().with_seed_override(Some(" 17 ")).unwrap();
        assert_eq!(config.train.seed, 17);
        assert!(ExperimentConfig::default().with_seed_override(Some("x")).is_err());
        assert_eq!(ExperimentConfig::default().with_seed_override(None).unwrap().train.seed, 0);
    }
}
