use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::net::Sample;
use crate::error::{Error, Result};

/// Synthetic regression targets on normalized inputs in `[-1, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `u(x, t) = -sin(pi x/20) cos(pi t/40)` on `[-20, 20] x [0, 40]`, with
    /// `x = 20 s` and `t = 20 (r + 1)` for normalized `(s, r)`.
    Sin2d,
    Zero,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Sin2d => "sin2d",
            Target::Zero => "zero",
        }
    }

    pub fn input_dim(self) -> usize {
        2
    }

    pub fn value(self, input: &[f64]) -> f64 {
        match self {
            Target::Sin2d => {
                let (x, t) = (20.0 * input[0], 20.0 * (input[1] + 1.0));
                -(PI * x / 20.0).sin() * (PI * t / 40.0).cos()
            }
            Target::Zero => 0.0,
        }
    }

    /// `count` uniform samples, seeded.
    pub fn sample(self, count: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let input: Vec<f64> = (0..self.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let target = vec![self.value(&input)];
                Sample { input, target }
            })
            .collect()
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin2d" => Ok(Target::Sin2d),
            "zero" => Ok(Target::Zero),
            other => Err(Error::InvalidArgument(format!("unknown target {other:?}"))),
        }
    }
}

/// Seeded shuffle, then the first `train_count` samples train.
pub fn split(mut samples: Vec<Sample>, train_count: usize, seed: u64) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if train_count == 0 || train_count >= samples.len() {
        return Err(Error::InvalidArgument(format!("cannot split {} samples at {train_count}", samples.len())));
    }
    samples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let val = samples.split_off(train_count);
    Ok((samples, val))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin2d_physical_values() {
        // x = 10, t = 0: -sin(pi/2) cos(0)
        assert!((Target::Sin2d.value(&[0.5, -1.0]) + 1.0).abs() < 1e-15);
        // t = 20: cos(pi/2) = 0
        assert!(Target::Sin2d.value(&[0.3, 0.0]).abs() < 1e-15);
    }

    #[test]
    fn seeded_and_split() {
        let a = Target::Sin2d.sample(50, 3);
        assert_eq!(a, Target::Sin2d.sample(50, 3));
        assert_ne!(a, Target::Sin2d.sample(50, 4));
        let (train, val) = split(a.clone(), 30, 1).unwrap();
        assert_eq!((train.len(), val.len()), (30, 20));
        assert!(split(a, 50, 1).is_err());
    }
}
