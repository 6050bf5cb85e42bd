use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::net::{DenseRationalNet, Sample, POLE_GRID};
use crate::error::{Error, Result};

/// Training loss above which a run counts as diverged.
pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { seed: 0, epochs: 500, batch_size: 100, learning_rate: 1e-3 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate {} must be positive", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

/// Per-epoch losses; epoch 0 is the untrained net.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub records: Vec<EpochRecord>,
    /// Optimizer steps whose denominator update was undone to keep the
    /// activation pole-free.
    pub rollbacks: usize,
}

impl History {
    pub fn final_val(&self) -> Option<f64> {
        self.records.last().map(|r| r.val_mse)
    }

    /// `epoch,train_mse,val_mse` with round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_mse,val_mse\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", r.epoch, r.train_mse, r.val_mse);
        }
        out
    }

    /// Standard deviation of successive differences of `ln(val_mse)` over the
    /// last `window` epochs.
    pub fn val_oscillation(&self, window: usize) -> f64 {
        let start = self.records.len().saturating_sub(window);
        let diffs: Vec<f64> = self.records[start..].windows(2).map(|w| (w[1].val_mse / w[0].val_mse).ln()).collect();
        if diffs.len() < 2 {
            return 0.0;
        }
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64).sqrt()
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: i32,
}

impl Adam {
    pub fn new(len: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first: vec![0.0; len],
            second: vec![0.0; len],
            steps: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.steps += 1;
        let fix1 = 1.0 - self.beta1.powi(self.steps);
        let fix2 = 1.0 - self.beta2.powi(self.steps);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.first).zip(&mut self.second) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.learning_rate * (*m / fix1) / ((*v / fix2).sqrt() + self.epsilon);
        }
    }
}

fn record(net: &DenseRationalNet, epoch: usize, train: &[Sample], val: &[Sample]) -> Result<EpochRecord> {
    Ok(EpochRecord { epoch, train_mse: net.loss_mse(train)?, val_mse: net.loss_mse(val)? })
}

/// Mini-batch Adam on the mean-squared loss. Batches are reshuffled every
/// epoch from one seeded stream; a step that brings a rational denominator
/// near zero on the pole bound has its denominator part undone.
pub fn train(
    mut net: DenseRationalNet,
    train: &[Sample],
    val: &[Sample],
    config: &TrainConfig,
) -> Result<(DenseRationalNet, History)> {
    config.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::InvalidArgument("training and validation sets must be nonempty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(net.trainable_param_count(), config.learning_rate);
    let mut history = History { records: vec![record(&net, 0, train, val)?], rollbacks: 0 };
    let offsets = net.activation_offsets();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batch: Vec<Sample> = Vec::with_capacity(config.batch_size);
    let mut params = net.params();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train[i].clone()));
            let (_, grads) = net.backward(&batch)?;
            let before = params.clone();
            adam.step(&mut params, &grads.flat());
            net.set_params(&params)?;
            let bound = net.pole_bound();
            for (layer, &offset) in offsets.iter().enumerate() {
                if !net.activations()[layer].pole_free(bound, POLE_GRID) {
                    // denominator sits after the 4 numerator coefficients
                    let denom = offset + 4..offset + 7;
                    params[denom.clone()].copy_from_slice(&before[denom.clone()]);
                    net.activations_mut()[layer].params_mut()[4..].copy_from_slice(&before[denom]);
                    history.rollbacks += 1;
                }
            }
        }
        let rec = record(&net, epoch, train, val);
        let diverged = match &rec {
            Ok(r) => r.train_mse.is_nan() || r.train_mse > DIVERGENCE_LOSS,
            Err(Error::Layer { .. }) => true,
            Err(_) => false,
        };
        if diverged {
            let loss = rec.as_ref().map(|r| r.train_mse).unwrap_or(f64::INFINITY);
            return Err(Error::Divergence {
                epoch,
                loss,
                history: history.records.iter().map(|r| (r.train_mse, r.val_mse)).collect(),
            });
        }
        history.records.push(rec?);
    }
    Ok((net, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ActivationKind, Target};

    #[test]
    fn adam_minimizes_quadratic() {
        let mut adam = Adam::new(2, 0.1);
        let mut p = vec![3.0, -2.0];
        for _ in 0..500 {
            let g = vec![2.0 * p[0], 2.0 * p[1]];
            adam.step(&mut p, &g);
        }
        assert!(p.iter().all(|v| v.abs() < 1e-2), "{p:?}");
    }

    #[test]
    fn zero_target_with_zero_readout_is_fixed() {
        let mut net = DenseRationalNet::new(&[2, 4, 1], ActivationKind::Rational, 0).unwrap();
        let mut flat = net.params();
        // output layer weights and bias
        let readout = 2 * 4 + 4..2 * 4 + 4 + 4 + 1;
        flat[readout].iter_mut().for_each(|p| *p = 0.0);
        net.set_params(&flat).unwrap();
        let data = Target::Zero.sample(40, 1);
        let config = TrainConfig { epochs: 3, batch_size: 10, ..TrainConfig::default() };
        let (trained, history) = train(net.clone(), &data[..20], &data[20..], &config).unwrap();
        assert_eq!(history.records[0].val_mse, 0.0);
        assert!(history.records.iter().all(|r| r.train_mse == 0.0));
        assert_eq!(trained, net);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let data = Target::Sin2d.sample(60, 2);
        let config = TrainConfig { epochs: 4, batch_size: 16, ..TrainConfig::default() };
        let run = || {
            let net = DenseRationalNet::new(&[2, 6, 6, 1], ActivationKind::Rational, 1).unwrap();
            train(net, &data[..40], &data[40..], &config).unwrap().1.to_csv()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn loss_decreases() {
        let data = Target::Sin2d.sample(200, 5);
        let config = TrainConfig { epochs: 30, batch_size: 20, learning_rate: 1e-2, ..TrainConfig::default() };
        let net = DenseRationalNet::new(&[2, 10, 10, 1], ActivationKind::Rational, 3).unwrap();
        let (trained, history) = train(net, &data[..150], &data[150..], &config).unwrap();
        assert!(history.final_val().unwrap() < 0.5 * history.records[0].val_mse);
        assert!(trained.activations().iter().all(|a| a.pole_free(10.0, POLE_GRID)));
    }
}
