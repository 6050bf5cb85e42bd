use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::builder::{Linear, NetBuilder};
use super::gadgets::network_approximant;
use super::network::{Affine, Layer, NodeActivation, RationalNetwork};
use crate::error::{Error, Result};
use crate::ratfun::Interval;

const NORM_SLACK: f64 = 1e-12;

/// Per-layer tolerance split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ToleranceSchedule {
    /// `eps / M` for each of the `M` layers.
    #[default]
    Flat,
    /// `eps L^{j-M-1} / (M+1)`, which for ReLU (`L = 1`) is `eps / (M+1)`.
    Geometric,
}

impl ToleranceSchedule {
    pub fn tolerances(self, epsilon: f64, layers: usize) -> Vec<f64> {
        let share = match self {
            ToleranceSchedule::Flat => epsilon / layers as f64,
            ToleranceSchedule::Geometric => epsilon / (layers as f64 + 1.0),
        };
        vec![share; layers]
    }
}

/// Result of replacing every ReLU by its rational approximant.
#[derive(Debug, Clone)]
pub struct Conversion {
    pub network: RationalNetwork,
    pub tolerances: Vec<f64>,
    pub stages_per_layer: Vec<usize>,
    pub activation_count: usize,
    pub original_param_count: usize,
}

impl Conversion {
    /// Original weights and biases plus every rational stage's coefficients.
    pub fn trainable_param_count(&self) -> usize {
        self.original_param_count + self.network.activation_param_count()
    }
}

fn check_hypothesis(f: &RationalNetwork) -> Result<()> {
    let mut offending = Vec::new();
    for (i, layer) in f.layers().iter().enumerate() {
        for (node, act) in layer.activations.iter().enumerate() {
            if *act != NodeActivation::Relu {
                return Err(Error::Precondition(format!("layer {i} node {node} is not a ReLU")));
            }
            let norm: f64 =
                layer.affine.rows()[node].iter().map(|(_, w)| w.abs()).sum::<f64>() + layer.affine.bias()[node].abs();
            if norm > 1.0 + NORM_SLACK {
                offending.push(format!("layer {i} node {node} (norm {norm})"));
            }
        }
    }
    for (row, weights) in f.readout().rows().iter().enumerate() {
        let norm: f64 = weights.iter().map(|(_, w)| w.abs()).sum();
        if norm > 1.0 + NORM_SLACK {
            offending.push(format!("readout row {row} (norm {norm})"));
        }
    }
    if offending.is_empty() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("weight norm above 1 at {}", offending.join(", "))))
    }
}

/// Replaces every ReLU of `f` with the rational approximant for its layer's
/// tolerance. Requires `|a|_1 + |b| <= 1` per hidden node and `|a|_1 <= 1`
/// per readout row; inputs live in `[-1, 1]^d`.
pub fn ratify_relu_network(f: &RationalNetwork, epsilon: f64, schedule: ToleranceSchedule) -> Result<Conversion> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {epsilon} not in (0, 1)")));
    }
    if f.depth() == 0 {
        return Err(Error::InvalidArgument("network has no hidden layer".into()));
    }
    check_hypothesis(f)?;
    let tolerances = schedule.tolerances(epsilon, f.depth());
    let mut builder = NetBuilder::new(f.input_dim());
    let mut hidden: Vec<Linear> = (0..f.input_dim()).map(Linear::input).collect();
    let mut stages_per_layer = Vec::with_capacity(f.depth());
    for (layer, &tol) in f.layers().iter().zip(&tolerances) {
        let approx = network_approximant(tol)?;
        stages_per_layer.push(approx.stage_count());
        hidden = affine_form(&layer.affine, &hidden).into_iter().map(|z| builder.relu_approx(z, &approx)).collect();
    }
    let outputs = affine_form(f.readout(), &hidden);
    Ok(Conversion {
        network: builder.compile(&outputs, Interval::symmetric())?,
        tolerances,
        stages_per_layer,
        activation_count: f.size(),
        original_param_count: f.weight_count(),
    })
}

fn affine_form(affine: &Affine, inputs: &[Linear]) -> Vec<Linear> {
    affine
        .rows()
        .iter()
        .zip(affine.bias())
        .map(|(row, &b)| row.iter().fold(Linear::constant(b), |acc, &(j, w)| acc + inputs[j].clone() * w))
        .collect()
}

/// Dense ReLU network with hidden `widths` and one output, each hidden row
/// scaled to `|a|_1 + |b| <= 1` and the readout to `|a|_1 <= 1`.
pub fn random_relu_network(input_dim: usize, widths: &[usize], seed: u64) -> Result<RationalNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row = |rng: &mut ChaCha8Rng, width: usize, with_bias: bool| {
        let raw: Vec<f64> = (0..=width).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bias = if with_bias { raw[width] } else { 0.0 };
        let norm = raw[..width].iter().map(|w: &f64| w.abs()).sum::<f64>() + bias.abs();
        let scale = rng.random_range(0.7..1.0) / norm.max(f64::MIN_POSITIVE);
        (raw[..width].iter().map(|w| w * scale).collect::<Vec<f64>>(), bias * scale)
    };
    let mut layers = Vec::with_capacity(widths.len());
    let mut width = input_dim;
    for &next in widths {
        let (mut weights, mut bias) = (Vec::with_capacity(next * width), Vec::with_capacity(next));
        for _ in 0..next {
            let (w, b) = row(&mut rng, width, true);
            weights.extend(w);
            bias.push(b);
        }
        layers.push(Layer {
            affine: Affine::from_dense(width, &weights, bias)?,
            activations: vec![NodeActivation::Relu; next],
        });
        width = next;
    }
    let (w, b) = row(&mut rng, width, false);
    RationalNetwork::new(input_dim, layers, Affine::from_dense(width, &w, vec![b])?, Interval::symmetric())
}
