use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::activation::{ActivationKind, ActivationSpec};
use crate::error::{Error, Result};

/// Half-width of the interval on which rational activations are screened.
pub const DEFAULT_POLE_BOUND: f64 = 10.0;
pub const POLE_GRID: usize = 2001;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// Fully connected net; every hidden layer applies one activation shared by
/// all its nodes, and the output layer is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRationalNet {
    dims: Vec<usize>,
    /// Row-major `dims[l+1] x dims[l]`.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    activations: Vec<ActivationSpec>,
    pole_bound: f64,
}

/// Same layout as the net's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub activations: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(net: &DenseRationalNet) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            activations: net.activations.iter().map(|a| vec![0.0; a.params().len()]).collect(),
        }
    }

    /// Flattened in [`DenseRationalNet::params`] order.
    pub fn flat(&self) -> Vec<f64> {
        let layers = self.weights.iter().zip(&self.biases).flat_map(|(w, b)| w.iter().chain(b));
        layers.chain(self.activations.iter().flatten()).copied().collect()
    }
}

impl DenseRationalNet {
    /// Glorot-uniform weights, zero biases, default activation coefficients.
    pub fn new(dims: &[usize], kind: ActivationKind, seed: u64) -> Result<Self> {
        check_dims(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(dims.len() - 1);
        for pair in dims.windows(2) {
            let limit = (6.0 / (pair[0] + pair[1]) as f64).sqrt();
            weights.push((0..pair[0] * pair[1]).map(|_| rng.random_range(-limit..limit)).collect());
        }
        let biases = dims[1..].iter().map(|&n| vec![0.0; n]).collect();
        let activations = vec![ActivationSpec::initial(kind); dims.len() - 2];
        Self::from_parts(dims.to_vec(), weights, biases, activations, DEFAULT_POLE_BOUND)
    }

    pub fn from_parts(
        dims: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        activations: Vec<ActivationSpec>,
        pole_bound: f64,
    ) -> Result<Self> {
        check_dims(&dims)?;
        let layers = dims.len() - 1;
        if weights.len() != layers || biases.len() != layers || activations.len() != layers - 1 {
            return Err(Error::InvalidArgument("layer count mismatch".into()));
        }
        for (l, pair) in dims.windows(2).enumerate() {
            if weights[l].len() != pair[0] * pair[1] || biases[l].len() != pair[1] {
                return Err(Error::Layer { layer: l, message: format!("expects a {}x{} map", pair[1], pair[0]) });
            }
        }
        if !(pole_bound > 0.0 && pole_bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("pole bound {pole_bound} must be positive")));
        }
        for (l, act) in activations.iter().enumerate() {
            if !act.pole_free(pole_bound, POLE_GRID) {
                return Err(Error::Layer {
                    layer: l,
                    message: format!("activation has a near-pole on [-{pole_bound}, {pole_bound}]"),
                });
            }
        }
        Ok(Self { dims, weights, biases, activations, pole_bound })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn activations(&self) -> &[ActivationSpec] {
        &self.activations
    }

    pub(crate) fn activations_mut(&mut self) -> &mut [ActivationSpec] {
        &mut self.activations
    }

    pub fn pole_bound(&self) -> f64 {
        self.pole_bound
    }

    pub fn hidden_layers(&self) -> usize {
        self.activations.len()
    }

    pub fn weight_count(&self) -> usize {
        self.dims.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }

    /// Weights, biases and shared activation coefficients.
    pub fn trainable_param_count(&self) -> usize {
        self.weight_count() + self.activations.iter().map(|a| a.params().len()).sum::<usize>()
    }

    /// Layer weights and biases in order, then activation coefficients.
    pub fn params(&self) -> Vec<f64> {
        let layers = self.weights.iter().zip(&self.biases).flat_map(|(w, b)| w.iter().chain(b));
        layers.chain(self.activations.iter().flat_map(|a| a.params())).copied().collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.trainable_param_count() {
            return Err(Error::InvalidArgument(format!(
                "{} parameters for a net with {}",
                flat.len(),
                self.trainable_param_count()
            )));
        }
        let mut rest = flat;
        let mut take = |dst: &mut [f64]| {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        };
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            take(w);
            take(b);
        }
        for act in &mut self.activations {
            take(act.params_mut());
        }
        Ok(())
    }

    /// Offset of each hidden layer's activation coefficients in [`params`](Self::params).
    pub fn activation_offsets(&self) -> Vec<usize> {
        let mut offset = self.weight_count();
        self.activations
            .iter()
            .map(|a| {
                let here = offset;
                offset += a.params().len();
                here
            })
            .collect()
    }

    fn affine(&self, layer: usize, input: &[f64], out: &mut Vec<f64>) {
        let width = self.dims[layer];
        out.clear();
        out.extend(
            self.weights[layer]
                .chunks_exact(width)
                .zip(&self.biases[layer])
                .map(|(row, b)| row.iter().zip(input).fold(*b, |acc, (w, x)| acc + w * x)),
        );
    }

    pub fn forward_unchecked(&self, input: &[f64]) -> Vec<f64> {
        let mut h = input.to_vec();
        let mut z = Vec::new();
        for layer in 0..self.weights.len() {
            self.affine(layer, &h, &mut z);
            if let Some(act) = self.activations.get(layer) {
                z.iter_mut().for_each(|v| *v = act.value(*v));
            }
            std::mem::swap(&mut h, &mut z);
        }
        h
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.dims[0] {
            return Err(Error::InvalidArgument(format!("input width {} != {}", input.len(), self.dims[0])));
        }
        let mut h = input.to_vec();
        let mut z = Vec::new();
        for layer in 0..self.weights.len() {
            self.affine(layer, &h, &mut z);
            if let Some(act) = self.activations.get(layer) {
                z.iter_mut().for_each(|v| *v = act.value(*v));
            }
            if let Some(node) = z.iter().position(|v| !v.is_finite()) {
                return Err(Error::Layer { layer, message: format!("node {node} produced a non-finite value") });
            }
            std::mem::swap(&mut h, &mut z);
        }
        Ok(h)
    }

    /// `(1/N) sum |net(x_i) - u_i|²`
    pub fn loss_mse(&self, data: &[Sample]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::InvalidArgument("empty data".into()));
        }
        let mut total = 0.0;
        for sample in data {
            let out = self.forward(&sample.input)?;
            total += out.iter().zip(&sample.target).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
        }
        Ok(total / data.len() as f64)
    }

    /// Mean-squared loss on `batch` and its exact gradient.
    pub fn backward(&self, batch: &[Sample]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let layers = self.weights.len();
        let scale = 1.0 / batch.len() as f64;
        let mut grads = Gradients::zeros_like(self);
        let mut inputs: Vec<Vec<f64>> = vec![Vec::new(); layers + 1];
        let mut pre: Vec<Vec<f64>> = vec![Vec::new(); layers];
        let mut loss = 0.0;
        let mut delta = Vec::new();
        let mut next = Vec::new();
        for sample in batch {
            inputs[0].clone_from(&sample.input);
            for layer in 0..layers {
                let (done, rest) = inputs.split_at_mut(layer + 1);
                self.affine(layer, &done[layer], &mut pre[layer]);
                rest[0].clone_from(&pre[layer]);
                if let Some(act) = self.activations.get(layer) {
                    rest[0].iter_mut().for_each(|v| *v = act.value(*v));
                }
            }
            delta.clear();
            for (o, t) in inputs[layers].iter().zip(&sample.target) {
                loss += (o - t) * (o - t);
                delta.push(2.0 * (o - t) * scale);
            }
            for layer in (0..layers).rev() {
                if let Some(act) = self.activations.get(layer) {
                    for (d, &z) in delta.iter_mut().zip(&pre[layer]) {
                        act.accumulate_param_grad(z, *d, &mut grads.activations[layer]);
                        *d *= act.value_and_slope(z).1;
                    }
                }
                let width = self.dims[layer];
                for (i, &d) in delta.iter().enumerate() {
                    grads.biases[layer][i] += d;
                    let row = &mut grads.weights[layer][i * width..(i + 1) * width];
                    row.iter_mut().zip(&inputs[layer]).for_each(|(g, h)| *g += d * h);
                }
                if layer > 0 {
                    next.clear();
                    next.resize(width, 0.0);
                    for (row, &d) in self.weights[layer].chunks_exact(width).zip(&delta) {
                        next.iter_mut().zip(row).for_each(|(n, w)| *n += w * d);
                    }
                    std::mem::swap(&mut delta, &mut next);
                }
            }
        }
        check_finite(&grads)?;
        Ok((loss * scale, grads))
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!("architecture {dims:?} needs at least two positive widths")));
    }
    Ok(())
}

fn check_finite(grads: &Gradients) -> Result<()> {
    for (layer, (w, b)) in grads.weights.iter().zip(&grads.biases).enumerate() {
        if let Some(i) = w.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient at layer {layer} weight {i}")));
        }
        if let Some(i) = b.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient at layer {layer} bias {i}")));
        }
    }
    for (layer, a) in grads.activations.iter().enumerate() {
        if let Some(i) = a.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient at layer {layer} activation coefficient {i}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(count: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let input: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
                let target = vec![(input[0] * 3.0).sin() * input[1]];
                Sample { input, target }
            })
            .collect()
    }

    #[test]
    fn identity_rational_passes_through() {
        let identity = ActivationSpec::new(ActivationKind::Rational, vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let net = DenseRationalNet::from_parts(
            vec![2, 2, 2],
            vec![vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0]],
            vec![vec![0.0; 2], vec![0.0; 2]],
            vec![identity],
            DEFAULT_POLE_BOUND,
        )
        .unwrap();
        assert_eq!(net.forward(&[0.3, -0.8]).unwrap(), vec![0.3, -0.8]);
    }

    #[test]
    fn table_init_at_zero() {
        let net = DenseRationalNet::from_parts(
            vec![1, 1, 1],
            vec![vec![1.0], vec![1.0]],
            vec![vec![0.0], vec![0.0]],
            vec![ActivationSpec::initial(ActivationKind::Rational)],
            DEFAULT_POLE_BOUND,
        )
        .unwrap();
        assert_eq!(net.forward(&[0.0]).unwrap(), vec![0.0218]);
    }

    #[test]
    fn parameter_accounting() {
        let dims = [2, 50, 50, 50, 50, 1];
        let relu = DenseRationalNet::new(&dims, ActivationKind::Relu, 0).unwrap();
        let rational = DenseRationalNet::new(&dims, ActivationKind::Rational, 0).unwrap();
        assert_eq!(relu.trainable_param_count(), 7851);
        assert_eq!(rational.trainable_param_count(), 7851 + 7 * 4);
        assert_eq!(rational.params().len(), rational.trainable_param_count());
    }

    #[test]
    fn loss_matches_reevaluation() {
        let net = DenseRationalNet::new(&[2, 4, 3, 1], ActivationKind::Rational, 3).unwrap();
        let data = samples(10, 4);
        let oracle =
            data.iter().map(|s| (net.forward_unchecked(&s.input)[0] - s.target[0]).powi(2)).sum::<f64>() / 10.0;
        assert!((net.loss_mse(&data).unwrap() - oracle).abs() < 1e-14);
        let (loss, _) = net.backward(&data).unwrap();
        assert!((loss - oracle).abs() < 1e-14);
    }

    #[test]
    fn zero_output_on_unit_targets() {
        let mut net = DenseRationalNet::new(&[2, 3, 1], ActivationKind::Relu, 1).unwrap();
        let mut flat = net.params();
        flat.iter_mut().for_each(|p| *p = 0.0);
        net.set_params(&flat).unwrap();
        let data: Vec<Sample> = samples(5, 2).into_iter().map(|s| Sample { target: vec![1.0], ..s }).collect();
        assert_eq!(net.loss_mse(&data).unwrap(), 1.0);
    }

    #[test]
    fn params_round_trip() {
        let mut net = DenseRationalNet::new(&[2, 3, 3, 1], ActivationKind::Polynomial, 9).unwrap();
        let flat: Vec<f64> = (0..net.trainable_param_count()).map(|i| i as f64 * 0.01).collect();
        net.set_params(&flat).unwrap();
        assert_eq!(net.params(), flat);
        assert_eq!(net.activation_offsets(), vec![net.weight_count(), net.weight_count() + 4]);
    }

    #[test]
    fn mirrored_data_zero_first_layer_gradient() {
        let mut net = DenseRationalNet::new(&[1, 3, 1], ActivationKind::Rational, 5).unwrap();
        let mut flat = net.params();
        let weights = net.weight_count();
        flat[..weights].iter_mut().for_each(|p| *p = 0.0);
        net.set_params(&flat).unwrap();
        let data: Vec<Sample> = [0.2, 0.5, 0.9]
            .iter()
            .flat_map(|&x| [x, -x])
            .map(|x| Sample { input: vec![x], target: vec![0.7] })
            .collect();
        let (_, grads) = net.backward(&data).unwrap();
        assert!(grads.weights[0].iter().all(|g| *g == 0.0));
    }

    #[test]
    fn denominator_linear_coefficient_is_trainable() {
        let net = DenseRationalNet::new(&[2, 5, 5, 1], ActivationKind::Rational, 7).unwrap();
        let (_, grads) = net.backward(&samples(32, 8)).unwrap();
        for act in &grads.activations {
            assert!(act[5].abs() > 1e-8);
        }
    }
}
