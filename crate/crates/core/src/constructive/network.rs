use crate::error::{Error, Result};
use crate::ratfun::{pole_check, Interval, RationalFunction};

/// Grid used to screen rational activations for poles.
pub const POLE_GRID: usize = 2001;

/// Scalar activation of one node.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeActivation {
    Identity,
    Relu,
    /// `x^c`, the structural gadget activation (fixed, not trained)
    Power(u32),
    Rational(RationalFunction),
}

impl NodeActivation {
    pub fn value(&self, z: f64) -> f64 {
        match self {
            NodeActivation::Identity => z,
            NodeActivation::Relu => z.max(0.0),
            NodeActivation::Power(c) => z.powi(*c as i32),
            NodeActivation::Rational(r) => r.value(z),
        }
    }

    /// Trainable coefficients carried by the activation.
    pub fn param_count(&self) -> usize {
        match self {
            NodeActivation::Rational(r) => r.param_count(),
            _ => 0,
        }
    }
}

/// Sparse affine map `W h + b`, stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    in_dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
    bias: Vec<f64>,
}

impl Affine {
    pub fn new(in_dim: usize, rows: Vec<Vec<(usize, f64)>>, bias: Vec<f64>) -> Result<Self> {
        if rows.len() != bias.len() {
            return Err(Error::InvalidArgument(format!("{} rows but {} biases", rows.len(), bias.len())));
        }
        for row in &rows {
            if let Some(&(col, _)) = row.iter().find(|(col, _)| *col >= in_dim) {
                return Err(Error::InvalidArgument(format!("column {col} outside input width {in_dim}")));
            }
        }
        Ok(Self { in_dim, rows, bias })
    }

    /// Row-major dense weights; zeros are dropped.
    pub fn from_dense(in_dim: usize, weights: &[f64], bias: Vec<f64>) -> Result<Self> {
        if weights.len() != in_dim * bias.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for a {}x{in_dim} matrix",
                weights.len(),
                bias.len()
            )));
        }
        let rows = weights
            .chunks(in_dim.max(1))
            .take(bias.len())
            .map(|row| row.iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(j, &w)| (j, w)).collect())
            .collect();
        Self::new(in_dim, rows, bias)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.bias.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.in_dim * self.out_dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                dense[i * self.in_dim + j] += w;
            }
        }
        dense
    }

    /// Stored weights plus biases.
    pub fn param_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() + self.bias.len()
    }

    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.bias)
            .map(|(row, &b)| row.iter().fold(b, |acc, &(j, w)| acc + w * input[j]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub affine: Affine,
    pub activations: Vec<NodeActivation>,
}

/// Layered network: each layer is an affine map followed by per-node
/// activations; a final affine readout produces the outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalNetwork {
    input_dim: usize,
    layers: Vec<Layer>,
    readout: Affine,
    working_interval: Interval,
}

impl RationalNetwork {
    /// Checks dimension chaining and screens every rational activation for
    /// poles on `working_interval`.
    pub fn new(input_dim: usize, layers: Vec<Layer>, readout: Affine, working_interval: Interval) -> Result<Self> {
        let mut width = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.affine.in_dim() != width {
                return Err(Error::Layer {
                    layer: i,
                    message: format!("expects width {} but receives {width}", layer.affine.in_dim()),
                });
            }
            if layer.activations.len() != layer.affine.out_dim() {
                return Err(Error::Layer { layer: i, message: "activation count differs from node count".into() });
            }
            for (node, act) in layer.activations.iter().enumerate() {
                if let NodeActivation::Rational(r) = act {
                    if !pole_check(r, working_interval, POLE_GRID) {
                        return Err(Error::Layer {
                            layer: i,
                            message: format!(
                                "node {node} activation has a near-pole on [{}, {}]",
                                working_interval.lo(),
                                working_interval.hi()
                            ),
                        });
                    }
                }
            }
            width = layer.affine.out_dim();
        }
        if readout.in_dim() != width {
            return Err(Error::InvalidArgument(format!(
                "readout expects width {} but receives {width}",
                readout.in_dim()
            )));
        }
        Ok(Self { input_dim, layers, readout, working_interval })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.readout.out_dim()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn readout(&self) -> &Affine {
        &self.readout
    }

    pub fn working_interval(&self) -> Interval {
        self.working_interval
    }

    /// Total node count.
    pub fn size(&self) -> usize {
        self.layers.iter().map(|l| l.activations.len()).sum()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.affine.param_count()).sum::<usize>() + self.readout.param_count()
    }

    pub fn activation_param_count(&self) -> usize {
        self.layers.iter().flat_map(|l| &l.activations).map(NodeActivation::param_count).sum()
    }

    /// Unchecked forward pass.
    pub fn forward_unchecked(&self, input: &[f64]) -> Vec<f64> {
        let mut h = input.to_vec();
        for layer in &self.layers {
            h = layer.affine.apply(&h);
            for (v, act) in h.iter_mut().zip(&layer.activations) {
                *v = act.value(*v);
            }
        }
        self.readout.apply(&h)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim {
            return Err(Error::InvalidArgument(format!("input width {} != {}", input.len(), self.input_dim)));
        }
        let mut h = input.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.affine.apply(&h);
            for (node, (v, act)) in h.iter_mut().zip(&layer.activations).enumerate() {
                *v = act.value(*v);
                if !v.is_finite() {
                    return Err(Error::Layer { layer: i, message: format!("node {node} produced a non-finite value") });
                }
            }
        }
        Ok(self.readout.apply(&h))
    }

    /// Scalar-in, scalar-out convenience (first output).
    pub fn value(&self, x: f64) -> f64 {
        self.forward_unchecked(&[x])[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_and_counts() {
        let affine = Affine::from_dense(3, &[1.0, 0.0, 2.0, 0.0, -1.0, 0.5], vec![0.1, 0.2]).unwrap();
        assert_eq!(affine.to_dense(), vec![1.0, 0.0, 2.0, 0.0, -1.0, 0.5]);
        assert_eq!(affine.param_count(), 6);
        let out = affine.apply(&[1.0, 2.0, 3.0]);
        assert!((out[0] - 7.1).abs() < 1e-15 && (out[1] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_chaining_and_poles() {
        let layer = |in_dim| Layer {
            affine: Affine::from_dense(in_dim, &vec![1.0; in_dim], vec![0.0]).unwrap(),
            activations: vec![NodeActivation::Identity],
        };
        let readout = Affine::from_dense(1, &[1.0], vec![0.0]).unwrap();
        assert!(RationalNetwork::new(2, vec![layer(1)], readout.clone(), Interval::symmetric()).is_err());
        let net = RationalNetwork::new(1, vec![layer(1), layer(1)], readout.clone(), Interval::symmetric()).unwrap();
        assert_eq!((net.size(), net.depth()), (2, 2));
        assert_eq!(net.forward(&[0.25]).unwrap(), vec![0.25]);

        let pole = RationalFunction::new(vec![1.0], vec![0.0, 1.0]).unwrap();
        let bad = Layer { activations: vec![NodeActivation::Rational(pole)], ..layer(1) };
        assert!(matches!(
            RationalNetwork::new(1, vec![bad], readout, Interval::symmetric()),
            Err(Error::Layer { layer: 0, .. })
        ));
    }
}
