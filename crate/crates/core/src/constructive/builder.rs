use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use super::network::{Affine, Layer, NodeActivation, RationalNetwork};
use crate::error::{Error, Result};
use crate::ratfun::Interval;
use crate::zolotarev::ReluApproximant;

/// A network input or a node created by a [`NetBuilder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signal {
    Input(usize),
    Node(usize),
}

/// Affine combination of signals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Linear {
    terms: Vec<(Signal, f64)>,
    constant: f64,
}

impl Linear {
    pub fn constant(value: f64) -> Self {
        Self { terms: Vec::new(), constant: value }
    }

    pub fn input(index: usize) -> Self {
        Signal::Input(index).into()
    }

    pub fn terms(&self) -> &[(Signal, f64)] {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    fn merged(mut self) -> Self {
        self.terms.sort_by_key(|(s, _)| *s);
        let mut merged: Vec<(Signal, f64)> = Vec::with_capacity(self.terms.len());
        for (s, w) in self.terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == s => *acc += w,
                _ => merged.push((s, w)),
            }
        }
        merged.retain(|(_, w)| *w != 0.0);
        Self { terms: merged, constant: self.constant }
    }
}

impl From<Signal> for Linear {
    fn from(signal: Signal) -> Self {
        Self { terms: vec![(signal, 1.0)], constant: 0.0 }
    }
}

impl Add for Linear {
    type Output = Linear;

    fn add(mut self, rhs: Linear) -> Linear {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
        self.merged()
    }
}

impl Add<f64> for Linear {
    type Output = Linear;

    fn add(mut self, rhs: f64) -> Linear {
        self.constant += rhs;
        self
    }
}

impl Mul<f64> for Linear {
    type Output = Linear;

    fn mul(mut self, rhs: f64) -> Linear {
        self.terms.iter_mut().for_each(|(_, w)| *w *= rhs);
        self.constant *= rhs;
        self.merged()
    }
}

impl Neg for Linear {
    type Output = Linear;

    fn neg(self) -> Linear {
        self * -1.0
    }
}

impl Sub for Linear {
    type Output = Linear;

    fn sub(self, rhs: Linear) -> Linear {
        self + (-rhs)
    }
}

#[derive(Debug, Clone)]
struct NodeDef {
    layer: usize,
    input: Linear,
    activation: NodeActivation,
}

/// Builds a network as a DAG of scalar nodes, then layers it. A node sits one
/// layer above its deepest input; signals that skip layers are carried
/// through identity nodes, which count towards the size.
#[derive(Debug, Clone)]
pub struct NetBuilder {
    input_dim: usize,
    nodes: Vec<NodeDef>,
}

impl NetBuilder {
    pub fn new(input_dim: usize) -> Self {
        Self { input_dim, nodes: Vec::new() }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn layer_of(&self, signal: Signal) -> usize {
        match signal {
            Signal::Input(_) => 0,
            Signal::Node(i) => self.nodes[i].layer,
        }
    }

    fn depth_of(&self, lin: &Linear) -> usize {
        lin.terms.iter().map(|(s, _)| self.layer_of(*s)).max().unwrap_or(0)
    }

    pub fn act(&mut self, input: Linear, activation: NodeActivation) -> Signal {
        self.act_at(input, activation, 0)
    }

    /// Like [`act`](Self::act) but no lower than `min_layer`.
    pub fn act_at(&mut self, input: Linear, activation: NodeActivation, min_layer: usize) -> Signal {
        let layer = (self.depth_of(&input) + 1).max(min_layer);
        self.nodes.push(NodeDef { layer, input, activation });
        Signal::Node(self.nodes.len() - 1)
    }

    /// Collapses a multi-term form into one identity node, so later carries
    /// move a single signal.
    pub fn materialize(&mut self, lin: Linear) -> Linear {
        if lin.terms.len() <= 1 {
            return lin;
        }
        let constant = lin.constant;
        let node = self.act(Linear { constant: 0.0, ..lin }, NodeActivation::Identity);
        Linear::from(node) + constant
    }

    /// `u v` from three squares at one layer: `(u² + v² - (u-v)²)/2`.
    pub fn multiply(&mut self, u: Linear, v: Linear) -> Linear {
        let layer = self.depth_of(&u).max(self.depth_of(&v)) + 1;
        let sq = NodeActivation::Power(2);
        let uu = self.act_at(u.clone(), sq.clone(), layer);
        let vv = self.act_at(v.clone(), sq.clone(), layer);
        let diff = self.act_at(u - v, sq, layer);
        (Linear::from(uu) + Linear::from(vv) - Linear::from(diff)) * 0.5
    }

    /// `a p²` from three cubes: `((p+a)³ - (p-a)³ - 2a³)/6`.
    pub fn multiply_square(&mut self, a: Linear, p: Linear) -> Linear {
        let layer = self.depth_of(&a).max(self.depth_of(&p)) + 1;
        let cube = NodeActivation::Power(3);
        let plus = self.act_at(p.clone() + a.clone(), cube.clone(), layer);
        let minus = self.act_at(p - a.clone(), cube.clone(), layer);
        let odd = self.act_at(a, cube, layer);
        (Linear::from(plus) - Linear::from(minus) - Linear::from(odd) * 2.0) * (1.0 / 6.0)
    }

    /// `a p^c` from `c+2` nodes `(p + t a)^{c+1}`, `t = 0..=c+1`, weighted to
    /// keep only the term linear in `a`.
    pub fn multiply_power(&mut self, a: Linear, p: Linear, c: u32) -> Result<Linear> {
        let count = c as usize + 2;
        let system = DMatrix::from_fn(count, count, |k, i| (i as f64).powi(k as i32));
        let mut rhs = DVector::zeros(count);
        rhs[1] = 1.0 / (c as f64 + 1.0);
        let weights = system.lu().solve(&rhs).ok_or_else(|| Error::Numeric("singular polarization system".into()))?;
        let layer = self.depth_of(&a).max(self.depth_of(&p)) + 1;
        let mut out = Linear::constant(0.0);
        for (i, w) in weights.iter().enumerate() {
            let node = self.act_at(p.clone() + a.clone() * i as f64, NodeActivation::Power(c + 1), layer);
            out = out + Linear::from(node) * *w;
        }
        Ok(out)
    }

    /// `x^n` for the linear form `x` using power nodes of degree at most `radix`.
    ///
    /// A divisor `c <= radix` gives `(x^{n/c})^c`. With cubes available,
    /// `n = 3a + 1` becomes `(x^a)² x^{a+1}` via [`multiply_square`](Self::multiply_square).
    /// Otherwise `n` is split into `⌊n/2⌋ + ⌈n/2⌉` for [`multiply`](Self::multiply).
    /// Near-equal factors keep every cube or square in a gadget within a
    /// factor `|x|` of the product, so the relative error stays near
    /// `eps / |x|`; a lopsided `x^a x^b` would lose `|x|^{a-b}`.
    pub fn monomial(&mut self, x: Linear, n: u32, radix: u32) -> Linear {
        assert!(radix >= 2, "radix {radix} below 2");
        let mut memo = HashMap::new();
        self.power_of(&x, n, radix, &mut memo)
    }

    fn power_of(&mut self, x: &Linear, n: u32, radix: u32, memo: &mut HashMap<u32, Linear>) -> Linear {
        match n {
            0 => return Linear::constant(1.0),
            1 => return x.clone(),
            _ => {}
        }
        if let Some(done) = memo.get(&n) {
            return done.clone();
        }
        let out = if n <= radix {
            Linear::from(self.act(x.clone(), NodeActivation::Power(n)))
        } else if let Some(c) = (2..=radix).rev().find(|&c| n.is_multiple_of(c)) {
            let base = self.power_of(x, n / c, radix, memo);
            Linear::from(self.act(base, NodeActivation::Power(c)))
        } else if radix >= 3 && n % 3 == 1 {
            let base = self.power_of(x, n / 3, radix, memo);
            let next = self.power_of(x, n / 3 + 1, radix, memo);
            self.multiply_square(next, base)
        } else {
            let low = self.power_of(x, n / 2, radix, memo);
            let high = self.power_of(x, n - n / 2, radix, memo);
            self.multiply(low, high)
        };
        memo.insert(n, out.clone());
        out
    }

    /// `½(z r(z)/(1+eps) + z)` with `r` the composed sign stages.
    pub fn relu_approx(&mut self, z: Linear, approx: &ReluApproximant) -> Linear {
        let z = self.materialize(z);
        let mut sign = z.clone();
        for stage in approx.sign().stages() {
            sign = Linear::from(self.act(sign, NodeActivation::Rational(stage.clone())));
        }
        let product = self.multiply(z.clone(), sign);
        product * (0.5 / (1.0 + approx.epsilon())) + z * 0.5
    }

    /// Layers the DAG; outputs are read from the deepest layer.
    pub fn compile(mut self, outputs: &[Linear], working_interval: Interval) -> Result<RationalNetwork> {
        let mut carries: HashMap<(Signal, usize), Signal> = HashMap::new();
        let original = self.nodes.len();
        for i in 0..original {
            let target = self.nodes[i].layer - 1;
            let input = self.nodes[i].input.clone();
            self.nodes[i].input = self.carry_form(input, target, &mut carries);
        }
        let depth = self.nodes.iter().map(|n| n.layer).max().unwrap_or(0);
        let outputs: Vec<Linear> = outputs.iter().map(|o| self.carry_form(o.clone(), depth, &mut carries)).collect();

        let mut position = vec![0usize; self.nodes.len()];
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); depth + 1];
        for (i, node) in self.nodes.iter().enumerate() {
            position[i] = members[node.layer].len();
            members[node.layer].push(i);
        }
        let column = |signal: Signal| match signal {
            Signal::Input(i) => i,
            Signal::Node(j) => position[j],
        };
        let mut width = self.input_dim;
        let mut layers = Vec::with_capacity(depth);
        for ids in members.iter().skip(1) {
            let rows =
                ids.iter().map(|&i| self.nodes[i].input.terms.iter().map(|&(s, w)| (column(s), w)).collect()).collect();
            let bias = ids.iter().map(|&i| self.nodes[i].input.constant).collect();
            let activations = ids.iter().map(|&i| self.nodes[i].activation.clone()).collect();
            layers.push(Layer { affine: Affine::new(width, rows, bias)?, activations });
            width = ids.len();
        }
        let rows = outputs.iter().map(|o| o.terms.iter().map(|&(s, w)| (column(s), w)).collect()).collect();
        let bias = outputs.iter().map(|o| o.constant).collect();
        RationalNetwork::new(self.input_dim, layers, Affine::new(width, rows, bias)?, working_interval)
    }

    fn carry_form(&mut self, lin: Linear, layer: usize, carries: &mut HashMap<(Signal, usize), Signal>) -> Linear {
        let terms = lin.terms.iter().map(|&(s, w)| (self.carry(s, layer, carries), w)).collect();
        Linear { terms, constant: lin.constant }
    }

    fn carry(&mut self, signal: Signal, layer: usize, carries: &mut HashMap<(Signal, usize), Signal>) -> Signal {
        let own = self.layer_of(signal);
        if own >= layer {
            return signal;
        }
        if let Some(&done) = carries.get(&(signal, layer)) {
            return done;
        }
        let below = self.carry(signal, layer - 1, carries);
        self.nodes.push(NodeDef { layer, input: below.into(), activation: NodeActivation::Identity });
        let node = Signal::Node(self.nodes.len() - 1);
        carries.insert((signal, layer), node);
        node
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_algebra_merges_terms() {
        let x = Linear::input(0);
        let y = Linear::input(1);
        let form = (x.clone() + y.clone()) * 2.0 - x + 3.0;
        assert_eq!(form.terms(), &[(Signal::Input(0), 1.0), (Signal::Input(1), 2.0)]);
        assert_eq!(form.constant_term(), 3.0);
        assert!((y.clone() - y).terms().is_empty());
    }

    #[test]
    fn carries_fill_skipped_layers() {
        let mut b = NetBuilder::new(1);
        let x = Linear::input(0);
        let sq = b.act(x.clone(), NodeActivation::Power(2));
        let quad = b.act(sq.into(), NodeActivation::Power(2));
        let net = b.compile(&[Linear::from(quad) + x], Interval::symmetric()).unwrap();
        // x carried through layers 1 and 2
        assert_eq!((net.depth(), net.size()), (2, 4));
        assert_eq!(net.value(1.5), 1.5f64.powi(4) + 1.5);
    }

    #[test]
    fn polarization_weights_isolate_linear_term() {
        for c in 1..=4 {
            let mut b = NetBuilder::new(2);
            let out = b.multiply_power(Linear::input(0), Linear::input(1), c).unwrap();
            let net = b.compile(&[out], Interval::symmetric()).unwrap();
            let got = net.forward(&[0.7, -1.3]).unwrap()[0];
            let want = 0.7 * (-1.3f64).powi(c as i32);
            assert!((got - want).abs() < 1e-12, "c {c}: {got} vs {want}");
        }
    }

    #[test]
    fn constant_network_has_no_nodes() {
        let net = NetBuilder::new(1).compile(&[Linear::constant(0.4)], Interval::symmetric()).unwrap();
        assert_eq!((net.size(), net.value(0.3)), (0, 0.4));
    }
}
