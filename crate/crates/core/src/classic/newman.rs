use crate::error::{Error, Result};

pub const MAX_NEWMAN: usize = 400;

/// Newman's rational approximant to |x| with nodes `xi^i`, `xi = exp(-1/sqrt(N))`,
/// and the ReLU approximant `(r_abs(x) + x)/2` built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Newman {
    n: usize,
    nodes: Vec<f64>,
}

impl Newman {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!("Newman order {n} below 4")));
        }
        if n > MAX_NEWMAN {
            return Err(Error::Range(format!("Newman order {n} above {MAX_NEWMAN}")));
        }
        let xi = (-1.0 / (n as f64).sqrt()).exp();
        Ok(Self { n, nodes: (0..n).map(|i| xi.powi(i as i32)).collect() })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Coefficients of a degree-`N` rational: `2(N+1)`.
    pub fn param_count(&self) -> usize {
        2 * (self.n + 1)
    }

    /// `x (p(x) - p(-x)) / (p(x) + p(-x))`, via the ratio `p(-x)/p(x)` so the
    /// tiny node products never underflow.
    pub fn abs_value(&self, x: f64) -> f64 {
        let ratio: f64 = self.nodes.iter().map(|&node| (node - x) / (node + x)).product();
        if ratio.is_finite() {
            x * (1.0 - ratio) / (1.0 + ratio)
        } else {
            // x = -node: p(x) vanishes
            -x
        }
    }

    pub fn relu_value(&self, x: f64) -> f64 {
        0.5 * (self.abs_value(x) + x)
    }
}

pub fn newman_relu(n: usize) -> Result<Newman> {
    Newman::new(n)
}
