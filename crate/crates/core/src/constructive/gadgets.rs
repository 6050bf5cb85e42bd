use super::builder::{Linear, NetBuilder};
use super::network::{NodeActivation, RationalNetwork};
use crate::error::{Error, Result};
use crate::ratfun::Interval;
use crate::zolotarev::{relu_approximant, relu_gap, stage_count_for, ReluApproximant};

/// Deepest composition whose stages pass the pole screen on [-1, 1]. At four
/// stages the first denominator `x² + c_1` has `c_1` near 1e-11.
pub const NETWORK_MAX_STAGES: usize = 3;

/// Smallest ReLU tolerance usable inside a network.
pub fn min_network_epsilon() -> f64 {
    let exponent = 0.5 * (NETWORK_MAX_STAGES as f64 * 3f64.ln() - (2.0 / (std::f64::consts::PI).powi(2)).ln());
    4.0 / exponent.exp().exp()
}

/// [`relu_approximant`] restricted to stage counts whose activations pass the
/// network pole screen.
pub fn network_approximant(epsilon: f64) -> Result<ReluApproximant> {
    let stages = stage_count_for(epsilon);
    if stages > NETWORK_MAX_STAGES {
        return Err(Error::Range(format!(
            "tolerance {epsilon:e} needs {stages} stages (gap {:e}); network activations are screened for poles, which limits tolerances to {:e} and above",
            relu_gap(stages),
            min_network_epsilon()
        )));
    }
    relu_approximant(epsilon)
}

/// `(x, y) ↦ xy` with three square nodes in one layer.
pub fn product_gadget() -> RationalNetwork {
    let mut builder = NetBuilder::new(2);
    let out = builder.multiply(Linear::input(0), Linear::input(1));
    builder.compile(&[out], Interval::symmetric()).expect("square nodes have no poles")
}

/// `5 floor(log_r n)^2 + 1`
pub fn monomial_size_bound(n: u32, radix: u32) -> usize {
    let mut log = 0usize;
    let mut rest = n / radix.max(2);
    while rest > 0 {
        log += 1;
        rest /= radix.max(2);
    }
    5 * log * log + 1
}

/// `x ↦ x^n` exactly, with power nodes of degree at most `radix`.
pub fn monomial_network(n: u32, radix: u32) -> Result<RationalNetwork> {
    if n == 0 {
        return Err(Error::InvalidArgument("exponent must be positive".into()));
    }
    if radix < 2 {
        return Err(Error::InvalidArgument(format!("radix {radix} below 2")));
    }
    let mut builder = NetBuilder::new(1);
    let mut out = builder.monomial(Linear::input(0), n, radix);
    if n == 1 {
        out = builder.act(out, NodeActivation::Identity).into();
    }
    builder.compile(&[out], Interval::symmetric())
}

/// Scalar network for the ReLU approximant at tolerance `epsilon`.
pub fn relu_approx_network(epsilon: f64) -> Result<RationalNetwork> {
    let approx = network_approximant(epsilon)?;
    let mut builder = NetBuilder::new(1);
    let out = builder.relu_approx(Linear::input(0), &approx);
    builder.compile(&[out], Interval::symmetric())
}
