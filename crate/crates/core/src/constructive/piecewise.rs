use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::builder::{Linear, NetBuilder};
use super::gadgets::network_approximant;
use super::network::RationalNetwork;
use crate::error::{Error, Result};
use crate::ratfun::{relu, Interval};
use crate::zolotarev::ReluApproximant;

const SLOPE_SLACK: f64 = 1e-12;

/// Continuous piecewise-linear `g` on [0, 1] in hinge form
/// `c_0 relu(b_1 - x) + sum_j c_j relu(x - b_j) + c_{m+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    breakpoints: Vec<f64>,
    coeffs: Vec<f64>,
    lipschitz: f64,
}

impl PiecewiseLinear {
    /// `coeffs` holds `c_0..=c_{m+1}`. Rejects unsorted breakpoints or a
    /// slope steeper than `lipschitz`.
    pub fn new(breakpoints: Vec<f64>, coeffs: Vec<f64>, lipschitz: f64) -> Result<Self> {
        let m = breakpoints.len();
        if m == 0 {
            return Err(Error::InvalidArgument("need at least one breakpoint".into()));
        }
        if coeffs.len() != m + 2 {
            return Err(Error::InvalidArgument(format!(
                "{m} breakpoints need {} coefficients, got {}",
                m + 2,
                coeffs.len()
            )));
        }
        if breakpoints.iter().any(|b| !(0.0..=1.0).contains(b)) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("breakpoints must increase strictly inside [0, 1]".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient or Lipschitz constant".into()));
        }
        let g = Self { breakpoints, coeffs, lipschitz };
        let steepest = g.slopes().into_iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if steepest > lipschitz * (1.0 + SLOPE_SLACK) {
            return Err(Error::InvalidArgument(format!("slope {steepest} exceeds Lipschitz constant {lipschitz}")));
        }
        Ok(g)
    }

    /// Interpolates knots `(x, y)`; the first and last `x` must be 0 and 1,
    /// interior knots become breakpoints.
    pub fn from_knots(knots: &[(f64, f64)], lipschitz: f64) -> Result<Self> {
        if knots.len() < 3 || knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return Err(Error::InvalidArgument("knots must run from 0 to 1 with an interior knot".into()));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument("knot abscissae must increase".into()));
        }
        let slopes: Vec<f64> = knots.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        // left of b_1 only the c_0 hinge is active, right of it only the c_j hinges
        let mut coeffs = Vec::with_capacity(knots.len());
        coeffs.push(-slopes[0]);
        coeffs.push(slopes[1]);
        coeffs.extend(slopes[1..].windows(2).map(|s| s[1] - s[0]));
        coeffs.push(knots[1].1);
        let breakpoints = knots[1..knots.len() - 1].iter().map(|k| k.0).collect();
        Self::new(breakpoints, coeffs, lipschitz)
    }

    /// Random `g` with `m` breakpoints, `|c_0| <= L` and `sum |c_j| <= L`.
    pub fn random(m: usize, lipschitz: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut breakpoints: Vec<f64> = Vec::with_capacity(m);
        while breakpoints.len() < m {
            let b = rng.random_range(0.02..0.98);
            if breakpoints.iter().all(|o: &f64| (o - b).abs() > 1e-3) {
                breakpoints.push(b);
            }
        }
        breakpoints.sort_by(f64::total_cmp);
        let mut coeffs = vec![lipschitz * rng.random_range(-1.0..1.0)];
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mass: f64 = raw.iter().map(|c: &f64| c.abs()).sum();
        let budget = lipschitz * rng.random_range(0.5..1.0);
        coeffs.extend(raw.iter().map(|c| c * budget / mass.max(f64::MIN_POSITIVE)));
        coeffs.push(rng.random_range(-1.0..1.0));
        Self::new(breakpoints, coeffs, lipschitz)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Slope on `[0, b_1]`, then on each segment after `b_j`.
    pub fn slopes(&self) -> Vec<f64> {
        let mut slopes = vec![-self.coeffs[0]];
        let mut acc = 0.0;
        for c in &self.coeffs[1..=self.breakpoints.len()] {
            acc += c;
            slopes.push(acc);
        }
        slopes
    }

    /// Whether `|c_0| <= L` and `sum_{j>=1} |c_j| <= L` (stronger than the slope bound).
    pub fn within_mass_bound(&self) -> bool {
        let m = self.breakpoints.len();
        let mass: f64 = self.coeffs[1..=m].iter().map(|c| c.abs()).sum();
        let bound = self.lipschitz * (1.0 + SLOPE_SLACK);
        self.coeffs[0].abs() <= bound && mass <= bound
    }

    /// Exact hinge-form evaluation.
    pub fn value(&self, x: f64) -> f64 {
        let m = self.breakpoints.len();
        let hinges: f64 = self.breakpoints.iter().zip(&self.coeffs[1..=m]).map(|(b, c)| c * relu(x - b)).sum();
        self.coeffs[0] * relu(self.breakpoints[0] - x) + hinges + self.coeffs[m + 1]
    }

    /// Per-hinge tolerance `eps / (2L)`.
    pub fn hinge_tolerance(&self, epsilon: f64) -> f64 {
        epsilon / (2.0 * self.lipschitz)
    }
}

/// Adds `g(x)` to a builder with every hinge replaced by `approx`.
pub fn piecewise_into(builder: &mut NetBuilder, x: Linear, g: &PiecewiseLinear, approx: &ReluApproximant) -> Linear {
    let m = g.breakpoints.len();
    let mut out = Linear::constant(g.coeffs[m + 1]);
    if g.coeffs[0] != 0.0 {
        let hinge = builder.relu_approx(-x.clone() + g.breakpoints[0], approx);
        out = out + hinge * g.coeffs[0];
    }
    for (&b, &c) in g.breakpoints.iter().zip(&g.coeffs[1..=m]) {
        if c != 0.0 {
            let hinge = builder.relu_approx(x.clone() + (-b), approx);
            out = out + hinge * c;
        }
    }
    out
}

/// Scalar network within `epsilon` of `g` on [0, 1].
pub fn piecewise_network(g: &PiecewiseLinear, epsilon: f64) -> Result<RationalNetwork> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {epsilon} not in (0, 1)")));
    }
    let approx = network_approximant(g.hinge_tolerance(epsilon))?;
    let mut builder = NetBuilder::new(1);
    let out = piecewise_into(&mut builder, Linear::input(0), g, &approx);
    builder.compile(&[out], Interval::symmetric())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructive::network::NodeActivation;
    use crate::ratfun::sup_error;
    use crate::zolotarev::stage_count_for;

    fn rational_nodes(net: &RationalNetwork) -> usize {
        net.layers().iter().flat_map(|l| &l.activations).filter(|a| matches!(a, NodeActivation::Rational(_))).count()
    }

    #[test]
    fn knots_round_trip() {
        let knots = [(0.0, 0.2), (0.3, 0.5), (0.6, -0.1), (1.0, 0.3)];
        let g = PiecewiseLinear::from_knots(&knots, 2.0).unwrap();
        assert_eq!(g.slopes().len(), 3);
        assert!((g.slopes()[1] + 2.0).abs() < 1e-14);
        for (x, y) in knots {
            assert!((g.value(x) - y).abs() < 1e-14);
        }
        assert!(PiecewiseLinear::from_knots(&knots, 1.9).is_err());
    }

    #[test]
    fn random_respects_mass_bound() {
        for seed in 0..20 {
            let g = PiecewiseLinear::random(5, 3.0, seed).unwrap();
            assert!(g.within_mass_bound());
        }
    }

    #[test]
    fn single_hinge() {
        let g = PiecewiseLinear::new(vec![0.5], vec![0.0, 1.0, 0.0], 1.0).unwrap();
        let net = piecewise_network(&g, 1e-2).unwrap();
        let report = sup_error(|x| g.value(x), |x| net.value(x), Interval::unit(), 20_001).unwrap();
        assert!(report.max_abs_error <= 1e-2, "{report:?}");
    }

    #[test]
    fn constant_is_exact() {
        let g = PiecewiseLinear::new(vec![0.4], vec![0.0, 0.0, 0.7], 1.0).unwrap();
        let net = piecewise_network(&g, 1e-3).unwrap();
        assert_eq!(net.size(), 0);
        assert!(Interval::unit().chebyshev_grid(101).iter().all(|&x| net.value(x) == 0.7));
    }

    #[test]
    fn random_five_breakpoints() {
        let g = PiecewiseLinear::random(5, 3.0, 7).unwrap();
        let eps = 1e-3;
        let net = piecewise_network(&g, eps).unwrap();
        let report = sup_error(|x| g.value(x), |x| net.value(x), Interval::unit(), 20_001).unwrap();
        assert!(report.max_abs_error <= eps, "{report:?}");
        let hinges = g.coeffs()[..=5].iter().filter(|c| **c != 0.0).count();
        assert_eq!(rational_nodes(&net), hinges * stage_count_for(eps / 6.0));
    }
}
