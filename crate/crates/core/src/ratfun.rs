//! Rational functions `P/Q` with ascending coefficients, their compositions,
//! pole screening and sup-norm measurement on Chebyshev grids.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default number of grid points for sup-norm sweeps.
pub const DEFAULT_GRID: usize = 100_000;

/// Relative threshold for near-pole detection.
pub const POLE_TOL: f64 = 1e-8;

/// Evaluate an ascending coefficient list at `x` by Horner's rule.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Closed real interval with finite, ordered endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `[-1, 1]`
    pub const fn symmetric() -> Self {
        Self { lo: -1.0, hi: 1.0 }
    }

    /// `[0, 1]`
    pub const fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }

    /// Chebyshev points of the second kind, ascending. Endpoints are included.
    pub fn chebyshev_grid(&self, n: usize) -> Vec<f64> {
        let mid = 0.5 * (self.lo + self.hi);
        let half = 0.5 * (self.hi - self.lo);
        match n {
            0 => Vec::new(),
            1 => vec![mid],
            _ => (0..n)
                .map(|j| {
                    if j == 0 {
                        self.lo
                    } else if j == n - 1 {
                        self.hi
                    } else {
                        mid - half * (PI * j as f64 / (n - 1) as f64).cos()
                    }
                })
                .collect(),
        }
    }
}

/// `P(x)/Q(x)` of type `(r_P, r_Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    numer: Vec<f64>,
    denom: Vec<f64>,
}

impl RationalFunction {
    /// Both lists are ascending in degree and must end in a nonzero coefficient.
    pub fn new(numer: Vec<f64>, denom: Vec<f64>) -> Result<Self> {
        for (name, coeffs) in [("numerator", &numer), ("denominator", &denom)] {
            match coeffs.last() {
                None => return Err(Error::InvalidArgument(format!("empty {name}"))),
                Some(&0.0) => return Err(Error::InvalidArgument(format!("{name} has zero leading coefficient"))),
                _ => {}
            }
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} has non-finite coefficient")));
            }
        }
        Ok(Self { numer, denom })
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        Self::new(coeffs, vec![1.0])
    }

    pub fn identity() -> Self {
        Self { numer: vec![0.0, 1.0], denom: vec![1.0] }
    }

    /// `x^n`
    pub fn monomial(n: usize) -> Self {
        let mut numer = vec![0.0; n + 1];
        numer[n] = 1.0;
        Self { numer, denom: vec![1.0] }
    }

    pub fn numer(&self) -> &[f64] {
        &self.numer
    }

    pub fn denom(&self) -> &[f64] {
        &self.denom
    }

    /// `(r_P, r_Q)`
    pub fn rational_type(&self) -> (usize, usize) {
        (self.numer.len() - 1, self.denom.len() - 1)
    }

    pub fn degree(&self) -> usize {
        let (p, q) = self.rational_type();
        p.max(q)
    }

    pub fn param_count(&self) -> usize {
        self.numer.len() + self.denom.len()
    }

    /// Unchecked value; may be non-finite near a pole.
    pub fn value(&self, x: f64) -> f64 {
        horner(&self.numer, x) / horner(&self.denom, x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let y = self.value(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Evaluation { x })
        }
    }

    /// Value and first derivative by the quotient rule.
    pub fn value_and_slope(&self, x: f64) -> (f64, f64) {
        let (p, dp) = horner_with_derivative(&self.numer, x);
        let (q, dq) = horner_with_derivative(&self.denom, x);
        (p / q, (dp * q - p * dq) / (q * q))
    }

    pub fn denominator_at(&self, x: f64) -> f64 {
        horner(&self.denom, x)
    }
}

/// `(p(x), p'(x))` in one Horner pass.
pub fn horner_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for &c in coeffs.iter().rev() {
        slope = slope * x + value;
        value = value * x + c;
    }
    (value, slope)
}

/// Stages applied left to right: `stages[n-1] ∘ … ∘ stages[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedRational {
    stages: Vec<RationalFunction>,
}

impl ComposedRational {
    pub fn new(stages: Vec<RationalFunction>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidArgument("composition needs at least one stage".into()));
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[RationalFunction] {
        &self.stages
    }

    pub fn degree(&self) -> usize {
        self.stages.iter().map(RationalFunction::degree).product()
    }

    pub fn param_count(&self) -> usize {
        self.stages.iter().map(RationalFunction::param_count).sum()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.stages.iter().fold(x, |acc, stage| stage.value(acc))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.stages
            .iter()
            .enumerate()
            .try_fold(x, |acc, (stage, r)| r.eval(acc).map_err(|err| Error::Stage { stage, source: Box::new(err) }))
    }
}

/// True when `Q` keeps one sign on the grid and stays above
/// `POLE_TOL * max(1, max|Q|)` in magnitude.
pub fn pole_check(r: &RationalFunction, interval: Interval, n_grid: usize) -> bool {
    let values: Vec<f64> = interval.chebyshev_grid(n_grid.max(2)).into_iter().map(|x| r.denominator_at(x)).collect();
    if values.iter().any(|q| !q.is_finite()) {
        return false;
    }
    let scale = values.iter().fold(1.0_f64, |m, q| m.max(q.abs()));
    let tol = POLE_TOL * scale;
    let positive = values[0] > 0.0;
    values.iter().all(|&q| q.abs() > tol && (q > 0.0) == positive)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNormReport {
    pub grid_size: usize,
    pub max_abs_error: f64,
    pub argmax: f64,
}

/// Max of `|f - g|` over a Chebyshev grid. Ties go to the smallest abscissa.
pub fn sup_error(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    interval: Interval,
    n_grid: usize,
) -> Result<SupNormReport> {
    if n_grid == 0 {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut report = SupNormReport { grid_size: n_grid, max_abs_error: -1.0, argmax: interval.lo };
    for x in interval.chebyshev_grid(n_grid) {
        let (fx, gx) = (f(x), g(x));
        if !(fx.is_finite() && gx.is_finite()) {
            return Err(Error::Evaluation { x });
        }
        let gap = (fx - gx).abs();
        if gap > report.max_abs_error {
            report.max_abs_error = gap;
            report.argmax = x;
        }
    }
    Ok(report)
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> RationalFunction {
        RationalFunction::new(vec![1.1915, 1.5957, 0.5, 0.0218], vec![2.3830, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn spot_values() {
        let id = RationalFunction::new(vec![0.0, 1.0], vec![1.0]).unwrap();
        assert_eq!(id.eval(0.7).unwrap(), 0.7);
        assert!((table().eval(0.0).unwrap() - 0.5).abs() < 1e-15);
        let ratio = RationalFunction::new(vec![0.0, 0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(ratio.eval(3.0).unwrap(), 3.0);
        assert!(matches!(ratio.eval(0.0), Err(Error::Evaluation { x }) if x == 0.0));
    }

    #[test]
    fn accounting() {
        let r = table();
        assert_eq!(r.rational_type(), (3, 2));
        assert_eq!(r.degree(), 3);
        assert_eq!(r.param_count(), 7);
        let c = ComposedRational::new(vec![r.clone(), r.clone(), r]).unwrap();
        assert_eq!(c.degree(), 27);
        assert_eq!(c.param_count(), 21);
        assert!(RationalFunction::new(vec![1.0, 0.0], vec![1.0]).is_err());
        assert!(ComposedRational::new(vec![]).is_err());
    }

    #[test]
    fn composition_spot_values() {
        let sq = RationalFunction::monomial(2);
        let c = ComposedRational::new(vec![sq.clone(), sq]).unwrap();
        assert_eq!(c.eval(2.0).unwrap(), 16.0);
        let id = ComposedRational::new(vec![RationalFunction::identity()]).unwrap();
        assert_eq!(id.eval(-0.3).unwrap(), -0.3);
        let pole = RationalFunction::new(vec![1.0], vec![0.0, 1.0]).unwrap();
        let c = ComposedRational::new(vec![RationalFunction::identity(), pole]).unwrap();
        assert!(matches!(c.eval(0.0), Err(Error::Stage { stage: 1, .. })));
    }

    #[test]
    fn pole_screening() {
        let sym = Interval::symmetric();
        assert!(pole_check(&RationalFunction::new(vec![1.0], vec![2.383, 0.0, 1.0]).unwrap(), sym, 1000));
        assert!(!pole_check(&RationalFunction::new(vec![1.0], vec![0.0, 1.0]).unwrap(), sym, 1000));
        assert!(pole_check(
            &RationalFunction::polynomial(vec![0.0, 1.0]).unwrap(),
            Interval::new(-5.0, 3.0).unwrap(),
            2
        ));
        // positive but below the relative threshold
        assert!(!pole_check(&RationalFunction::new(vec![1.0], vec![1e-12, 0.0, 1.0]).unwrap(), sym, 1001));
    }

    #[test]
    fn sup_error_basics() {
        let sym = Interval::symmetric();
        let zero = sup_error(relu, relu, sym, 1000).unwrap();
        assert_eq!(zero.max_abs_error, 0.0);
        assert_eq!(zero.argmax, -1.0);
        let line = sup_error(|x| x, |_| 0.0, Interval::unit(), 1000).unwrap();
        assert_eq!(line.max_abs_error, 1.0);
        assert_eq!(line.argmax, 1.0);
        assert!(sup_error(f64::ln, |_| 0.0, sym, 3).is_err());
    }

    #[test]
    fn grid_is_ascending_and_inside() {
        let iv = Interval::new(-0.25, 2.0).unwrap();
        let grid = iv.chebyshev_grid(257);
        assert_eq!(grid[0], -0.25);
        assert_eq!(grid[256], 2.0);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    fn naive(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum()
    }

    proptest! {
        #[test]
        fn horner_matches_power_sum(
            coeffs in prop::collection::vec(0.1f64..2.0, 1..=11),
            signs in prop::collection::vec(any::<bool>(), 11),
            x in -2.0f64..2.0,
        ) {
            // mixed signs can cancel to zero; compare against the absolute-value sum
            let coeffs: Vec<f64> = coeffs.iter().zip(&signs).map(|(c, s)| if *s { *c } else { -*c }).collect();
            let scale: f64 = coeffs.iter().enumerate().map(|(i, c)| (c * x.powi(i as i32)).abs()).sum();
            prop_assert!((horner(&coeffs, x) - naive(&coeffs, x)).abs() <= 1e-12 * scale);
        }

        #[test]
        fn horner_derivative_matches_power_sum(coeffs in prop::collection::vec(-2.0f64..2.0, 2..=8), x in -2.0f64..2.0) {
            let derived: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
            let (_, slope) = horner_with_derivative(&coeffs, x);
            let scale: f64 = derived.iter().enumerate().map(|(i, c)| (c * x.powi(i as i32)).abs()).sum::<f64>().max(1e-300);
            prop_assert!((slope - naive(&derived, x)).abs() <= 1e-12 * scale);
        }

        #[test]
        fn sup_error_symmetric_nonnegative(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 2usize..400) {
            let f = move |x: f64| a * x * x - b;
            let g = move |x: f64| (b * x).sin();
            let fg = sup_error(f, g, Interval::symmetric(), n).unwrap();
            let gf = sup_error(g, f, Interval::symmetric(), n).unwrap();
            prop_assert_eq!(fg, gf);
            prop_assert!(fg.max_abs_error >= 0.0);
            prop_assert!(Interval::symmetric().contains(fg.argmax));
        }
    }
}
