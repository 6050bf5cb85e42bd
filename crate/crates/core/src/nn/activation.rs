use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ratfun::{horner, horner_with_derivative, pole_check, Interval, RationalFunction};

/// Rational initialization, ascending: best type-(3,2) fit to ReLU on [-1, 1].
pub const RATIONAL_INIT_NUMER: [f64; 4] = [0.0218, 0.5, 1.5957, 1.1915];
pub const RATIONAL_INIT_DENOM: [f64; 3] = [1.0, 0.0, 2.383];
/// Best cubic fit to ReLU on [-1, 1], ascending (`1/16 + x/2 + x²/2`).
pub const POLYNOMIAL_INIT: [f64; 4] = [0.0625, 0.5, 0.5, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Rational,
    Relu,
    Sinusoid,
    Polynomial,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] =
        [ActivationKind::Relu, ActivationKind::Sinusoid, ActivationKind::Rational, ActivationKind::Polynomial];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Rational => "rational",
            ActivationKind::Relu => "relu",
            ActivationKind::Sinusoid => "sinusoid",
            ActivationKind::Polynomial => "polynomial",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(ActivationKind::Rational),
            "relu" => Ok(ActivationKind::Relu),
            "sinusoid" | "sin" => Ok(ActivationKind::Sinusoid),
            "polynomial" | "poly" => Ok(ActivationKind::Polynomial),
            other => Err(Error::InvalidArgument(format!("unknown activation {other:?}"))),
        }
    }
}

/// One layer's shared activation. Rational coefficients are stored as the
/// ascending numerator (4) followed by the ascending denominator (3).
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSpec {
    kind: ActivationKind,
    params: Vec<f64>,
}

impl ActivationSpec {
    pub fn new(kind: ActivationKind, params: Vec<f64>) -> Result<Self> {
        let want = Self::param_len(kind);
        if params.len() != want {
            return Err(Error::InvalidArgument(format!("{kind} takes {want} coefficients, got {}", params.len())));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("non-finite activation coefficient".into()));
        }
        Ok(Self { kind, params })
    }

    /// Default initialization for `kind`.
    pub fn initial(kind: ActivationKind) -> Self {
        let params = match kind {
            ActivationKind::Rational => RATIONAL_INIT_NUMER.iter().chain(&RATIONAL_INIT_DENOM).copied().collect(),
            ActivationKind::Polynomial => POLYNOMIAL_INIT.to_vec(),
            _ => Vec::new(),
        };
        Self { kind, params }
    }

    pub fn param_len(kind: ActivationKind) -> usize {
        match kind {
            ActivationKind::Rational => 7,
            ActivationKind::Polynomial => 4,
            _ => 0,
        }
    }

    pub fn kind(&self) -> ActivationKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub(crate) fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// The rational activation with trailing zero coefficients dropped.
    pub fn as_rational(&self) -> Option<Result<RationalFunction>> {
        (self.kind == ActivationKind::Rational)
            .then(|| RationalFunction::new(trimmed(&self.params[..4]), trimmed(&self.params[4..])))
    }

    /// Whether a rational activation's denominator is safely away from zero
    /// on `[-bound, bound]`; other kinds always pass.
    pub fn pole_free(&self, bound: f64, grid: usize) -> bool {
        if self.kind != ActivationKind::Rational {
            return true;
        }
        let interval = Interval::new(-bound, bound).unwrap_or(Interval::symmetric());
        RationalFunction::new(vec![1.0], trimmed(&self.params[4..]))
            .map(|denom_only| pole_check(&denom_only, interval, grid))
            .unwrap_or(false)
    }

    pub fn value(&self, z: f64) -> f64 {
        match self.kind {
            ActivationKind::Rational => horner(&self.params[..4], z) / horner(&self.params[4..], z),
            ActivationKind::Relu => z.max(0.0),
            ActivationKind::Sinusoid => z.sin(),
            ActivationKind::Polynomial => horner(&self.params, z),
        }
    }

    /// `(sigma(z), sigma'(z))`
    pub fn value_and_slope(&self, z: f64) -> (f64, f64) {
        match self.kind {
            ActivationKind::Rational => {
                let (p, dp) = horner_with_derivative(&self.params[..4], z);
                let (q, dq) = horner_with_derivative(&self.params[4..], z);
                (p / q, (dp * q - p * dq) / (q * q))
            }
            ActivationKind::Relu => (z.max(0.0), if z > 0.0 { 1.0 } else { 0.0 }),
            ActivationKind::Sinusoid => (z.sin(), z.cos()),
            ActivationKind::Polynomial => horner_with_derivative(&self.params, z),
        }
    }

    /// Adds `upstream * d sigma(z) / d theta` into `grad`.
    pub fn accumulate_param_grad(&self, z: f64, upstream: f64, grad: &mut [f64]) {
        match self.kind {
            ActivationKind::Rational => {
                let p = horner(&self.params[..4], z);
                let q = horner(&self.params[4..], z);
                let inv_q = 1.0 / q;
                let ratio = p * inv_q * inv_q;
                let mut power = 1.0;
                for i in 0..4 {
                    grad[i] += upstream * power * inv_q;
                    if i < 3 {
                        grad[4 + i] -= upstream * power * ratio;
                    }
                    power *= z;
                }
            }
            ActivationKind::Polynomial => {
                let mut power = 1.0;
                for g in grad.iter_mut() {
                    *g += upstream * power;
                    power *= z;
                }
            }
            _ => {}
        }
    }
}

fn trimmed(coeffs: &[f64]) -> Vec<f64> {
    let len = coeffs.iter().rposition(|c| *c != 0.0).map_or(1, |i| i + 1);
    coeffs[..len].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::{relu, sup_error};

    #[test]
    fn rational_init_is_close_to_relu() {
        let spec = ActivationSpec::initial(ActivationKind::Rational);
        let report = sup_error(relu, |x| spec.value(x), Interval::symmetric(), 10_001).unwrap();
        assert!(report.max_abs_error < 0.0219, "{report:?}");
        assert!(spec.pole_free(10.0, 2001));
    }

    #[test]
    fn polynomial_init_is_best_cubic() {
        let spec = ActivationSpec::initial(ActivationKind::Polynomial);
        let report = sup_error(relu, |x| spec.value(x), Interval::symmetric(), 10_001).unwrap();
        assert!((report.max_abs_error - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn slopes_match_differences() {
        let h = 1e-6;
        for kind in ActivationKind::ALL {
            let spec = ActivationSpec::initial(kind);
            for z in [-0.7, 0.3, 1.9] {
                let (_, slope) = spec.value_and_slope(z);
                let fd = (spec.value(z + h) - spec.value(z - h)) / (2.0 * h);
                assert!((slope - fd).abs() < 1e-8, "{kind} at {z}");
            }
        }
    }

    #[test]
    fn param_grads_match_differences() {
        let h = 1e-6;
        for kind in [ActivationKind::Rational, ActivationKind::Polynomial] {
            let spec = ActivationSpec::initial(kind);
            let z = 0.37;
            let mut grad = vec![0.0; spec.params().len()];
            spec.accumulate_param_grad(z, 1.0, &mut grad);
            for (i, &analytic) in grad.iter().enumerate() {
                let mut plus = spec.clone();
                plus.params_mut()[i] += h;
                let mut minus = spec.clone();
                minus.params_mut()[i] -= h;
                let fd = (plus.value(z) - minus.value(z)) / (2.0 * h);
                assert!((analytic - fd).abs() < 1e-8, "{kind} coefficient {i}");
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ActivationKind::ALL {
            assert_eq!(kind.name().parse::<ActivationKind>().unwrap(), kind);
        }
        assert!("tanh".parse::<ActivationKind>().is_err());
    }
}
