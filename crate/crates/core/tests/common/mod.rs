#![allow(dead_code)]

use std::fmt::Write as _;

use ratnet::nn::{ActivationKind, DenseRationalNet, Sample, Target};

/// Parameter groups compared separately in gradient checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamClass {
    Weight,
    Bias,
    Numerator,
    Denominator,
}

impl ParamClass {
    pub const ALL: [ParamClass; 4] =
        [ParamClass::Weight, ParamClass::Bias, ParamClass::Numerator, ParamClass::Denominator];

    pub fn name(self) -> &'static str {
        match self {
            ParamClass::Weight => "weight",
            ParamClass::Bias => "bias",
            ParamClass::Numerator => "numerator",
            ParamClass::Denominator => "denominator",
        }
    }
}

/// Class of every entry of `net.params()`.
pub fn param_classes(net: &DenseRationalNet) -> Vec<ParamClass> {
    let mut classes = Vec::with_capacity(net.trainable_param_count());
    for (w, b) in net.weights().iter().zip(net.biases()) {
        classes.extend(std::iter::repeat_n(ParamClass::Weight, w.len()));
        classes.extend(std::iter::repeat_n(ParamClass::Bias, b.len()));
    }
    for act in net.activations() {
        let len = act.params().len();
        if act.kind() == ActivationKind::Rational {
            classes.extend(std::iter::repeat_n(ParamClass::Numerator, 4));
            classes.extend(std::iter::repeat_n(ParamClass::Denominator, len - 4));
        } else {
            classes.extend(std::iter::repeat_n(ParamClass::Numerator, len));
        }
    }
    classes
}

/// Two hidden layers of width 6 with rational activations whose
/// coefficients are nudged off the initial table, plus an 8-sample batch.
pub fn seeded_rational_net(seed: u64) -> (DenseRationalNet, Vec<Sample>) {
    let mut net = DenseRationalNet::new(&[2, 6, 6, 1], ActivationKind::Rational, seed).unwrap();
    let mut params = net.params();
    let offsets = net.activation_offsets();
    for (layer, &offset) in offsets.iter().enumerate() {
        for i in 0..7 {
            params[offset + i] += 0.05 * ((layer * 7 + i) as f64 * 0.7).sin();
        }
    }
    // nonzero biases so every bias gradient is generic
    let weight_end = net.weight_count();
    for (i, p) in params[..weight_end].iter_mut().enumerate() {
        *p += 0.01 * (i as f64).cos();
    }
    net.set_params(&params).unwrap();
    (net, Target::Sin2d.sample(8, seed))
}

pub struct GradientCheck {
    pub classes: Vec<ParamClass>,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

impl GradientCheck {
    /// `max |analytic - numeric| / max |numeric|` over one class.
    pub fn relative_error(&self, class: ParamClass) -> f64 {
        let (mut gap, mut scale) = (0.0f64, 0.0f64);
        for ((c, a), n) in self.classes.iter().zip(&self.analytic).zip(&self.numeric) {
            if *c == class {
                gap = gap.max((a - n).abs());
                scale = scale.max(n.abs());
            }
        }
        gap / scale.max(1e-300)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,class,analytic,finite_difference\n");
        for (i, ((c, a), n)) in self.classes.iter().zip(&self.analytic).zip(&self.numeric).enumerate() {
            let _ = writeln!(out, "{i},{},{a:.16e},{n:.16e}", c.name());
        }
        out
    }
}

/// Central differences of the batch loss with step `h` against `backward`.
pub fn gradient_check(net: &DenseRationalNet, batch: &[Sample], h: f64) -> GradientCheck {
    let (_, grads) = net.backward(batch).unwrap();
    let analytic = grads.flat();
    let base = net.params();
    let mut probe = net.clone();
    let numeric = (0..base.len())
        .map(|i| {
            let mut shifted = base.clone();
            shifted[i] = base[i] + h;
            probe.set_params(&shifted).unwrap();
            let plus = probe.loss_mse(batch).unwrap();
            shifted[i] = base[i] - h;
            probe.set_params(&shifted).unwrap();
            let minus = probe.loss_mse(batch).unwrap();
            (plus - minus) / (2.0 * h)
        })
        .collect();
    GradientCheck { classes: param_classes(net), analytic, numeric }
}
