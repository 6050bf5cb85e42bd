//! Zolotarev sign approximants on `[-1,-ell] ∪ [ell,1]`, their nested
//! type-(3,2) compositions, and the ReLU / |x| approximants built on them.

use std::f64::consts::PI;

use crate::elliptic::{complete_k, jacobi_sc, EllipticModulus};
use crate::error::{Error, Result};
use crate::ratfun::{ComposedRational, RationalFunction};

pub const MAX_DEGREE: usize = 81;
pub const MAX_STAGES: usize = 4;
/// Smallest gap parameter accepted by [`build`].
pub const MIN_ELL: f64 = 1e-15;

const SEARCH_GRID: usize = 20_000;

/// Degree-`k` Zolotarev data: poles/zeros `c_1..c_{k-1}` and the scaling `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZolotarevSpec {
    k: usize,
    ell: f64,
    kappa: f64,
    c: Vec<f64>,
    scale: f64,
    rho_min: f64,
    rho_max: f64,
}

impl ZolotarevSpec {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `c_1..c_{k-1}`
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// The equioscillation scaling `M`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Equioscillation level `max |1 - M rho|` on `[ell, 1]`.
    pub fn level(&self) -> f64 {
        (self.rho_max - self.rho_min) / (self.rho_max + self.rho_min)
    }

    /// Unscaled `x ∏(x²+c_{2j}) / ∏(x²+c_{2j-1})`, multiplied pairwise.
    pub fn rho(&self, x: f64) -> f64 {
        let sq = x * x;
        self.c.chunks_exact(2).fold(x, |acc, pair| acc * ((sq + pair[1]) / (sq + pair[0])))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.scale * self.rho(x)
    }

    /// Expanded type-`(k, k-1)` coefficients for a given output scaling.
    fn expand(&self, scale: f64) -> Result<RationalFunction> {
        let mut numer = vec![0.0, scale];
        let mut denom = vec![1.0];
        for (j, &cj) in self.c.iter().enumerate() {
            let target = if j % 2 == 0 { &mut denom } else { &mut numer };
            *target = multiply_by_quadratic(target, cj);
        }
        RationalFunction::new(numer, denom)
    }

    fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

/// `p(x) * (x² + c)` on ascending coefficients.
fn multiply_by_quadratic(p: &[f64], c: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 2];
    for (i, &a) in p.iter().enumerate() {
        out[i] += c * a;
        out[i + 2] += a;
    }
    out
}

fn check_range(k: usize, ell: f64) -> Result<()> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("Zolotarev degree must be odd and positive, got {k}")));
    }
    if k > MAX_DEGREE {
        return Err(Error::Range(format!("degree {k} exceeds {MAX_DEGREE}")));
    }
    if !(MIN_ELL..1.0).contains(&ell) {
        return Err(Error::Range(format!("ell = {ell} outside [{MIN_ELL}, 1)")));
    }
    Ok(())
}

fn spec(k: usize, ell: f64) -> Result<ZolotarevSpec> {
    check_range(k, ell)?;
    let modulus = EllipticModulus::from_complement(ell)?;
    let quarter = complete_k(modulus);
    let c = (1..k)
        .map(|j| {
            let sc = jacobi_sc(j as f64 * quarter / k as f64, modulus)?;
            Ok(ell * ell * sc * sc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut spec = ZolotarevSpec { k, ell, kappa: modulus.kappa(), c, scale: 1.0, rho_min: 0.0, rho_max: 0.0 };
    let (rho_min, rho_max) = rho_range(&spec);
    spec.rho_min = rho_min;
    spec.rho_max = rho_max;
    spec.scale = 2.0 / (rho_min + rho_max);
    Ok(spec)
}

/// Extremes of `rho` on `[ell, 1]`: log-spaced scan, then golden-section
/// polish of every interior local extremum.
fn rho_range(spec: &ZolotarevSpec) -> (f64, f64) {
    let log_ell = spec.ell.ln();
    let at = |t: f64| spec.rho((log_ell * (1.0 - t)).exp());
    let samples: Vec<f64> = (0..SEARCH_GRID).map(|i| at(i as f64 / (SEARCH_GRID - 1) as f64)).collect();
    let mut lo = samples[0].min(samples[SEARCH_GRID - 1]);
    let mut hi = samples[0].max(samples[SEARCH_GRID - 1]);
    let step = 1.0 / (SEARCH_GRID - 1) as f64;
    for i in 1..SEARCH_GRID - 1 {
        let (left, mid, right) = (samples[i - 1], samples[i], samples[i + 1]);
        let bracket = ((i - 1) as f64 * step, (i + 1) as f64 * step);
        if mid >= left && mid >= right {
            hi = hi.max(golden_extremum(&at, bracket, true));
        } else if mid <= left && mid <= right {
            lo = lo.min(golden_extremum(&at, bracket, false));
        }
    }
    (lo, hi)
}

fn golden_extremum(f: &impl Fn(f64) -> f64, (mut a, mut b): (f64, f64), maximize: bool) -> f64 {
    let sign = if maximize { 1.0 } else { -1.0 };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (sign * f(x1), sign * f(x2));
    let mut best = f1.max(f2).max(sign * f(a)).max(sign * f(b));
    for _ in 0..90 {
        if f1 > f2 {
            b = x2;
            (x2, f2) = (x1, f1);
            x1 = b - ratio * (b - a);
            f1 = sign * f(x1);
        } else {
            a = x1;
            (x1, f1) = (x2, f2);
            x2 = a + ratio * (b - a);
            f2 = sign * f(x2);
        }
        best = best.max(f1).max(f2);
        if b - a < 1e-17 {
            break;
        }
    }
    sign * best
}

/// Degree-`k` Zolotarev sign approximant with equioscillating scaling
/// `M = 2/(max rho + min rho)` on `[ell, 1]`.
///
/// The returned spec evaluates in product form; the expanded coefficients lose
/// their lowest terms to underflow around `k = 81` with small `ell`.
pub fn build(k: usize, ell: f64) -> Result<(ZolotarevSpec, RationalFunction)> {
    let spec = spec(k, ell)?;
    let rational = spec.expand(spec.scale)?;
    Ok((spec, rational))
}

/// `p` nested degree-3 stages whose composition is the degree-`3^p`
/// approximant for `ell`. Inner stages are normalized to map `[ell_i, 1]`
/// onto `[ell_{i+1}, 1]`; the outer stage carries the optimal scaling.
pub fn compose_stages(p: usize, ell: f64) -> Result<ComposedRational> {
    ComposedRational::new(stage_specs(p, ell)?.iter().map(|s| s.expand(s.scale)).collect::<Result<_>>()?)
}

fn stage_specs(p: usize, ell: f64) -> Result<Vec<ZolotarevSpec>> {
    if p == 0 || p > MAX_STAGES {
        return Err(Error::Range(format!("{p} stages outside 1..={MAX_STAGES}")));
    }
    check_range(3, ell)?;
    let mut specs = Vec::with_capacity(p);
    let mut gap = ell;
    for i in 0..p {
        let stage = spec(3, gap)?;
        let stage = if i + 1 == p {
            stage
        } else {
            let inner = 1.0 / stage.rho_max;
            stage.with_scale(inner)
        };
        gap = stage.value(gap);
        specs.push(stage);
    }
    Ok(specs)
}

/// Stage count `k = ceil((ln(2/pi²) + 2 ln ln(4/eps)) / ln 3)`, at least 1.
pub fn stage_count_for(epsilon: f64) -> usize {
    let raw = ((2.0 / (PI * PI)).ln() + 2.0 * (4.0 / epsilon).ln().ln()) / 3f64.ln();
    raw.ceil().max(1.0) as usize
}

/// Smallest tolerance whose stage count stays within [`MAX_STAGES`].
pub fn min_relu_epsilon() -> f64 {
    let exponent = 0.5 * (MAX_STAGES as f64 * 3f64.ln() - (2.0 / (PI * PI)).ln());
    4.0 / exponent.exp().exp()
}

/// `4 exp(-pi sqrt(3^k / 2))`
pub fn relu_gap(stages: usize) -> f64 {
    4.0 * (-PI * (3f64.powi(stages as i32) / 2.0).sqrt()).exp()
}

/// `x ↦ ½(x r(x)/(1+eps) + x)` with `r` a composed Zolotarev sign function.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluApproximant {
    epsilon: f64,
    ell: f64,
    sign: ComposedRational,
}

impl ReluApproximant {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn stage_count(&self) -> usize {
        self.sign.stages().len()
    }

    /// The composed sign approximant `r`.
    pub fn sign(&self) -> &ComposedRational {
        &self.sign
    }

    pub fn param_count(&self) -> usize {
        self.sign.param_count()
    }

    pub fn value(&self, x: f64) -> f64 {
        0.5 * (x * self.sign.value(x) / (1.0 + self.epsilon) + x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let r = self.sign.eval(x)?;
        Ok(0.5 * (x * r / (1.0 + self.epsilon) + x))
    }
}

pub fn relu_approximant(epsilon: f64) -> Result<ReluApproximant> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {epsilon} not in (0, 1)")));
    }
    let stages = stage_count_for(epsilon);
    if stages > MAX_STAGES {
        return Err(Error::Range(format!(
            "tolerance {epsilon:e} needs {stages} stages; minimum admissible tolerance is {:e}",
            min_relu_epsilon()
        )));
    }
    let ell = relu_gap(stages);
    Ok(ReluApproximant { epsilon, ell, sign: compose_stages(stages, ell)? })
}

/// `x ↦ x r(x)` for the degree-`k` sign approximant with `ell = 4 exp(-pi sqrt(k/2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsApproximant {
    spec: ZolotarevSpec,
}

impl AbsApproximant {
    pub fn spec(&self) -> &ZolotarevSpec {
        &self.spec
    }

    /// `4 exp(-pi sqrt(k/2))`
    pub fn bound(&self) -> f64 {
        self.spec.ell
    }

    pub fn value(&self, x: f64) -> f64 {
        x * self.spec.value(x)
    }
}

pub fn abs_approximant(k: usize) -> Result<AbsApproximant> {
    let ell = 4.0 * (-PI * (k as f64 / 2.0).sqrt()).exp();
    Ok(AbsApproximant { spec: spec(k, ell)? })
}
