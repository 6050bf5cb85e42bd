//! Complete elliptic integral of the first kind and the Jacobi functions
//! `sn`, `cn` for real argument and modulus `0 <= kappa < 1`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_STEPS: usize = 64;

/// Modulus `kappa` stored together with its complement `sqrt(1 - kappa^2)`,
/// so tiny complements survive when `kappa` rounds to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    kappa: f64,
    complement: f64,
}

impl EllipticModulus {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::InvalidArgument(format!("elliptic modulus {kappa} not in [0, 1)")));
        }
        Ok(Self { kappa, complement: ((1.0 - kappa) * (1.0 + kappa)).sqrt() })
    }

    /// Modulus with complementary modulus `ell`, i.e. `kappa = sqrt(1 - ell^2)`.
    pub fn from_complement(ell: f64) -> Result<Self> {
        if !(ell > 0.0 && ell <= 1.0) {
            return Err(Error::InvalidArgument(format!("complementary modulus {ell} not in (0, 1]")));
        }
        Ok(Self { kappa: ((1.0 - ell) * (1.0 + ell)).sqrt(), complement: ell })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn complement(&self) -> f64 {
        self.complement
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_STEPS {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    0.5 * (a + b)
}

/// `K(kappa) = pi / (2 AGM(1, kappa'))`.
pub fn complete_k(m: EllipticModulus) -> f64 {
    FRAC_PI_2 / agm(1.0, m.complement)
}

/// `(sn, cn)` at real `u`.
pub fn jacobi_sn_cn(u: f64, m: EllipticModulus) -> Result<(f64, f64)> {
    if !u.is_finite() {
        return Err(Error::InvalidArgument(format!("argument {u}")));
    }
    let quarter = complete_k(m);
    let w = u.rem_euclid(4.0 * quarter);
    let (v, sn_sign, cn_sign) = if w <= quarter {
        (w, 1.0, 1.0)
    } else if w <= 2.0 * quarter {
        (2.0 * quarter - w, 1.0, -1.0)
    } else if w <= 3.0 * quarter {
        (w - 2.0 * quarter, -1.0, -1.0)
    } else {
        (4.0 * quarter - w, -1.0, 1.0)
    };
    let values = quarter_period(v, m, quarter)?;
    Ok((sn_sign * values.sn, cn_sign * values.cn))
}

pub fn jacobi_sn(u: f64, m: EllipticModulus) -> Result<f64> {
    jacobi_sn_cn(u, m).map(|(sn, _)| sn)
}

/// `sn/cn` for `0 <= u <= K`, accurate even where `cn` is tiny.
pub(crate) fn jacobi_sc(u: f64, m: EllipticModulus) -> Result<f64> {
    quarter_period(u, m, complete_k(m)).map(|values| values.sc)
}

#[derive(Debug, Clone, Copy)]
struct QuarterValues {
    sn: f64,
    cn: f64,
    sc: f64,
}

/// `u` in `[0, K]`. Small moduli use descending Landen directly; large ones
/// run Landen in the complementary modulus along the imaginary axis, which is
/// only accurate up to `K/2`, so the upper half is reflected through `K - u`.
fn quarter_period(u: f64, m: EllipticModulus, quarter: f64) -> Result<QuarterValues> {
    if m.kappa * m.kappa <= 0.5 {
        let (sn, cn) = real_landen(u, m)?;
        return Ok(QuarterValues { sn, cn, sc: sn / cn });
    }
    if u <= 0.5 * quarter {
        return imaginary_landen(u, m);
    }
    let mirror = imaginary_landen(quarter - u, m)?;
    let kp = m.complement;
    let dn = (mirror.cn * mirror.cn + kp * kp * mirror.sn * mirror.sn).sqrt();
    Ok(QuarterValues { sn: mirror.cn / dn, cn: kp * mirror.sn / dn, sc: mirror.cn / (kp * mirror.sn) })
}

/// Descending Gauss-Landen sequence `(a_n, c_n)` started at `(1, b, c)`.
/// `c_{n+1} = c_n^2 / (4 a_{n+1})` avoids the cancellation in `(a - b)/2`.
fn landen_sequence(b0: f64, c0: f64, done: impl Fn(usize, f64, f64) -> bool) -> Result<Vec<(f64, f64)>> {
    let mut seq = vec![(1.0, c0)];
    let mut b = b0;
    loop {
        let n = seq.len() - 1;
        let (a, c) = seq[n];
        if c == 0.0 || done(n, a, c) {
            return Ok(seq);
        }
        if n == MAX_STEPS {
            return Err(Error::Numeric("Landen recursion did not converge in 64 steps".into()));
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        seq.push((next, c * c / (4.0 * next)));
    }
}

fn real_landen(u: f64, m: EllipticModulus) -> Result<(f64, f64)> {
    let seq = landen_sequence(m.complement, m.kappa, |_, a, c| c <= 1e-17 * a)?;
    let n = seq.len() - 1;
    let mut phi = 2f64.powi(n as i32) * seq[n].0 * u;
    for &(a, c) in seq[1..].iter().rev() {
        phi = 0.5 * (phi + (c / a * phi.sin()).asin());
    }
    Ok((phi.sin(), phi.cos()))
}

fn imaginary_landen(u: f64, m: EllipticModulus) -> Result<QuarterValues> {
    let floor = 1e-18f64.ln();
    let seq = landen_sequence(m.kappa, m.complement, |n, a, c| c.ln() + 2f64.powi(n as i32) * a * u < floor)?;
    let n = seq.len() - 1;
    let mut psi = 2f64.powi(n as i32) * seq[n].0 * u;
    for &(a, c) in seq[1..].iter().rev() {
        psi = 0.5 * (psi + (c / a * psi.sinh()).asinh());
    }
    Ok(QuarterValues { sn: psi.tanh(), cn: 1.0 / psi.cosh(), sc: psi.sinh() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn modulus(kappa: f64) -> EllipticModulus {
        EllipticModulus::new(kappa).unwrap()
    }

    #[test]
    fn degenerate_modulus_is_circular() {
        let m = modulus(0.0);
        assert_eq!(complete_k(m), FRAC_PI_2);
        for u in [-7.0, -0.3, 0.0, 0.9, 2.5, 11.0] {
            assert!((jacobi_sn(u, m).unwrap() - f64::sin(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn quarter_period_identity() {
        for kappa in [0.1, 0.5, 0.8, 0.99, 0.999999] {
            let m = modulus(kappa);
            let (sn, cn) = jacobi_sn_cn(complete_k(m), m).unwrap();
            assert!((sn - 1.0).abs() < 1e-14, "kappa {kappa}");
            assert!(cn.abs() < 1e-7);
            assert_eq!(jacobi_sn(0.0, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(EllipticModulus::new(1.0).is_err());
        assert!(EllipticModulus::new(-0.1).is_err());
        assert!(EllipticModulus::from_complement(0.0).is_err());
        assert!(jacobi_sn(f64::NAN, modulus(0.3)).is_err());
    }

    #[test]
    fn tiny_complement_keeps_precision() {
        // kappa rounds to 1 in f64 but K and sc stay finite
        let m = EllipticModulus::from_complement(1e-12).unwrap();
        assert_eq!(m.kappa(), 1.0);
        let quarter = complete_k(m);
        assert!((quarter - (4e12f64).ln()).abs() < 1e-10);
        let sc = jacobi_sc(quarter / 3.0, m).unwrap();
        assert!(sc.is_finite() && sc > 0.0);
    }

    #[test]
    fn monotone_k_sweep() {
        let values: Vec<f64> = (0..100).map(|i| complete_k(modulus(i as f64 / 100.0))).collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]));
        assert!(values[0] >= FRAC_PI_2);
    }

    proptest! {
        #[test]
        fn pythagorean(u in -20.0f64..20.0, kappa in 0.0f64..0.9999999) {
            let (sn, cn) = jacobi_sn_cn(u, modulus(kappa)).unwrap();
            prop_assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
            prop_assert!(sn.abs() <= 1.0);
        }

        #[test]
        fn periodic(u in -5.0f64..5.0, kappa in 0.0f64..0.999) {
            let m = modulus(kappa);
            let shifted = jacobi_sn(u + 4.0 * complete_k(m), m).unwrap();
            prop_assert!((shifted - jacobi_sn(u, m).unwrap()).abs() < 1e-10);
        }

        #[test]
        fn odd_in_argument(u in 0.0f64..5.0, kappa in 0.0f64..0.999) {
            let m = modulus(kappa);
            prop_assert!((jacobi_sn(-u, m).unwrap() + jacobi_sn(u, m).unwrap()).abs() < 1e-13);
        }
    }
}
