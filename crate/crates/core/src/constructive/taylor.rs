use super::builder::{Linear, NetBuilder};
use super::gadgets::network_approximant;
use super::network::RationalNetwork;
use super::piecewise::{piecewise_into, PiecewiseLinear};
use crate::error::{Error, Result};
use crate::ratfun::Interval;

pub const MAX_DIM: usize = 2;
pub const MAX_ORDER: usize = 4;

/// Radix of the monomial subnetworks.
const MONOMIAL_RADIX: u32 = 3;

/// Partial derivative `D^alpha f(x)`; `alpha.len() == x.len() == d`.
pub type Derivatives<'a> = &'a dyn Fn(&[usize], &[f64]) -> f64;

/// Local Taylor network with its construction parameters.
#[derive(Debug, Clone)]
pub struct TaylorNetwork {
    pub network: RationalNetwork,
    /// Grid resolution `N`; there are `(N+1)^d` local expansions.
    pub grid_size: usize,
    /// Tolerance for each partition factor.
    pub delta: f64,
    pub stages_per_hinge: usize,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `N = ceil((n! / (2^d d^n) * eps/2)^(-1/n))`
pub fn taylor_grid_size(d: usize, n: usize, epsilon: f64) -> usize {
    let scale = factorial(n) / (2f64.powi(d as i32) * (d as f64).powi(n as i32)) * epsilon / 2.0;
    scale.powf(-1.0 / n as f64).ceil() as usize
}

/// `delta = eps / (2^{d+1} d^{n+1})`
pub fn partition_tolerance(d: usize, n: usize, epsilon: f64) -> f64 {
    epsilon / (2f64.powi(d as i32 + 1) * (d as f64).powi(n as i32 + 1))
}

/// Trapezoid bump centred at `m/N`: 1 within `1/(3N)`, 0 beyond `2/(3N)`.
pub fn partition_function(m: usize, grid_size: usize, x: f64) -> f64 {
    let n = grid_size as f64;
    (2.0 - 3.0 * n * (x - m as f64 / n).abs()).clamp(0.0, 1.0)
}

/// The bump as a piecewise-linear function on [0, 1]; its slope is `3N`.
pub fn partition_piecewise(m: usize, grid_size: usize) -> Result<PiecewiseLinear> {
    let n = grid_size as f64;
    let centre = m as f64 / n;
    let mut xs: Vec<f64> =
        [-2.0, -1.0, 1.0, 2.0].iter().map(|t| centre + t / (3.0 * n)).filter(|x| *x > 0.0 && *x < 1.0).collect();
    xs.insert(0, 0.0);
    xs.push(1.0);
    let knots: Vec<(f64, f64)> = xs.iter().map(|&x| (x, partition_function(m, grid_size, x))).collect();
    PiecewiseLinear::from_knots(&knots, 3.0 * n)
}

/// Multi-indices with `|alpha| < n` in `d` variables.
fn multi_indices(d: usize, n: usize) -> Vec<Vec<usize>> {
    match d {
        1 => (0..n).map(|j| vec![j]).collect(),
        _ => (0..n).flat_map(|a| (0..n - a).map(move |b| vec![a, b])).collect(),
    }
}

/// Grid points `m in {0..N}^d`.
fn grid_points(d: usize, grid_size: usize) -> Vec<Vec<usize>> {
    let axis = 0..=grid_size;
    match d {
        1 => axis.map(|m| vec![m]).collect(),
        _ => axis.clone().flat_map(|a| (0..=grid_size).map(move |b| vec![a, b])).collect(),
    }
}

fn check_dims(d: usize, n: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidArgument(format!("dimension {d} outside 1..={MAX_DIM}")));
    }
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order {n} outside 1..={MAX_ORDER}")));
    }
    Ok(())
}

/// Exact `f_N(x) = sum_m phi_m(x) P_m(x)` before any rational substitution.
pub fn local_taylor_value(f: Derivatives, d: usize, n: usize, grid_size: usize, x: &[f64]) -> f64 {
    let inv = 1.0 / grid_size as f64;
    grid_points(d, grid_size)
        .iter()
        .map(|m| {
            let phi: f64 = m.iter().zip(x).map(|(&mk, &xk)| partition_function(mk, grid_size, xk)).product();
            if phi == 0.0 {
                return 0.0;
            }
            let centre: Vec<f64> = m.iter().map(|&mk| mk as f64 * inv).collect();
            let poly: f64 = multi_indices(d, n)
                .iter()
                .map(|alpha| {
                    let weight = alpha.iter().map(|&a| factorial(a)).product::<f64>();
                    let shift: f64 = alpha
                        .iter()
                        .zip(x.iter().zip(&centre))
                        .map(|(&a, (xk, ck))| (xk - ck).powi(a as i32))
                        .product();
                    f(alpha, &centre) / weight * shift
                })
                .sum();
            phi * poly
        })
        .sum()
}

/// Rational network within `epsilon` of `f` on `[0,1]^d`, for `f` in the
/// unit ball of order-`n` smoothness.
pub fn taylor_network(f: Derivatives, d: usize, n: usize, epsilon: f64) -> Result<TaylorNetwork> {
    check_dims(d, n)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {epsilon} not in (0, 1)")));
    }
    let grid_size = taylor_grid_size(d, n, epsilon);
    let delta = partition_tolerance(d, n, epsilon);
    let inv = 1.0 / grid_size as f64;
    // all bumps share L = 3N, so one approximant serves every hinge
    let approx = network_approximant(delta / (2.0 * 3.0 * grid_size as f64))?;

    let mut builder = NetBuilder::new(d);
    let mut bumps: Vec<Vec<Linear>> = Vec::with_capacity(d);
    // powers[k][m][j] = (x_k - m/N)^j
    let mut powers: Vec<Vec<Vec<Linear>>> = Vec::with_capacity(d);
    for k in 0..d {
        let x = Linear::input(k);
        let mut axis_bumps = Vec::with_capacity(grid_size + 1);
        let mut axis_powers = Vec::with_capacity(grid_size + 1);
        for m in 0..=grid_size {
            let psi = partition_piecewise(m, grid_size)?;
            let bump = piecewise_into(&mut builder, x.clone(), &psi, &approx);
            axis_bumps.push(builder.materialize(bump));
            let shifted = x.clone() + (-(m as f64) * inv);
            let mut row = Vec::with_capacity(n);
            for j in 0..n as u32 {
                row.push(builder.monomial(shifted.clone(), j, MONOMIAL_RADIX));
            }
            axis_powers.push(row);
        }
        bumps.push(axis_bumps);
        powers.push(axis_powers);
    }

    let mut out = Linear::constant(0.0);
    for m in grid_points(d, grid_size) {
        let centre: Vec<f64> = m.iter().map(|&mk| mk as f64 * inv).collect();
        let mut poly = Linear::constant(0.0);
        for alpha in multi_indices(d, n) {
            let coeff = f(&alpha, &centre) / alpha.iter().map(|&a| factorial(a)).product::<f64>();
            let mut term = powers[0][m[0]][alpha[0]].clone();
            for k in 1..d {
                let factor = powers[k][m[k]][alpha[k]].clone();
                term = if alpha[k] == 0 {
                    term
                } else if alpha[0] == 0 && k == 1 {
                    factor
                } else {
                    builder.multiply(term, factor)
                };
            }
            poly = poly + term * coeff;
        }
        let mut phi = bumps[0][m[0]].clone();
        for k in 1..d {
            phi = builder.multiply(phi, bumps[k][m[k]].clone());
        }
        let poly = builder.materialize(poly);
        out = out + builder.multiply(phi, poly);
    }
    let network = builder.compile(&[out], Interval::symmetric())?;
    Ok(TaylorNetwork { network, grid_size, delta, stages_per_hinge: approx.stage_count() })
}

/// Max error against `target` on a tensor Chebyshev grid of `[0,1]^d`.
pub fn grid_error(network: &RationalNetwork, target: impl Fn(&[f64]) -> f64, per_axis: usize) -> f64 {
    let axis = Interval::unit().chebyshev_grid(per_axis);
    let points: Vec<Vec<f64>> = match network.input_dim() {
        1 => axis.iter().map(|&x| vec![x]).collect(),
        _ => axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect(),
    };
    points.iter().map(|p| (network.forward_unchecked(p)[0] - target(p)).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_shift(_: &[usize], x: &[f64]) -> f64 {
        (x[0] - 1.0).exp()
    }

    #[test]
    fn grid_size_formula() {
        assert_eq!(taylor_grid_size(1, 3, 1e-2), 5);
        assert_eq!(taylor_grid_size(1, 2, 0.1), 5);
        assert_eq!(partition_tolerance(1, 3, 1e-2), 2.5e-3);
    }

    #[test]
    fn partition_of_unity() {
        for d in 1..=2 {
            let grid_size = 5;
            let axis = Interval::unit().chebyshev_grid(97);
            for &x in &axis {
                for &y in axis.iter().take(if d == 1 { 1 } else { axis.len() }) {
                    let point = [x, y];
                    let total: f64 = grid_points(d, grid_size)
                        .iter()
                        .map(|m| {
                            m.iter()
                                .zip(&point)
                                .map(|(&mk, &xk)| partition_function(mk, grid_size, xk))
                                .product::<f64>()
                        })
                        .sum();
                    assert!((total - 1.0).abs() < 1e-12, "{point:?}");
                }
            }
        }
    }

    #[test]
    fn bump_piecewise_matches_closed_form() {
        for m in 0..=5 {
            let psi = partition_piecewise(m, 5).unwrap();
            for x in Interval::unit().chebyshev_grid(501) {
                assert!((psi.value(x) - partition_function(m, 5, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_form_error() {
        let grid_size = taylor_grid_size(1, 3, 1e-2);
        let worst = Interval::unit()
            .chebyshev_grid(2001)
            .iter()
            .map(|&x| (local_taylor_value(&exp_shift, 1, 3, grid_size, &[x]) - (x - 1.0).exp()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 5e-3, "{worst}");
    }

    #[test]
    fn identity_target() {
        let f = |alpha: &[usize], x: &[f64]| match alpha[0] {
            0 => x[0],
            1 => 1.0,
            _ => 0.0,
        };
        let built = taylor_network(&f, 1, 2, 0.1).unwrap();
        assert!(grid_error(&built.network, |p| p[0], 2001) <= 0.1);
    }

    #[test]
    fn two_dimensional_product() {
        let f = |alpha: &[usize], x: &[f64]| match (alpha[0], alpha[1]) {
            (0, 0) => x[0] * x[1],
            (1, 0) => x[1],
            (0, 1) => x[0],
            (1, 1) => 1.0,
            _ => 0.0,
        };
        let eps = 0.5;
        let built = taylor_network(&f, 2, 2, eps).unwrap();
        assert_eq!(built.grid_size, 6);
        assert!(grid_error(&built.network, |p| p[0] * p[1], 41) <= eps);
    }

    #[test]
    fn rejects_large_dimension() {
        assert!(taylor_network(&exp_shift, 3, 2, 0.1).is_err());
        assert!(taylor_network(&exp_shift, 1, 5, 0.1).is_err());
    }
}
