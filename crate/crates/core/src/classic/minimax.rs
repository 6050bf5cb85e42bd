use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::best_poly::alternating_extrema;
use crate::error::{Error, Result};
use crate::ratfun::{horner, pole_check, Interval, RationalFunction};

const EXCHANGE_GRID: usize = 20_001;
const MAX_ITERATIONS: usize = 60;
const CONVERGED: f64 = 1e-10;
const LEVEL_SLACK: f64 = 0.05;

/// Numerator, denominator and signed level of one levelled solve.
type Candidate = (Vec<f64>, Vec<f64>, f64);

/// Converged minimax rational with its final reference set.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxFit {
    pub rational: RationalFunction,
    /// Signed level `E` from the last levelled solve.
    pub level: f64,
    /// Max error on the exchange grid.
    pub max_error: f64,
    pub reference: Vec<f64>,
    pub iterations: usize,
}

/// Best rational approximation of type `(r_P, r_Q)` by Remez exchange.
///
/// Each step solves the levelled interpolation `P(x_i) = (f(x_i) - s_i E) Q(x_i)`
/// on `r_P + r_Q + 2` reference points as a small eigenproblem in `E`, keeps the
/// pole-free root of smallest `|E|`, and moves the reference to the alternating
/// extrema of the error. Denominators are normalized to `Q(0) = 1` when `Q(0)`
/// is not negligible, otherwise to a unit leading coefficient.
pub fn minimax_rational(
    f: impl Fn(f64) -> f64,
    (num_deg, den_deg): (usize, usize),
    interval: Interval,
) -> Result<MinimaxFit> {
    if num_deg + den_deg > 12 {
        return Err(Error::InvalidArgument(format!("type ({num_deg}, {den_deg}) too large")));
    }
    let points = num_deg + den_deg + 2;
    let grid = interval.chebyshev_grid(EXCHANGE_GRID);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation { x: grid[i] });
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let screen = interval.chebyshev_grid(2001);
    // interior (first-kind) Chebyshev nodes: a symmetric start that includes the
    // endpoints lets even targets interpolate exactly and lose an alternation
    let (mid, half) = (0.5 * (interval.lo() + interval.hi()), 0.5 * (interval.hi() - interval.lo()));
    let mut reference: Vec<f64> = (0..points)
        .map(|i| mid - half * (std::f64::consts::PI * (2 * i + 1) as f64 / (2 * points) as f64).cos())
        .collect();

    for iteration in 1..=MAX_ITERATIONS {
        let ref_values: Vec<f64> = reference.iter().map(|&x| f(x)).collect();
        let candidates = levelled_solutions(&reference, &ref_values, num_deg, den_deg, &screen)?;
        let mut deficit = 0;
        let mut advanced = None;
        // smallest |E| first; a spurious near-interpolant shows up as an alternation deficit
        for (numer, denom, level) in candidates {
            let err: Vec<f64> =
                grid.iter().zip(&values).map(|(&x, &v)| v - horner(&numer, x) / horner(&denom, x)).collect();
            let max_error = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            let exact = max_error <= 1e-12 * scale;
            if exact || max_error - level.abs() < CONVERGED * max_error {
                let rational = normalized(numer, denom)?;
                if !pole_check(&rational, interval, EXCHANGE_GRID) {
                    return Err(Error::Numeric("denominator has a near-zero on the interval".into()));
                }
                if !exact && max_error > (1.0 + LEVEL_SLACK) * level.abs() {
                    return Err(Error::Numeric(format!("max error {max_error:e} far from level {level:e}")));
                }
                return Ok(MinimaxFit { rational, level, max_error, reference, iterations: iteration });
            }
            let next = alternating_extrema(&err, points);
            if next.len() == points {
                advanced = Some(next);
                break;
            }
            deficit = deficit.max(next.len());
        }
        match advanced {
            Some(next) => reference = next.into_iter().map(|i| grid[i]).collect(),
            None => {
                return Err(Error::Numeric(format!("at most {deficit} alternations for {points} reference points")))
            }
        }
    }
    Err(Error::Numeric(format!("exchange did not converge in {MAX_ITERATIONS} iterations")))
}

fn vandermonde(xs: &[f64], degree: usize) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powi(j as i32))
}

/// Eliminates the numerator through the left null space of its Vandermonde
/// block, leaving `C b = E D b` on the denominator coefficients.
/// Pole-free solutions are returned in order of increasing `|E|`.
fn levelled_solutions(
    xs: &[f64],
    fx: &[f64],
    num_deg: usize,
    den_deg: usize,
    screen: &[f64],
) -> Result<Vec<Candidate>> {
    let n = xs.len();
    let vp = vandermonde(xs, num_deg);
    let vq = vandermonde(xs, den_deg);
    let gram = vp.transpose() * &vp;
    let gram_inv = gram.try_inverse().ok_or_else(|| Error::Numeric("singular numerator Vandermonde block".into()))?;
    let projector = DMatrix::identity(n, n) - &vp * gram_inv * vp.transpose();
    let eig = SymmetricEigen::new(projector);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let null = DMatrix::from_fn(n, den_deg + 1, |i, j| eig.eigenvectors[(i, order[j])]);

    let signs = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
    let fvec = DVector::from_column_slice(fx);
    let c = -(null.transpose() * DMatrix::from_diagonal(&fvec) * &vq);
    let d = -(null.transpose() * DMatrix::from_diagonal(&signs) * &vq);
    let d_inv = d.clone().try_inverse().ok_or_else(|| Error::Numeric("singular level matrix".into()))?;
    let eigenvalues = (&d_inv * &c).complex_eigenvalues();

    let mut found: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    for lambda in eigenvalues.iter() {
        let level = lambda.re;
        if !level.is_finite() || lambda.im.abs() > 1e-9 * level.abs().max(1.0) {
            continue;
        }
        let denom = null_vector(&(&c - &d * level));
        let q: Vec<f64> = screen.iter().map(|&x| horner(&denom, x)).collect();
        if !(q.iter().all(|&v| v > 0.0) || q.iter().all(|&v| v < 0.0)) {
            continue;
        }
        let rhs = DVector::from_fn(n, |i, _| (fx[i] - signs[i] * level) * horner(&denom, xs[i]));
        let numer = vp.clone().svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::Numeric(e.to_string()))?;
        found.push((numer.iter().copied().collect(), denom, level));
    }
    if found.is_empty() {
        return Err(Error::Numeric("no pole-free levelled solution on the reference".into()));
    }
    found.sort_by(|a, b| a.2.abs().total_cmp(&b.2.abs()));
    Ok(found)
}

/// Right singular vector of the smallest singular value.
fn null_vector(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let idx = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    v_t.row(idx).iter().copied().collect()
}

fn normalized(mut numer: Vec<f64>, mut denom: Vec<f64>) -> Result<RationalFunction> {
    let biggest = denom.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let pivot = if denom[0].abs() > 1e-8 * biggest { denom[0] } else { *denom.last().unwrap() };
    numer.iter_mut().for_each(|a| *a /= pivot);
    denom.iter_mut().for_each(|b| *b /= pivot);
    RationalFunction::new(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfun::relu;

    #[test]
    fn relu_three_two() {
        let fit = minimax_rational(relu, (3, 2), Interval::symmetric()).unwrap();
        let a = fit.rational.numer();
        let b = fit.rational.denom();
        for (got, want) in a.iter().zip([0.02184451, 0.5, 1.59574392, 1.19148786]) {
            assert!((got - want).abs() < 1e-6, "{a:?}");
        }
        assert!((b[0] - 1.0).abs() < 1e-15 && b[1].abs() < 1e-6 && (b[2] - 2.38297571).abs() < 1e-6);
        assert!((fit.level.abs() - 0.021844).abs() < 1e-5);
        assert_eq!(fit.reference.len(), 7);
    }

    #[test]
    fn residual_alternates_on_reference() {
        let fit = minimax_rational(relu, (3, 2), Interval::symmetric()).unwrap();
        let signs: Vec<f64> = fit.reference.iter().map(|&x| (relu(x) - fit.rational.value(x)).signum()).collect();
        assert!(signs.windows(2).all(|w| w[0] == -w[1]));
    }

    #[test]
    fn recovers_exact_rational() {
        let target = |x: f64| (1.0 + 0.5 * x - 0.25 * x * x) / (2.0 + x);
        let fit = minimax_rational(target, (2, 1), Interval::symmetric()).unwrap();
        assert!(fit.max_error <= 1e-10);
        let b = fit.rational.denom();
        assert!((b[1] / b[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn abs_four_four_is_even() {
        let fit = minimax_rational(f64::abs, (4, 4), Interval::symmetric()).unwrap();
        for coeffs in [fit.rational.numer(), fit.rational.denom()] {
            let size = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            for odd in coeffs.iter().skip(1).step_by(2) {
                assert!(odd.abs() <= 1e-8 * size, "{coeffs:?}");
            }
        }
    }
}
