use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ratfun::{relu, Interval};

pub const WORK_GRID: usize = 10_001;
const MAX_ITERATIONS: usize = 100;
const STAGNATION: f64 = 1e-10;

/// Minimax polynomial stored in the Chebyshev basis of its interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BestPolynomial {
    interval: Interval,
    chebyshev: Vec<f64>,
    error: f64,
    level: f64,
    reference: Vec<f64>,
}

impl BestPolynomial {
    pub fn degree(&self) -> usize {
        self.chebyshev.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.chebyshev.len()
    }

    /// Max error on the working grid.
    pub fn error(&self) -> f64 {
        self.error
    }

    /// Levelled error on the final reference.
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    pub fn chebyshev_coeffs(&self) -> &[f64] {
        &self.chebyshev
    }

    pub fn value(&self, x: f64) -> f64 {
        clenshaw(&self.chebyshev, self.to_unit(x))
    }

    /// Ascending monomial coefficients in `x`. Well conditioned only for low degree.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        let n = self.chebyshev.len();
        let (mid, half) = self.mid_half();
        // T_j(t) in monomials of t, then substitute t = (x - mid)/half
        let mut prev = vec![0.0; n];
        let mut cur = vec![0.0; n];
        prev[0] = 1.0;
        let mut in_t = vec![0.0; n];
        in_t[0] += self.chebyshev[0];
        if n > 1 {
            cur[1] = 1.0;
            for (acc, c) in in_t.iter_mut().zip(&cur) {
                *acc += self.chebyshev[1] * c;
            }
        }
        for j in 2..n {
            let mut next = vec![0.0; n];
            for i in 0..n - 1 {
                next[i + 1] += 2.0 * cur[i];
            }
            for i in 0..n {
                next[i] -= prev[i];
            }
            for (acc, c) in in_t.iter_mut().zip(&next) {
                *acc += self.chebyshev[j] * c;
            }
            prev = std::mem::replace(&mut cur, next);
        }
        // t^i = ((x - mid)/half)^i expanded by repeated multiplication
        let mut out = vec![0.0; n];
        let mut power = vec![1.0];
        for coeff in in_t {
            for (o, p) in out.iter_mut().zip(&power) {
                *o += coeff * p;
            }
            let mut next = vec![0.0; power.len() + 1];
            for (i, p) in power.iter().enumerate() {
                next[i] -= mid / half * p;
                next[i + 1] += p / half;
            }
            power = next;
        }
        out
    }

    fn mid_half(&self) -> (f64, f64) {
        let (lo, hi) = (self.interval.lo(), self.interval.hi());
        (0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    fn to_unit(&self, x: f64) -> f64 {
        let (mid, half) = self.mid_half();
        (x - mid) / half
    }
}

fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        (b1, b2) = (2.0 * t * b1 - b2 + c, b1);
    }
    t * b1 - b2 + coeffs[0]
}

fn chebyshev_row(t: f64, degree: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(degree + 1);
    row.push(1.0);
    if degree >= 1 {
        row.push(t);
    }
    for j in 2..=degree {
        row.push(2.0 * t * row[j - 1] - row[j - 2]);
    }
    row
}

/// Local extrema of `err` collapsed into alternating-sign groups (largest
/// magnitude kept per group), trimmed from the weaker end to `want` points.
pub(crate) fn alternating_extrema(err: &[f64], want: usize) -> Vec<usize> {
    let n = err.len();
    let mut groups: Vec<usize> = Vec::new();
    for i in 0..n {
        let is_extremum = i == 0 || i == n - 1 || (err[i] - err[i - 1]) * (err[i + 1] - err[i]) <= 0.0;
        if !is_extremum {
            continue;
        }
        match groups.last_mut() {
            Some(last) if err[*last].signum() == err[i].signum() => {
                if err[i].abs() > err[*last].abs() {
                    *last = i;
                }
            }
            _ => groups.push(i),
        }
    }
    while groups.len() > want {
        if err[groups[0]].abs() < err[*groups.last().unwrap()].abs() {
            groups.remove(0);
        } else {
            groups.pop();
        }
    }
    groups
}

/// Remez exchange for the minimax polynomial of `f` on a discrete Chebyshev grid.
pub fn best_poly(f: impl Fn(f64) -> f64, degree: usize, interval: Interval) -> Result<BestPolynomial> {
    if degree == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let points = degree + 2;
    let grid = interval.chebyshev_grid(WORK_GRID);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation { x: grid[i] });
    }
    let mut reference: Vec<usize> = (0..points).map(|i| i * (WORK_GRID - 1) / (points - 1)).collect();
    let mut poly =
        BestPolynomial { interval, chebyshev: vec![0.0; degree + 1], error: 0.0, level: 0.0, reference: vec![] };

    for _ in 0..MAX_ITERATIONS {
        let mut system = DMatrix::zeros(points, points);
        let mut rhs = DVector::zeros(points);
        for (row, &idx) in reference.iter().enumerate() {
            for (col, v) in chebyshev_row(poly.to_unit(grid[idx]), degree).into_iter().enumerate() {
                system[(row, col)] = v;
            }
            system[(row, degree + 1)] = if row % 2 == 0 { 1.0 } else { -1.0 };
            rhs[row] = values[idx];
        }
        let solution = system.lu().solve(&rhs).ok_or_else(|| Error::Numeric("singular Remez system".into()))?;
        poly.chebyshev = solution.iter().take(degree + 1).copied().collect();
        poly.level = solution[degree + 1].abs();
        poly.reference = reference.iter().map(|&i| grid[i]).collect();

        let err: Vec<f64> = grid.iter().zip(&values).map(|(&x, &v)| v - poly.value(x)).collect();
        poly.error = err.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if poly.error - poly.level <= STAGNATION * poly.error {
            return Ok(poly);
        }
        let next = alternating_extrema(&err, points);
        if next.len() < points {
            return Err(Error::Numeric(format!("alternation deficit at degree {degree}")));
        }
        if next == reference {
            // discrete optimum: the extrema already sit on the reference
            return Ok(poly);
        }
        reference = next;
    }
    Err(Error::Numeric(format!("Remez exchange did not converge in {MAX_ITERATIONS} iterations")))
}

/// Minimax polynomial to ReLU on `[-1, 1]`.
pub fn best_poly_relu(degree: usize) -> Result<BestPolynomial> {
    best_poly(relu, degree, Interval::symmetric())
}
