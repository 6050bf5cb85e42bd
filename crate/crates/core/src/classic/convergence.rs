use std::fmt;
use std::str::FromStr;

use super::best_poly::best_poly_relu;
use super::newman::newman_relu;
use crate::error::{Error, Result};
use crate::ratfun::{relu, sup_error, Interval, DEFAULT_GRID};
use crate::zolotarev::{compose_stages, relu_gap, MAX_STAGES};

/// Budget at and above which families are compared against each other.
pub const ORDERING_FROM: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Zolotarev,
    Newman,
    BestPoly,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Zolotarev, Family::Newman, Family::BestPoly];

    pub fn name(self) -> &'static str {
        match self {
            Family::Zolotarev => "zolotarev",
            Family::Newman => "newman",
            Family::BestPoly => "best_poly",
        }
    }

    /// 7p for `p = 1..4` stages; Newman `N ∈ {6, 9, 16, 25, 36}`; polynomial
    /// degrees `{4, 8, 13, 16, 32}`. The 14-parameter entries line the families up.
    pub fn default_budgets(self) -> Vec<usize> {
        match self {
            Family::Zolotarev => vec![7, 14, 21, 28],
            Family::Newman => [6, 9, 16, 25, 36].iter().map(|n| 2 * (n + 1)).collect(),
            Family::BestPoly => [4, 8, 13, 16, 32].iter().map(|d| d + 1).collect(),
        }
    }

    /// Largest configuration whose parameter count fits in `budget`.
    fn config_for(self, budget: usize) -> Result<usize> {
        let (config, min_budget) = match self {
            Family::Zolotarev => ((budget / 7).min(MAX_STAGES), 7),
            Family::Newman => ((budget / 2).saturating_sub(1), 10),
            Family::BestPoly => (budget.saturating_sub(1), 2),
        };
        if budget < min_budget {
            return Err(Error::Range(format!("{} needs at least {min_budget} parameters, got {budget}", self.name())));
        }
        Ok(config)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|family| family.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub family: Family,
    pub param_count: usize,
    pub sup_error: f64,
}

/// ReLU approximant `½(x r(x) + x)` with `p` composed stages and
/// `ell = 4 exp(-pi sqrt(3^p/2))`.
pub fn zolotarev_relu(stages: usize) -> Result<impl Fn(f64) -> f64> {
    let sign = compose_stages(stages, relu_gap(stages))?;
    Ok(move |x: f64| 0.5 * (x * sign.value(x) + x))
}

fn measure(family: Family, config: usize) -> Result<ConvergenceRow> {
    let sym = Interval::symmetric();
    let (param_count, report) = match family {
        Family::Zolotarev => (7 * config, sup_error(relu, zolotarev_relu(config)?, sym, DEFAULT_GRID)?),
        Family::Newman => {
            let newman = newman_relu(config)?;
            (newman.param_count(), sup_error(relu, |x| newman.relu_value(x), sym, DEFAULT_GRID)?)
        }
        Family::BestPoly => {
            let poly = best_poly_relu(config)?;
            (poly.param_count(), sup_error(relu, |x| poly.value(x), sym, DEFAULT_GRID)?)
        }
    };
    Ok(ConvergenceRow { family, param_count, sup_error: report.max_abs_error })
}

/// One row per distinct configuration reachable within the budgets, sorted by parameters.
pub fn convergence_table(family: Family, budgets: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut configs = budgets.iter().map(|&b| family.config_for(b)).collect::<Result<Vec<_>>>()?;
    configs.sort_unstable();
    configs.dedup();
    configs.into_iter().map(|config| measure(family, config)).collect()
}

/// Checks monotone decrease within each family and, for every budget at or
/// above [`ORDERING_FROM`], `zolotarev <= newman <= best_poly` on the best
/// error reachable within that budget.
pub fn check_ordering(rows: &[ConvergenceRow]) -> std::result::Result<(), String> {
    for family in Family::ALL {
        let errors: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.family == family).collect();
        for pair in errors.windows(2) {
            if pair[1].param_count >= pair[0].param_count && pair[1].sup_error > pair[0].sup_error {
                return Err(format!(
                    "{family}: error rises from {:e} at {} to {:e} at {} parameters",
                    pair[0].sup_error, pair[0].param_count, pair[1].sup_error, pair[1].param_count
                ));
            }
        }
    }
    let envelope = |family: Family, budget: usize| {
        rows.iter().filter(|r| r.family == family && r.param_count <= budget).map(|r| r.sup_error).reduce(f64::min)
    };
    let mut budgets: Vec<usize> = rows.iter().map(|r| r.param_count).filter(|&p| p >= ORDERING_FROM).collect();
    budgets.sort_unstable();
    budgets.dedup();
    for budget in budgets {
        let chain: Vec<(Family, f64)> =
            Family::ALL.into_iter().filter_map(|family| envelope(family, budget).map(|e| (family, e))).collect();
        for pair in chain.windows(2) {
            if pair[0].1 > pair[1].1 {
                return Err(format!(
                    "at {budget} parameters {} ({:e}) exceeds {} ({:e})",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                ));
            }
        }
    }
    Ok(())
}
