use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::checkpoint::{save, write_atomic, Checkpoint};
use super::config::ExperimentConfig;
use crate::classic::{check_ordering, convergence_table, ConvergenceRow, Family};
use crate::constructive::{
    grid_error, monomial_network, monomial_size_bound, piecewise_network, random_relu_network, ratify_relu_network,
    relu_approx_network, taylor_grid_size, taylor_network, PiecewiseLinear, RationalNetwork, ToleranceSchedule,
};
use crate::error::Result;
use crate::nn::{split, train, ActivationKind, DenseRationalNet, History};
use crate::ratfun::{relu, sup_error, Interval, DEFAULT_GRID};
use crate::zolotarev::stage_count_for;

pub struct Fig1Outcome {
    pub rows: Vec<ConvergenceRow>,
    pub ordering: std::result::Result<(), String>,
}

pub fn fig1_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("family,param_count,sup_error\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{:.16e}", row.family, row.param_count, row.sup_error);
    }
    out
}

/// Sup errors to ReLU for each family; empty `budgets` means each family's defaults.
pub fn cmd_fig1(out: &Path, families: &[Family], budgets: &[usize]) -> Result<Fig1Outcome> {
    let families = if families.is_empty() { Family::ALL.to_vec() } else { families.to_vec() };
    let mut rows = Vec::new();
    for family in families {
        let budgets = if budgets.is_empty() { family.default_budgets() } else { budgets.to_vec() };
        rows.extend(convergence_table(family, &budgets)?);
    }
    write_atomic(out, &fig1_csv(&rows))?;
    let ordering = check_ordering(&rows);
    Ok(Fig1Outcome { rows, ordering })
}

pub struct TrainRun {
    pub kind: ActivationKind,
    pub param_count: usize,
    pub history: History,
    pub csv_path: PathBuf,
}

pub struct CompareOutcome {
    pub runs: Vec<TrainRun>,
}

impl CompareOutcome {
    pub fn final_val(&self, kind: ActivationKind) -> Option<f64> {
        self.runs.iter().find(|r| r.kind == kind).and_then(|r| r.history.final_val())
    }

    pub fn rational_beats_relu(&self) -> bool {
        matches!(
            (self.final_val(ActivationKind::Rational), self.final_val(ActivationKind::Relu)),
            (Some(rational), Some(relu)) if rational < relu
        )
    }
}

/// `<stem>_<activation>.csv` next to `out`.
pub fn history_path(out: &Path, kind: ActivationKind) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "train".into());
    out.with_file_name(format!("{stem}_{kind}.csv"))
}

/// Trains one net per activation kind on identical data, seed and
/// architecture. Writes each loss history and a summary to `out`.
pub fn cmd_train_compare(config: &ExperimentConfig, kinds: &[ActivationKind], out: &Path) -> Result<CompareOutcome> {
    config.validate()?;
    let seed = config.train.seed;
    let samples = config.target.sample(config.train_count + config.val_count, seed);
    let (train_set, val_set) = split(samples, config.train_count, seed)?;
    let mut runs = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut net = DenseRationalNet::new(&config.architecture, kind, seed)?;
        if config.pole_bound != net.pole_bound() {
            net = DenseRationalNet::from_parts(
                net.dims().to_vec(),
                net.weights().to_vec(),
                net.biases().to_vec(),
                net.activations().to_vec(),
                config.pole_bound,
            )?;
        }
        let param_count = net.trainable_param_count();
        let (_, history) = train(net, &train_set, &val_set, &config.train)?;
        let csv_path = history_path(out, kind);
        write_atomic(&csv_path, &history.to_csv())?;
        runs.push(TrainRun { kind, param_count, history, csv_path });
    }
    let mut summary = String::from("activation,param_count,final_train_mse,final_val_mse\n");
    for run in &runs {
        let last = run.history.records.last().expect("history holds epoch 0");
        let _ = writeln!(summary, "{},{},{:.16e},{:.16e}", run.kind, run.param_count, last.train_mse, last.val_mse);
    }
    write_atomic(out, &summary)?;
    Ok(CompareOutcome { runs })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstructRequest {
    Monomial {
        n: u32,
        radix: u32,
    },
    Piecewise {
        breakpoints: usize,
        lipschitz: f64,
        epsilon: f64,
        seed: u64,
    },
    /// `exp(x - 1)` on [0, 1]
    Taylor {
        order: usize,
        epsilon: f64,
    },
    Ratify {
        input_dim: usize,
        widths: Vec<usize>,
        epsilon: f64,
        seed: u64,
    },
    ReluApprox {
        epsilon: f64,
    },
}

pub struct ConstructOutcome {
    pub network: RationalNetwork,
    /// `key=value` lines describing the build.
    pub report: Vec<String>,
    pub certified_error: f64,
    pub passed: bool,
}

fn basic_report(network: &RationalNetwork, certified_error: f64) -> Vec<String> {
    vec![
        format!("size={}", network.size()),
        format!("depth={}", network.depth()),
        format!("activation_params={}", network.activation_param_count()),
        format!("certified_error={certified_error:.6e}"),
    ]
}

/// Builds the requested network, certifies it on a grid, and optionally
/// writes it as a checkpoint.
pub fn cmd_construct(request: &ConstructRequest, out: Option<&Path>) -> Result<ConstructOutcome> {
    let outcome = match request {
        ConstructRequest::Monomial { n, radix } => {
            let network = monomial_network(*n, *radix)?;
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let worst = (0..1000)
                .map(|_| {
                    let x: f64 = rng.random_range(-2.0..2.0);
                    let want = x.powi(*n as i32);
                    ((network.value(x) - want) / want).abs()
                })
                .fold(0.0, f64::max);
            let bound = monomial_size_bound(*n, *radix);
            let passed = worst <= 1e-10 && network.size() <= bound;
            let mut report = basic_report(&network, worst);
            report.push(format!("size_bound={bound}"));
            report.push(format!("exact={}", if worst <= 1e-10 { "pass" } else { "fail" }));
            ConstructOutcome { network, report, certified_error: worst, passed }
        }
        ConstructRequest::Piecewise { breakpoints, lipschitz, epsilon, seed } => {
            let g = PiecewiseLinear::random(*breakpoints, *lipschitz, *seed)?;
            let network = piecewise_network(&g, *epsilon)?;
            let err = sup_error(|x| g.value(x), |x| network.value(x), Interval::unit(), DEFAULT_GRID)?.max_abs_error;
            let mut report = basic_report(&network, err);
            report.push(format!("stages_per_hinge={}", stage_count_for(g.hinge_tolerance(*epsilon))));
            ConstructOutcome { network, report, certified_error: err, passed: err <= *epsilon }
        }
        ConstructRequest::Taylor { order, epsilon } => {
            let derivs = |_: &[usize], x: &[f64]| (x[0] - 1.0).exp();
            let built = taylor_network(&derivs, 1, *order, *epsilon)?;
            let err = grid_error(&built.network, |p| (p[0] - 1.0).exp(), DEFAULT_GRID);
            let mut report = basic_report(&built.network, err);
            report.push(format!("grid_n={}", built.grid_size));
            report.push(format!("stages_per_hinge={}", built.stages_per_hinge));
            debug_assert_eq!(built.grid_size, taylor_grid_size(1, *order, *epsilon));
            ConstructOutcome { network: built.network, report, certified_error: err, passed: err <= *epsilon }
        }
        ConstructRequest::Ratify { input_dim, widths, epsilon, seed } => {
            let relu_net = random_relu_network(*input_dim, widths, *seed)?;
            let conversion = ratify_relu_network(&relu_net, *epsilon, ToleranceSchedule::Flat)?;
            let err = relu_net_gap(&relu_net, &conversion.network, *seed);
            let mut report = basic_report(&conversion.network, err);
            report.push(format!("stages_per_activation={}", conversion.stages_per_layer[0]));
            report.push(format!("original_params={}", conversion.original_param_count));
            report.push(format!("trainable_params={}", conversion.trainable_param_count()));
            ConstructOutcome { network: conversion.network, report, certified_error: err, passed: err <= *epsilon }
        }
        ConstructRequest::ReluApprox { epsilon } => {
            let network = relu_approx_network(*epsilon)?;
            let err = sup_error(relu, |x| network.value(x), Interval::symmetric(), DEFAULT_GRID)?.max_abs_error;
            let k = stage_count_for(*epsilon);
            let mut report =
                vec![format!("k={k}"), format!("stages={k}"), format!("params={}", network.activation_param_count())];
            report.extend(basic_report(&network, err));
            ConstructOutcome { network, report, certified_error: err, passed: err <= *epsilon }
        }
    };
    if let Some(path) = out {
        save(path, &Checkpoint::Graph(outcome.network.clone()))?;
    }
    Ok(outcome)
}

/// Max gap between two networks on `[-1, 1]^d`: a Chebyshev grid for
/// `d <= 2` plus 10^4 seeded random points.
pub fn relu_net_gap(reference: &RationalNetwork, candidate: &RationalNetwork, seed: u64) -> f64 {
    let dim = reference.input_dim();
    let gap = |p: &[f64]| (reference.forward_unchecked(p)[0] - candidate.forward_unchecked(p)[0]).abs();
    let mut worst: f64 = match dim {
        1 => Interval::symmetric().chebyshev_grid(10_000).iter().map(|&x| gap(&[x])).fold(0.0, f64::max),
        2 => {
            let axis = Interval::symmetric().chebyshev_grid(201);
            axis.iter().flat_map(|&a| axis.iter().map(move |&b| [a, b])).map(|p| gap(&p)).fold(0.0, f64::max)
        }
        _ => 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for _ in 0..10_000 {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        worst = worst.max(gap(&p));
    }
    worst
}
