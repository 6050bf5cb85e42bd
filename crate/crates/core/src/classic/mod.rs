//! Baselines for the parameter-efficiency comparison: Newman rationals,
//! minimax polynomials and low-type minimax rationals.

mod best_poly;
mod convergence;
mod minimax;
mod newman;

pub use best_poly::{best_poly, best_poly_relu, BestPolynomial};
pub use convergence::{check_ordering, convergence_table, zolotarev_relu, ConvergenceRow, Family, ORDERING_FROM};
pub use minimax::{minimax_rational, MinimaxFit};
pub use newman::{newman_relu, Newman, MAX_NEWMAN};
