//! Type (3, 2) minimax fit to ReLU, used to initialize rational activations.

use ratnet::classic::minimax_rational;
use ratnet::nn::{RATIONAL_INIT_DENOM, RATIONAL_INIT_NUMER};
use ratnet::ratfun::{relu, Interval};

fn main() -> ratnet::Result<()> {
    let fit = minimax_rational(relu, (3, 2), Interval::symmetric())?;
    println!("iterations {}, level {:.6e}", fit.iterations, fit.level.abs());
    println!("reference {:?}", fit.reference.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>());
    println!("numer  {:?}  (stored {:?})", fit.rational.numer(), RATIONAL_INIT_NUMER);
    println!("denom  {:?}  (stored {:?})", fit.rational.denom(), RATIONAL_INIT_DENOM);
    Ok(())
}
