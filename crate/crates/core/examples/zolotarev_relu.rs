//! Composed Zolotarev approximants to ReLU on [-1, 1].

use ratnet::ratfun::{relu, sup_error, Interval, DEFAULT_GRID};
use ratnet::zolotarev::relu_approximant;

fn main() -> ratnet::Result<()> {
    println!("{:>8} {:>6} {:>7} {:>12} {:>12}", "eps", "stages", "params", "ell", "sup_error");
    for eps in [0.3, 0.1, 0.03, 1e-3, 1e-5] {
        let approx = relu_approximant(eps)?;
        let err = sup_error(relu, |x| approx.value(x), Interval::symmetric(), DEFAULT_GRID)?;
        println!(
            "{eps:>8.0e} {:>6} {:>7} {:>12.3e} {:>12.3e}",
            approx.stage_count(),
            approx.param_count(),
            approx.ell(),
            err.max_abs_error
        );
    }
    Ok(())
}
