//! Rational network for a random piecewise-linear function.

use ratnet::constructive::{piecewise_network, PiecewiseLinear};
use ratnet::ratfun::{sup_error, Interval, DEFAULT_GRID};

fn main() -> ratnet::Result<()> {
    let g = PiecewiseLinear::random(5, 3.0, 0)?;
    println!("breakpoints {:?}", g.breakpoints());
    println!("slopes      {:?}", g.slopes());
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        match piecewise_network(&g, eps) {
            Ok(net) => {
                let err = sup_error(|x| g.value(x), |x| net.value(x), Interval::unit(), DEFAULT_GRID)?;
                println!("eps={eps:.0e} size={:>3} depth={} err={:.3e}", net.size(), net.depth(), err.max_abs_error);
            }
            // per-hinge tolerance eps/(2L) would need a fourth stage
            Err(e) => println!("eps={eps:.0e} rejected: {e}"),
        }
    }
    Ok(())
}
