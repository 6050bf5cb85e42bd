//! Local Taylor networks for smooth functions on [0, 1] and [0, 1]².

use ratnet::constructive::{grid_error, taylor_network};

fn main() -> ratnet::Result<()> {
    let exp_shift = |_: &[usize], x: &[f64]| (x[0] - 1.0).exp();
    for (order, eps) in [(2, 5e-2), (3, 1e-2), (4, 1e-2)] {
        let built = taylor_network(&exp_shift, 1, order, eps)?;
        let err = grid_error(&built.network, |p| (p[0] - 1.0).exp(), 20_001);
        println!(
            "exp(x-1) n={order} eps={eps:.0e}: N={} size={} depth={} err={err:.2e}",
            built.grid_size,
            built.network.size(),
            built.network.depth()
        );
    }

    // f(x, y) = sin(x) cos(y): every partial derivative is a signed sin or cos
    let trig = |alpha: &[usize], p: &[f64]| {
        let d = |k: usize, t: f64, phase: f64| (t + phase + k as f64 * std::f64::consts::FRAC_PI_2).sin();
        d(alpha[0], p[0], 0.0) * d(alpha[1], p[1], std::f64::consts::FRAC_PI_2)
    };
    let built = taylor_network(&trig, 2, 2, 0.5)?;
    let err = grid_error(&built.network, |p| p[0].sin() * p[1].cos(), 101);
    println!("sin(x)cos(y) n=2 eps=0.5: N={} size={} err={err:.2e}", built.grid_size, built.network.size());
    Ok(())
}
