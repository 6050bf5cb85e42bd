//! Exact x^n networks built from power nodes and the product gadget.

use ratnet::constructive::{monomial_network, monomial_size_bound};

fn main() -> ratnet::Result<()> {
    let radix = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    println!("radix {radix}");
    for n in [1, 2, 5, 7, 9, 11, 16, 27, 40] {
        let net = monomial_network(n, radix)?;
        let x = -1.3f64;
        let rel = (net.value(x) / x.powi(n as i32) - 1.0).abs();
        println!(
            "n={n:>2} size={:>2} bound={:>3} depth={} rel_err@{x}={rel:.1e}",
            net.size(),
            monomial_size_bound(n, radix),
            net.depth()
        );
    }
    Ok(())
}
