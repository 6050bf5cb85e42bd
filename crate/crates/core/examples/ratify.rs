//! Replace every ReLU in a norm-constrained network by a rational approximant.

use ratnet::cli::relu_net_gap;
use ratnet::constructive::{random_relu_network, ratify_relu_network, ToleranceSchedule};

fn main() -> ratnet::Result<()> {
    let relu_net = random_relu_network(2, &[8, 8, 8], 1)?;
    println!("relu net: size {} depth {}", relu_net.size(), relu_net.depth());
    for schedule in [ToleranceSchedule::Flat, ToleranceSchedule::Geometric] {
        for eps in [0.1, 0.01] {
            let conversion = ratify_relu_network(&relu_net, eps, schedule)?;
            let gap = relu_net_gap(&relu_net, &conversion.network, 0);
            println!(
                "{schedule:?} eps={eps}: stages {:?}, trainable {} (was {}), gap {gap:.2e}",
                conversion.stages_per_layer,
                conversion.trainable_param_count(),
                conversion.original_param_count
            );
        }
    }
    Ok(())
}
