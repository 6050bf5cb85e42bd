//! Train the four activations on the synthetic target and print final errors.
//! Pass an epoch count to shorten the run (default 100).

use ratnet::nn::{split, train, ActivationKind, DenseRationalNet, Target, TrainConfig};

fn main() -> ratnet::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let config = TrainConfig { epochs, ..TrainConfig::default() };
    let samples = Target::Sin2d.sample(2000, config.seed);
    let (train_set, val_set) = split(samples, 1000, config.seed)?;
    for kind in ActivationKind::ALL {
        let net = DenseRationalNet::new(&[2, 50, 50, 50, 50, 1], kind, config.seed)?;
        let params = net.trainable_param_count();
        let (_, history) = train(net, &train_set, &val_set, &config)?;
        let last = history.records.last().expect("epoch 0 is recorded");
        println!(
            "{kind:<10} params={params} train={:.3e} val={:.3e} rollbacks={}",
            last.train_mse, last.val_mse, history.rollbacks
        );
    }
    Ok(())
}
