//! Save a constructed network and a trained dense net, then load them back.

use ratnet::cli::{load, save, write, Checkpoint};
use ratnet::constructive::monomial_network;
use ratnet::nn::{ActivationKind, DenseRationalNet};

fn main() -> ratnet::Result<()> {
    let dir = std::env::temp_dir().join("ratnet-example");
    std::fs::create_dir_all(&dir).map_err(|e| ratnet::Error::Io(e.to_string()))?;

    let cube = monomial_network(3, 3)?;
    print!("{}", write(&Checkpoint::Graph(cube.clone())));
    let path = dir.join("cube.ckpt");
    save(&path, &Checkpoint::Graph(cube))?;
    if let Checkpoint::Graph(back) = load(&path)? {
        println!("reloaded x^3 at 1.5 = {}", back.value(1.5));
    }

    let dense = DenseRationalNet::new(&[2, 4, 1], ActivationKind::Rational, 0)?;
    let path = dir.join("dense.ckpt");
    save(&path, &Checkpoint::Dense(dense.clone()))?;
    let same = load(&path)? == Checkpoint::Dense(dense);
    println!("dense round trip identical: {same}");
    Ok(())
}
