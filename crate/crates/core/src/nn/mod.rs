//! Dense networks with one trainable activation per hidden layer, trained
//! by backpropagation and Adam.

mod activation;
mod data;
mod net;
mod train;

pub use activation::{ActivationKind, ActivationSpec, POLYNOMIAL_INIT, RATIONAL_INIT_DENOM, RATIONAL_INIT_NUMER};
pub use data::{split, Target};
pub use net::{DenseRationalNet, Gradients, Sample, DEFAULT_POLE_BOUND, POLE_GRID};
pub use train::{train, Adam, EpochRecord, History, TrainConfig, DIVERGENCE_LOSS};
