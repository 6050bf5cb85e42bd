//! Rational neural networks: Zolotarev-based ReLU approximants, exact
//! constructive rational networks, and dense networks with trainable
//! type-(3,2) rational activations.

pub mod classic;
pub mod cli;
pub mod constructive;
pub mod elliptic;
pub mod error;
pub mod nn;
pub mod ratfun;
pub mod zolotarev;

pub use error::{Error, Result};
