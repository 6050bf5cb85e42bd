//! Rational networks assembled from exact gadgets and Zolotarev ReLU
//! approximants.

mod builder;
mod gadgets;
mod network;
mod piecewise;
mod ratify;
mod taylor;

pub use builder::{Linear, NetBuilder, Signal};
pub use gadgets::{
    min_network_epsilon, monomial_network, monomial_size_bound, network_approximant, product_gadget,
    relu_approx_network, NETWORK_MAX_STAGES,
};
pub use network::{Affine, Layer, NodeActivation, RationalNetwork, POLE_GRID};
pub use piecewise::{piecewise_into, piecewise_network, PiecewiseLinear};
pub use ratify::{random_relu_network, ratify_relu_network, Conversion, ToleranceSchedule};
pub use taylor::{
    grid_error, local_taylor_value, partition_function, partition_piecewise, partition_tolerance, taylor_grid_size,
    taylor_network, Derivatives, TaylorNetwork, MAX_DIM, MAX_ORDER,
};
