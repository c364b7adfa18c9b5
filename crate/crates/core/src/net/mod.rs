//! Layered networks with exact analytic Jacobians.

mod activation;
mod network;
mod skip;
mod spec;

pub use network::{
    layer_jacobian, network_jacobian, padded_probe_jacobian, JacobianProbe, Layer, Network,
    LAYER_NORM_MIN_VARIANCE,
};
pub use skip::{flatten_skip, SkipConnection, SkipNetwork};
pub use spec::{ActivationKind, Affine, LayerSpec, NetworkSpec, WeightInit, MAX_PARAMETERS, MAX_WIDTH};
