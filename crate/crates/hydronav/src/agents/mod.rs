//! Replay memory and the two learning agents: the deterministic policy with
//! OU exploration and target networks, and the stochastic squashed-Gaussian
//! policy with twin critics and entropy regularization.

mod ddpg;
mod replay;
mod sac;

pub use ddpg::{DdpgAgent, DdpgConfig, DdpgLosses};
pub use replay::{Minibatch, ReplayBuffer, Transition};
pub use sac::{SacAgent, SacConfig, SacLosses};

use ndarray::{Array2, ArrayView2};

/// `[states | actions]` critic input, actions appended at the first layer.
pub(crate) fn concat_columns(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = Array2::zeros((a.nrows(), a.ncols() + b.ncols()));
    out.slice_mut(ndarray::s![.., ..a.ncols()]).assign(&a);
    out.slice_mut(ndarray::s![.., a.ncols()..]).assign(&b);
    out
}
