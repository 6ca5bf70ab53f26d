//! Two-network domain-decomposition PINN for elliptic and parabolic interface
//! problems, with distance-weighted tanh/Gaussian activations.

pub mod autodiff;
pub mod checks;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod network;
pub mod problems;
pub mod sampling;
pub mod training;

pub use error::{Error, Result};
