//! Surrogate-assisted meta-black-box optimization.
//!
//! The crate is organised around two learning stages:
//!
//! * surrogate learning: per-problem KAN (or MLP/RBF) regressors trained on
//!   Latin-hypercube samples, first with MSE and then with the
//!   relative-order-aware loss ([`surrogate`]);
//! * policy learning: a Double-DQN agent ([`rl`]) that picks the mutation
//!   operator and strength of a differential evolution engine ([`de`]) every
//!   generation, observing a 9-dimensional state ([`features`]) and
//!   scoring candidates on the surrogates instead of the true functions
//!   ([`pipeline`]).
//!
//! The BBOB suite lives in [`problems`], sampling and normalisation in
//! [`sampling`], and the from-scratch networks in [`networks`].

pub mod cli;
pub mod de;
pub mod error;
pub mod features;
pub mod networks;
pub mod objective;
pub mod pipeline;
pub mod problems;
pub mod rl;
pub mod sampling;
pub mod seed;
pub mod surrogate;

pub use error::{Error, Result};
pub use objective::Objective;
