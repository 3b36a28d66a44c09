//! Compact MDP models for on-device power management: a row-stochastic MDP
//! core, sparse value iteration, the LTE-M sensor node model, three duty
//! cycling controllers and a frame-level simulator.

pub mod controllers;
pub mod error;
pub mod mdp;
pub mod node;
pub mod sim;
pub mod sparse;
pub mod svi;

pub use error::{Error, Result};
