//! Photon-level simulation of the three-pass rotation protocol and its
//! intensity-checked variant, with an eavesdropper model and analysis tools.

pub mod adversary;
pub mod analysis;
pub mod channel;
pub mod cli;
pub mod error;
pub mod protocol;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
