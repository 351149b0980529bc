pub mod bench;
pub mod cli;
pub mod error;
pub mod fmt;
pub mod graphs;
pub mod neural;
pub mod optimizers;
pub mod ppo;
pub mod qsim;
pub mod rlenv;
pub mod rng;

pub use error::{Error, Result};
