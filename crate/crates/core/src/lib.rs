//! Social learning under adversarial likelihood distortion: network
//! topologies, agent models, attack synthesis and the belief dynamics.

pub mod attacks;
pub mod cli;
pub mod engine;
pub mod error;
pub mod models;
pub mod topology;

pub use error::{Error, Result};
