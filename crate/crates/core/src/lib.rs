pub mod beamforming;
pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod optimizer;
pub mod quad;
pub mod specfun;
pub mod stochastic_order;

pub use error::{Error, Result};
