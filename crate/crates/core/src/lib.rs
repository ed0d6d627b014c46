pub mod basis;
pub mod error;
pub mod heat;
pub mod sobolev;
pub mod stats;
pub mod stochastic;
mod tensor;
pub mod translation;

pub use error::{Error, Result};
