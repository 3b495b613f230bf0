pub mod cli;
pub mod error;
pub mod extension;
pub mod hankel;
pub mod linalg;
pub mod pipeline;
pub mod poly;
pub mod spectral;
pub mod sylvester;

pub use error::{Error, Result};
