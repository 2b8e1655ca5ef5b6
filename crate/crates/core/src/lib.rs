pub mod cli;
pub mod decompose;
pub mod dissect;
pub mod error;
pub mod factor;
pub mod fit;
pub mod graphops;
pub mod infer;
pub mod model;
pub mod sample;
pub mod synth;

pub use error::{Error, Result};
