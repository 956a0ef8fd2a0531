pub mod autopoint;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod fsutil;
pub mod httpserver;
pub mod imageio;
pub mod kernels;
pub mod losses;
pub mod metrics;
pub mod pipeline;
pub mod proposer;
pub mod radiometric;
pub mod raster;
pub mod review;
pub mod synth;
pub mod topsis;

pub use error::{Error, Result};
