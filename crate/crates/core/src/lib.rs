pub mod error;
pub mod rigor;

pub use error::{Error, Result};
pub use rigor::Enclosure;
pub mod arith;
pub mod moments;
pub mod thresholds;
pub mod data;
pub mod lseries;
pub mod geometry;
pub mod cli;
