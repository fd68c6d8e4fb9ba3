//! Engine, encoders, commentary models, data pipeline and metrics.

pub mod commentary;
pub mod data;
pub mod encoders;
pub mod engine;
pub mod error;
pub mod eval;

pub use error::{CoreError, Result};
