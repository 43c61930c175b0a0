//! File formats, presets and command implementations for the `ofwpep` tool.

pub mod algos;
pub mod commands;
mod error;
pub mod gen;
pub mod io;
pub mod sweep;

pub use error::{AppError, AppResult};
