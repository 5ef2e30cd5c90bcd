//! Command line and HTTP front ends for the psight pipeline.

pub mod api;
pub mod commands;
pub mod error;

pub use error::{ApiError, ErrorCode};
