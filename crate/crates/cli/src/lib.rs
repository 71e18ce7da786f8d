//! Command implementations behind the `levykb` binary.

pub mod commands;
pub mod config;
pub mod output;

use levykb_core::LevyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Levy(#[from] LevyError),

    #[error("bad --{flag}: {detail}")]
    BadArgument { flag: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
