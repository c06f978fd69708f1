//! Library side of the `fraccalc` command: configuration, output
//! formats, the commands themselves and the acceptance criteria.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;
