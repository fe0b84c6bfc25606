//! File formats, run bookkeeping and the `pinch` command line around
//! `pinch-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod parallel;
pub mod table;

pub use error::{SimError, SimResult};
