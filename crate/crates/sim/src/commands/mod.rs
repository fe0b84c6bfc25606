mod edge;
mod learn;
mod search;

use std::path::Path;

use crate::cli::{Command, Common};
use crate::error::SimResult;
use crate::parallel::available_workers;
use crate::table::Table;

pub use search::benchmark_table;

/// Runs `command`; returns the files written, relative to the output directory.
pub fn dispatch(command: &Command) -> SimResult<Vec<String>> {
    match command {
        Command::Validate { scenario, common } => search::validate(scenario, common),
        Command::Simulate { scenario, coords, common } => search::simulate(scenario, coords.as_deref(), common),
        Command::Optimize { .. } => search::optimize(command),
        Command::Benchmark { tau_ms, common } => search::benchmark(*tau_ms, common),
        Command::Train { .. } => learn::train(command),
        Command::Fl { .. } => edge::fl(command),
        Command::Aircomp { .. } => edge::aircomp(command),
        Command::Hotspot { .. } => edge::hotspot(command),
        Command::Mobility { .. } => edge::mobility(command),
    }
}

fn workers(common: &Common) -> usize {
    common.workers.unwrap_or_else(available_workers).max(1)
}

fn emit(out: &Path, name: &str, table: &Table, files: &mut Vec<String>) -> SimResult<()> {
    table.write(&out.join(name))?;
    files.push(name.to_string());
    Ok(())
}
