#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;

pub use commands::Command;
pub use config::RunConfig;
pub use error::CliError;

/// Runs `command` and returns what goes to stdout. Files land in `out_dir`;
/// on failure everything written so far is removed.
pub fn execute(cfg: &RunConfig, command: Command, base: &Path, out_dir: &Path) -> Result<String, CliError> {
    let mut files = output::Artifacts::new(out_dir, output::file_header(cfg, command.name()));
    match commands::run(cfg, command, base, &mut files) {
        Ok(text) => Ok(format!("{}{text}", output::run_header(cfg, command.name()))),
        Err(e) => {
            files.discard();
            Err(e)
        }
    }
}
