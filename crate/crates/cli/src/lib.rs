//! Command-line front end: flag and config-file parsing, the run manifest,
//! and CSV/JSON writers for spiral rates and belief trajectories.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

use std::io::Write;

use spiral_core::run_experiment;

pub use config::{Cli, Format, PartialConfig, RunConfig, UserModel};
pub use error::{CliError, Result};
pub use manifest::RunManifest;
pub use output::{parse_rates, read_rates, write_rates, write_trajectories};

/// Runs the experiment `cfg` describes and writes its outputs. Without an
/// output path the rates go to stdout and nothing else is written.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.spec();
    let report = run_experiment(&spec, cfg.workers)?;
    for cell in report.cells.iter().filter(|c| !c.failures.is_empty()) {
        eprintln!(
            "warning: {} at pi={}: {} trials failed and were left out (first: {})",
            cell.estimate.condition,
            cell.estimate.pi,
            cell.failures.len(),
            cell.failures[0].error
        );
    }
    let estimates = report.estimates();

    let Some(out) = &cfg.out else {
        let bytes = output::rates_to_bytes(&estimates, cfg.format)?;
        return std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| CliError::io("<stdout>", e));
    };

    write_rates(&estimates, cfg.format, out)?;
    RunManifest::new(cfg.clone()).write(&output::sibling_path(out, "manifest.json"))?;
    if cfg.trajectories > 0 {
        for cell in &report.cells {
            let path = output::trajectory_path(out, &cell.estimate.condition, cell.estimate.pi);
            write_trajectories(&cell.trajectories, &path)?;
        }
    }
    Ok(())
}
