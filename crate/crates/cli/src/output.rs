//! Rates and trajectories as CSV or JSON. Floats in CSV carry six decimals.

use std::fs;
use std::path::{Path, PathBuf};

use spiral_core::{RateEstimate, Trajectory};

use crate::config::Format;
use crate::error::{CliError, Result};

pub const RATES_HEADER: [&str; 10] = [
    "condition",
    "bot",
    "user",
    "pi",
    "trials",
    "spirals",
    "rate",
    "ci_low",
    "ci_high",
    "seed",
];

pub const TRAJECTORY_HEADER: [&str; 7] = ["trial", "t", "h_star", "slot", "value", "p_h1", "e_pi"];

fn float(x: f64) -> String {
    format!("{x:.6}")
}

fn csv_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

pub fn rates_to_bytes(estimates: &[RateEstimate], format: Format) -> Result<Vec<u8>> {
    if estimates.is_empty() {
        return Err(CliError::Empty("no rate estimates"));
    }
    match format {
        Format::Csv => csv_bytes(&RATES_HEADER, |w| {
            for e in estimates {
                w.write_record([
                    e.condition.clone(),
                    e.bot.to_string(),
                    e.user.to_string(),
                    float(e.pi),
                    e.trials.to_string(),
                    e.spirals.to_string(),
                    float(e.rate),
                    float(e.ci_low),
                    float(e.ci_high),
                    e.seed.to_string(),
                ])?;
            }
            Ok(())
        }),
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(estimates)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn write_rates(estimates: &[RateEstimate], format: Format, path: &Path) -> Result<()> {
    let bytes = rates_to_bytes(estimates, format)?;
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn parse_rates(text: &str, format: Format) -> Result<Vec<RateEstimate>> {
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            if r.headers()?.iter().ne(RATES_HEADER) {
                return Err(CliError::Schema(format!("unexpected rates header {:?}", r.headers()?)));
            }
            r.deserialize().map(|row| row.map_err(CliError::from)).collect()
        }
        Format::Json => Ok(serde_json::from_str(text)?),
    }
}

pub fn read_rates(path: &Path, format: Format) -> Result<Vec<RateEstimate>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_rates(&text, format)
}

/// One row per round of every `(trial id, trajectory)`. Informed users also
/// get a `t = 0` row holding the prior, with the round columns left empty.
pub fn trajectories_to_bytes(trajectories: &[(usize, Trajectory)]) -> Result<Vec<u8>> {
    csv_bytes(&TRAJECTORY_HEADER, |w| {
        for (trial, traj) in trajectories {
            let trial = trial.to_string();
            if traj.user == spiral_core::UserKind::Informed {
                w.write_record([trial.as_str(), "0", "", "", "", &float(0.5), &float(0.5)])?;
            }
            for r in &traj.records {
                w.write_record([
                    trial.clone(),
                    r.t.to_string(),
                    r.h_star.index().to_string(),
                    r.response.slot.to_string(),
                    r.response.value.index().to_string(),
                    float(r.p_h1),
                    r.e_pi.map(float).unwrap_or_default(),
                ])?;
            }
        }
        Ok(())
    })
}

pub fn write_trajectories(trajectories: &[(usize, Trajectory)], path: &Path) -> Result<()> {
    let bytes = trajectories_to_bytes(trajectories)?;
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `runs/rates.csv` with suffix `manifest.json` gives `runs/rates.manifest.json`.
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

pub fn trajectory_path(out: &Path, condition: &str, pi: f64) -> PathBuf {
    sibling_path(out, &format!("{condition}.pi{pi}.trajectories.csv"))
}
