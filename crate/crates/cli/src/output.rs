//! Deterministic CSV and manifest writers.
//!
//! Floats are written with Rust's shortest round-trip formatting, '.' decimal
//! separator and '\n' line endings, so identical runs produce byte-identical
//! files. Every data file starts with a `# config_hash=` comment tying it to
//! its manifest.

use std::fmt::Write as _;
use std::path::Path;

use szilard_core::dynamics::DeterministicResult;
use szilard_core::estimator::RateSeries;
use szilard_core::model::LadderParams;
use szilard_core::trajectory::JumpTrace;

use crate::CliError;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// populations.csv: the deterministic population curves, one column per TLS
/// labelled by its ladder index.
pub fn write_populations(
    path: &Path,
    hash: &str,
    ladder: &LadderParams,
    result: &DeterministicResult,
) -> Result<(), CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "# config_hash={hash}");
    out.push_str("t,p_q");
    for k in ladder.indices() {
        let _ = write!(out, ",p_t_{k}");
    }
    out.push('\n');
    for (i, state) in result.states.iter().enumerate() {
        let _ = write!(out, "{},{}", result.times[i], state.p_q);
        for p in &state.p_t {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    write_file(path, &out)
}

const RATES_HEADER: &str = "t,gamma_up,gamma_up_err,gamma_down,gamma_down_err,gamma_1,p_eq\n";

/// rates.csv from a jump-extracted rate series.
pub fn write_rate_series(path: &Path, hash: &str, series: &RateSeries) -> Result<(), CliError> {
    let mut out = format!("# config_hash={hash}\n{RATES_HEADER}");
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            series.times[i],
            opt(series.gamma_up[i]),
            opt(series.gamma_up_err[i]),
            opt(series.gamma_down[i]),
            opt(series.gamma_down_err[i]),
            opt(series.gamma_1[i]),
            opt(series.p_eq[i]),
        );
    }
    write_file(path, &out)
}

/// rates.csv from the deterministic series (zero standard errors).
pub fn write_deterministic_rates(
    path: &Path,
    hash: &str,
    result: &DeterministicResult,
) -> Result<(), CliError> {
    let mut out = format!("# config_hash={hash}\n{RATES_HEADER}");
    for i in 0..result.times.len() {
        let _ = writeln!(
            out,
            "{},{},0,{},0,{},{}",
            result.times[i],
            result.gamma_up[i],
            result.gamma_down[i],
            result.gamma_up[i] + result.gamma_down[i],
            result.p_eq[i],
        );
    }
    write_file(path, &out)
}

/// traces.csv: one row per measurement of every trajectory.
pub fn write_traces(
    path: &Path,
    hash: &str,
    schedule: &[f64],
    ensemble: &[JumpTrace],
) -> Result<(), CliError> {
    let rows: usize = ensemble.iter().map(JumpTrace::len).sum();
    let mut out = String::with_capacity(64 * (rows + 2));
    let _ = writeln!(out, "# config_hash={hash}");
    out.push_str("traj_id,strobe_index,t,assigned,I,Q,pi_fired\n");
    for (traj_id, trace) in ensemble.iter().enumerate() {
        for i in 0..trace.len() {
            let _ = writeln!(
                out,
                "{traj_id},{i},{},{},{},{},{}",
                schedule[i],
                trace.assigned[i] as u8,
                trace.iq[i][0],
                trace.iq[i][1],
                trace.pi_fired[i] as u8,
            );
        }
    }
    write_file(path, &out)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_file(path, &text)
}
