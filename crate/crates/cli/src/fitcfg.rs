//! Fit-problem JSON schema and dataset CSV ingestion.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use szilard_core::fitting::{FitDataset, FitProblem, FitResult, ParamId, Termination};

use crate::config::{ExperimentConfig, SystemConfig};
use crate::CliError;

/// Unit-suffixed parameter names used in fit problems and results, with the
/// scale to the core unit (1/s or dimensionless).
const PARAMS: [(&str, ParamId, f64); 6] = [
    ("a_khz", ParamId::A, 1e3),
    ("b", ParamId::B, 1.0),
    ("c", ParamId::C, 1.0),
    ("gamma_q_khz", ParamId::GammaQ, 1e3),
    ("gamma_t_per_s", ParamId::GammaT, 1.0),
    ("p_th", ParamId::PTh, 1.0),
];

fn lookup(name: &str) -> Result<(ParamId, f64), CliError> {
    PARAMS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|&(_, id, scale)| (id, scale))
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown parameter '{name}' (expected one of a_khz, b, c, gamma_q_khz, gamma_t_per_s, p_th)"
            ))
        })
}

fn suffixed_name(id: ParamId) -> &'static str {
    PARAMS.iter().find(|(_, p, _)| *p == id).map(|(n, _, _)| *n).unwrap()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// CSV file with columns t, p_q and optionally stderr.
    pub csv: String,
    pub experiment: ExperimentConfig,
    pub fit_window_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitProblemConfig {
    pub system: SystemConfig,
    /// Parameters to optimize, by suffixed name.
    pub free: Vec<String>,
    /// Bounds per free parameter, in the suffixed units.
    pub bounds: std::collections::BTreeMap<String, (f64, f64)>,
    /// Starting point per free parameter, in the suffixed units.
    pub initial: std::collections::BTreeMap<String, f64>,
    pub datasets: Vec<DatasetConfig>,
}

/// Parsed dataset CSV: `t` in seconds, `p_q`, optional `stderr`.
fn read_dataset_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read dataset file {}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{}: empty CSV", path.display())))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| columns.iter().position(|c| *c == name);
    let t_col = col("t").ok_or_else(|| CliError::Config(format!("{}: no 't' column", path.display())))?;
    let p_col = col("p_q").ok_or_else(|| CliError::Config(format!("{}: no 'p_q' column", path.display())))?;
    let err_col = col("stderr");

    let mut times = Vec::new();
    let mut p_q = Vec::new();
    let mut stderr = err_col.map(|_| Vec::new());
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |col: usize| -> Result<f64, CliError> {
            fields
                .get(col)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Config(format!("{}: bad value in row {}", path.display(), i + 2))
                })
        };
        times.push(parse(t_col)?);
        p_q.push(parse(p_col)?);
        if let (Some(errs), Some(c)) = (stderr.as_mut(), err_col) {
            errs.push(parse(c)?);
        }
    }
    Ok((times, p_q, stderr))
}

/// Build the core fit problem; dataset paths are resolved relative to
/// `base_dir` (the directory of the problem file).
pub fn build_problem(
    config: &FitProblemConfig,
    base_dir: &Path,
) -> Result<(FitProblem, Vec<f64>), CliError> {
    let base = config.system.to_core()?;
    let mut free = Vec::new();
    let mut bounds = Vec::new();
    let mut initial = Vec::new();
    for name in &config.free {
        let (id, scale) = lookup(name)?;
        let (lo, hi) = config
            .bounds
            .get(name)
            .copied()
            .ok_or_else(|| CliError::Config(format!("no bounds given for '{name}'")))?;
        let start = config
            .initial
            .get(name)
            .copied()
            .ok_or_else(|| CliError::Config(format!("no initial value given for '{name}'")))?;
        free.push(id);
        bounds.push((lo * scale, hi * scale));
        initial.push(start * scale);
    }
    let mut datasets = Vec::new();
    for ds in &config.datasets {
        let path = if Path::new(&ds.csv).is_absolute() {
            PathBuf::from(&ds.csv)
        } else {
            base_dir.join(&ds.csv)
        };
        let (times, p_q, stderr) = read_dataset_csv(&path)?;
        datasets.push(FitDataset {
            experiment: ds.experiment.to_core(base.ladder.n_tls)?,
            times,
            p_q,
            stderr,
            fit_window: ds.fit_window_ms * 1e-3,
        });
    }
    let problem = FitProblem { base, datasets, free, bounds };
    problem.validate().map_err(CliError::config)?;
    Ok((problem, initial))
}

/// JSON rendering of a fit result, with values back in the suffixed units.
pub fn result_json(problem: &FitProblem, result: &FitResult) -> serde_json::Value {
    let mut values = serde_json::Map::new();
    let mut uncertainties = serde_json::Map::new();
    for (i, &id) in problem.free.iter().enumerate() {
        let name = suffixed_name(id);
        let scale = PARAMS.iter().find(|(_, p, _)| *p == id).unwrap().2;
        values.insert(name.into(), (result.values[i] / scale).into());
        uncertainties.insert(
            name.into(),
            match result.uncertainties[i] {
                Some(u) => (u / scale).into(),
                None => serde_json::Value::Null,
            },
        );
    }
    serde_json::json!({
        "values": values,
        "uncertainties": uncertainties,
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "termination": match result.termination {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
        },
    })
}
