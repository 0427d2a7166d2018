//! JSON configuration schema.
//!
//! Every dimensioned field carries its unit in the name (`t_rep_us`,
//! `a_khz`, `duration_ms`): unit ambiguity is the dominant config-error mode
//! for this model. Conversion to the core types (plain SI) happens in one
//! place here.

use serde::{Deserialize, Serialize};
use szilard_core::dynamics::SampleGrid;
use szilard_core::trajectory::ReadoutModel;
use szilard_core::{
    Experiment, InitialState, LadderParams, PopulationState, QubitLevel, QubitParams, Step,
    SystemParams,
};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub f01_ghz: f64,
    pub gamma_q_khz: f64,
    pub p_th: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub a_khz: f64,
    pub b: f64,
    pub c: f64,
    pub n_tls: usize,
    pub gamma_t_per_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub qubit: QubitConfig,
    pub ladder: LadderConfig,
}

impl SystemConfig {
    pub fn to_core(&self) -> Result<SystemParams, CliError> {
        let qubit = QubitParams::new(self.qubit.f01_ghz * 1e9, self.qubit.gamma_q_khz * 1e3, self.qubit.p_th)
            .map_err(CliError::config)?;
        let ladder = LadderParams::new(
            self.ladder.a_khz * 1e3,
            self.ladder.b,
            self.ladder.c,
            self.ladder.n_tls,
            self.ladder.gamma_t_per_s,
        )
        .map_err(CliError::config)?;
        Ok(SystemParams { qubit, ladder })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutConfig {
    #[serde(default = "default_separation")]
    pub separation_sigma: f64,
    #[serde(default = "default_demolition_down")]
    pub demolition_down: f64,
    #[serde(default)]
    pub demolition_up: f64,
    #[serde(default)]
    pub centers: Option<[[f64; 2]; 2]>,
}

fn default_separation() -> f64 {
    5.6
}

fn default_demolition_down() -> f64 {
    0.04
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        ReadoutConfig {
            separation_sigma: default_separation(),
            demolition_down: default_demolition_down(),
            demolition_up: 0.0,
            centers: None,
        }
    }
}

impl ReadoutConfig {
    pub fn to_core(&self) -> Result<ReadoutModel, CliError> {
        let centers = self
            .centers
            .unwrap_or([[0.0, 0.0], [self.separation_sigma, 0.0]]);
        let model = ReadoutModel {
            separation_sigma: self.separation_sigma,
            demolition_down: self.demolition_down,
            demolition_up: self.demolition_up,
            centers,
        };
        model.validate().map_err(CliError::config)?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "g")]
    Ground,
    #[serde(rename = "e")]
    Excited,
}

impl From<Target> for QubitLevel {
    fn from(t: Target) -> QubitLevel {
        match t {
            Target::Ground => QubitLevel::Ground,
            Target::Excited => QubitLevel::Excited,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepConfig {
    Stabilize { target: Target, repetitions: usize, t_rep_us: f64 },
    Initialize { target: Target },
    Monitor { duration_ms: f64, t_rep_us: f64 },
    PiPulseTrain { count: usize, spacing_us: f64 },
    FreeDecay { duration_ms: f64 },
    Wait { duration_ms: f64 },
}

impl StepConfig {
    fn to_core(&self) -> Step {
        match *self {
            StepConfig::Stabilize { target, repetitions, t_rep_us } => Step::Stabilize {
                target: target.into(),
                repetitions,
                t_rep: t_rep_us * 1e-6,
            },
            StepConfig::Initialize { target } => Step::Initialize { target: target.into() },
            StepConfig::Monitor { duration_ms, t_rep_us } => Step::Monitor {
                duration: duration_ms * 1e-3,
                t_rep: t_rep_us * 1e-6,
            },
            StepConfig::PiPulseTrain { count, spacing_us } => Step::PiPulseTrain {
                count,
                spacing: spacing_us * 1e-6,
            },
            StepConfig::FreeDecay { duration_ms } => Step::FreeDecay { duration: duration_ms * 1e-3 },
            StepConfig::Wait { duration_ms } => Step::Wait { duration: duration_ms * 1e-3 },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStateConfig {
    Keyword(String),
    Explicit { p_q: f64, p_t: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_initial_state")]
    pub initial_state: InitialStateConfig,
    pub steps: Vec<StepConfig>,
}

fn default_initial_state() -> InitialStateConfig {
    InitialStateConfig::Keyword("thermal".into())
}

impl ExperimentConfig {
    pub fn to_core(&self, n_tls: usize) -> Result<Experiment, CliError> {
        let initial_state = match &self.initial_state {
            InitialStateConfig::Keyword(k) if k == "thermal" => InitialState::Thermal,
            InitialStateConfig::Keyword(k) => {
                return Err(CliError::Config(format!(
                    "unknown initial_state '{k}' (expected \"thermal\" or an explicit state)"
                )))
            }
            InitialStateConfig::Explicit { p_q, p_t } => InitialState::Explicit(
                PopulationState::new(*p_q, p_t.clone(), 0.0).map_err(CliError::config)?,
            ),
        };
        let exp = Experiment {
            steps: self.steps.iter().map(StepConfig::to_core).collect(),
            initial_state,
        };
        exp.validate(n_tls).map_err(CliError::config)?;
        Ok(exp)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridConfig {
    Log { start_us: f64, points: usize },
    Linear { step_us: f64 },
    TimesUs(Vec<f64>),
}

impl GridConfig {
    pub fn to_core(&self) -> SampleGrid {
        match self {
            GridConfig::Log { start_us, points } => SampleGrid::Log { start: start_us * 1e-6, points: *points },
            GridConfig::Linear { step_us } => SampleGrid::Linear { step: step_us * 1e-6 },
            GridConfig::TimesUs(times) => SampleGrid::Times(times.iter().map(|t| t * 1e-6).collect()),
        }
    }
}

fn default_grid() -> GridConfig {
    GridConfig::Log { start_us: 1.0, points: 400 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "deterministic", alias = "det")]
    Deterministic,
    #[serde(rename = "stochastic", alias = "stoch")]
    Stochastic,
    #[serde(rename = "both")]
    Both,
}

impl Mode {
    pub fn stochastic(self) -> bool {
        self != Mode::Deterministic
    }
}

fn default_mode() -> Mode {
    Mode::Both
}

fn default_n_traj() -> usize {
    200
}

fn default_outputs() -> String {
    "out".into()
}

/// Full resolved run configuration; also the payload stored in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub readout: ReadoutConfig,
    pub experiment: ExperimentConfig,
    #[serde(default = "default_grid")]
    pub grid: GridConfig,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_outputs")]
    pub outputs: String,
}

/// Written next to the data files; re-running `simulate` on a manifest
/// reproduces the outputs byte-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub outputs: Vec<String>,
}

/// Parse a run configuration, accepting either a raw config or a manifest.
pub fn parse_run_config(text: &str) -> Result<RunConfig, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    if value.get("config").is_some() {
        let manifest: Manifest = serde_json::from_value(value)
            .map_err(|e| CliError::Config(format!("invalid manifest: {e}")))?;
        Ok(manifest.config)
    } else {
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }
}

/// Canonical hash of the resolved configuration. The output directory is
/// excluded: it does not affect the data, and re-running a manifest into a
/// different directory must reproduce the files byte-identically.
pub fn config_hash(config: &RunConfig) -> String {
    use sha2::{Digest, Sha256};
    let mut canonical = config.clone();
    canonical.outputs = String::new();
    let serialized = serde_json::to_string(&canonical).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(serialized.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
