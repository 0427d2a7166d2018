//! `szilard` — configuration-driven runner for the qubit-TLS feedback-engine
//! simulator.
//!
//! Subcommands: `simulate` (deterministic and/or quantum-jump runs with CSV
//! export), `fit` (parameter recovery from population curves), `thermo`
//! (engine bookkeeping report) and `flux` (SQUID flux algebra report).
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error. Failures
//! print a machine-readable JSON record to stderr.

mod config;
mod fitcfg;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use szilard_core::dynamics::run_deterministic;
use szilard_core::estimator::extract_rates;
use szilard_core::model::Step;
use szilard_core::trajectory::{run_ensemble, strobe_schedule};
use szilard_core::{device, thermo};

use config::{config_hash, parse_run_config, Manifest, RunConfig};

/// CLI failure with its exit-code class.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "szilard", version, about = "Qubit-TLS feedback-engine simulator and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured protocol and write populations / rates / traces CSVs
    /// plus a manifest.
    Simulate(SimulateArgs),
    /// Fit model parameters to dataset CSVs described by a problem file.
    Fit(FitArgs),
    /// Print the Szilard-engine thermodynamics report.
    Thermo(ThermoArgs),
    /// Print the SQUID flux partition and interference-condition report.
    Flux(FluxArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration (or a manifest from a previous run).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `outputs`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory-count override.
    #[arg(long)]
    trajectories: Option<usize>,
    /// Mode override: det | stoch | both.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct FitArgs {
    /// Fit problem description (JSON referencing dataset CSVs).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for fit_result.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThermoArgs {
    /// Thermal occupation of the two-level system.
    #[arg(long)]
    p_th: Option<f64>,
    /// Level splitting over k_B T (alternative to --p-th).
    #[arg(long)]
    beta_eps: Option<f64>,
    /// Excited-state degeneracy.
    #[arg(long, default_value_t = 1)]
    d: u32,
    /// Measurement-apparatus bath temperature (mK).
    #[arg(long, default_value_t = 300.0)]
    t_apparatus_mk: f64,
    /// Reservoir temperature (mK); used for the cycle table.
    #[arg(long, default_value_t = 28.3)]
    t_reservoir_mk: f64,
}

#[derive(Args)]
struct FluxArgs {
    /// Loop-area ratio V = A_l / A_s.
    #[arg(long)]
    v_ratio: f64,
    /// Global external flux in units of the flux quantum.
    #[arg(long, default_value_t = 21.48)]
    phi_ext: f64,
    /// Inner-junction Josephson energy (GHz), for the effective-junction line.
    #[arg(long)]
    ej1_ghz: Option<f64>,
    /// Outer-junction Josephson energy (GHz).
    #[arg(long)]
    ej2_ghz: Option<f64>,
    /// Integer search bound for the interference condition.
    #[arg(long, default_value_t = 1000)]
    bound: i64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Thermo(args) => cmd_thermo(args),
        Command::Flux(args) => cmd_flux(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("{}", serde_json::json!({"error": "config", "message": message}));
            ExitCode::from(2)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("{}", serde_json::json!({"error": "runtime", "message": message}));
            ExitCode::from(3)
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut run_config: RunConfig = parse_run_config(&text)?;

    // CLI overrides become part of the resolved (hashed) configuration.
    if let Some(seed) = args.seed {
        run_config.master_seed = seed;
    }
    if let Some(n) = args.trajectories {
        run_config.n_traj = n;
    }
    if let Some(mode) = &args.mode {
        run_config.mode = serde_json::from_value(serde_json::Value::String(mode.clone()))
            .map_err(|_| CliError::Config(format!("unknown mode '{mode}'")))?;
    }
    if let Some(out) = &args.out {
        run_config.outputs = out.to_string_lossy().into_owned();
    }

    // Validate everything before any output is created.
    let params = run_config.system.to_core()?;
    let readout = run_config.readout.to_core()?;
    let experiment = run_config.experiment.to_core(params.ladder.n_tls)?;
    let grid = run_config.grid.to_core();
    let span = experiment.total_duration() - experiment.observation_start();
    grid.resolve(span).map_err(CliError::config)?;
    if run_config.mode.stochastic() && run_config.n_traj == 0 {
        return Err(CliError::Config("n_traj must be >= 1 in stochastic modes".into()));
    }
    let hash = config_hash(&run_config);

    let out_dir = PathBuf::from(&run_config.outputs);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut outputs = Vec::new();

    // The model curves are always produced; they define the system.
    let det = run_deterministic(&experiment, &params, &grid).map_err(CliError::runtime)?;
    output::write_populations(&out_dir.join("populations.csv"), &hash, &params.ladder, &det)?;
    outputs.push("populations.csv".to_string());

    let mut wrote_rates = false;
    if run_config.mode.stochastic() {
        let ensemble = run_ensemble(
            &experiment,
            &params,
            &readout,
            run_config.master_seed,
            run_config.n_traj,
        )
        .map_err(CliError::runtime)?;
        let schedule = strobe_schedule(&experiment);
        output::write_traces(&out_dir.join("traces.csv"), &hash, &schedule, &ensemble)?;
        outputs.push("traces.csv".to_string());

        let monitor_t_rep = experiment.steps.iter().find_map(|s| match s {
            Step::Monitor { t_rep, .. } => Some(*t_rep),
            _ => None,
        });
        if let Some(t_rep) = monitor_t_rep {
            if let Ok(series) = extract_rates(&ensemble, t_rep) {
                output::write_rate_series(&out_dir.join("rates.csv"), &hash, &series)?;
                outputs.push("rates.csv".to_string());
                wrote_rates = true;
            }
        }
    }
    if !wrote_rates {
        output::write_deterministic_rates(&out_dir.join("rates.csv"), &hash, &det)?;
        outputs.push("rates.csv".to_string());
    }
    outputs.sort();

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: hash,
        config: run_config,
        outputs,
    };
    output::write_json(
        &out_dir.join("manifest.json"),
        &serde_json::to_value(&manifest).map_err(CliError::runtime)?,
    )?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let problem_config: fitcfg::FitProblemConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid problem: {e}")))?;
    let base_dir = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let (problem, initial) = fitcfg::build_problem(&problem_config, &base_dir)?;
    let result = szilard_core::fitting::fit(&problem, &initial).map_err(CliError::runtime)?;
    let rendered = fitcfg::result_json(&problem, &result);
    let out_dir = args.out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    output::write_json(&out_dir.join("fit_result.json"), &rendered)?;
    println!("{rendered:#}");
    Ok(())
}

fn cmd_thermo(args: ThermoArgs) -> Result<(), CliError> {
    let beta_eps = match (args.p_th, args.beta_eps) {
        (Some(p), None) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(CliError::Config(format!("p_th must be in (0, 1), got {p}")));
            }
            (1.0 / p - 1.0).ln()
        }
        (None, Some(be)) => be,
        (None, None) => return Err(CliError::Config("give either --p-th or --beta-eps".into())),
        (Some(_), Some(_)) => {
            return Err(CliError::Config("--p-th and --beta-eps are mutually exclusive".into()))
        }
    };
    let d = args.d;
    let p_e = thermo::excited_occupation(d, beta_eps).map_err(CliError::config)?;
    let delta_u = beta_eps * thermo::internal_energy(d, beta_eps).map_err(CliError::config)?;
    let split = thermo::entropy_split(d, beta_eps).map_err(CliError::config)?;
    let delta_s = thermo::measurement_entropy_reduction(d, beta_eps).map_err(CliError::config)?;
    let ratio = split.s_irr / split.s_rev;

    println!("two-level system with d = {d}, beta_eps = {beta_eps:.6}");
    println!("  p_excited            = {p_e:.6}");
    println!("  delta_U              = {delta_u:.4} k_B T");
    println!("  S                    = {:.4} k_B (S_rev = {:.4}, S_irr = {:.4})", split.s, split.s_rev, split.s_irr);
    println!("  delta_S(measurement) = {delta_s:.4} k_B");
    println!("  S_irr/S_rev          = {ratio:.4}");

    let (t_a, t_r) = (args.t_apparatus_mk * 1e-3, args.t_reservoir_mk * 1e-3);
    if t_a > t_r && t_r > 0.0 && beta_eps > 0.0 {
        let w_m = t_a / t_r * delta_s;
        let cop = thermo::cop(t_a, t_r, ratio).map_err(CliError::config)?;
        let carnot = t_r / (t_a - t_r);
        println!("refrigeration cycle at T_R = {} mK, T_A = {} mK:", args.t_reservoir_mk, args.t_apparatus_mk);
        println!("  W_M     = {w_m:.4} k_B T_R");
        println!("  W_Q     = {:.4} k_B T_R", -delta_u);
        println!("  dQ_R    = {delta_u:.4} k_B T_R");
        println!("  COP     = {cop:.6} (Carnot {carnot:.6})");
    }
    Ok(())
}

fn cmd_flux(args: FluxArgs) -> Result<(), CliError> {
    let (phi_s, phi_l, phi_ls) =
        device::flux_partition(args.v_ratio, args.phi_ext).map_err(CliError::config)?;
    println!(
        "flux partition at V = {}, phi_ext = {} Phi_0:",
        args.v_ratio, args.phi_ext
    );
    println!("  phi_s         = {phi_s:.4} * 2pi");
    println!("  phi_l         = {phi_l:.4} * 2pi");
    println!("  phi_l + phi_s = {phi_ls:.4} * 2pi");

    let (satisfiable, witness) =
        device::interference_condition(args.v_ratio, args.bound).map_err(CliError::config)?;
    match witness {
        Some(w) if satisfiable => println!(
            "quasiparticle destructive-interference condition satisfiable: V = (2*{} - 1)/(2*{})",
            w.k, w.m
        ),
        _ => println!(
            "quasiparticle destructive-interference condition not satisfiable for |m|, |k| <= {}",
            args.bound
        ),
    }

    if let (Some(ej1), Some(ej2)) = (args.ej1_ghz, args.ej2_ghz) {
        let phi_s_rad = phi_s * std::f64::consts::TAU;
        let (ej_eff, offset) =
            device::effective_junction(ej1 * 1e9, ej2 * 1e9, phi_s_rad).map_err(CliError::config)?;
        println!("effective junction at phi_s: E_J_eff = {:.4} GHz, phase offset = {offset:.4} rad", ej_eff / 1e9);
    }
    Ok(())
}
