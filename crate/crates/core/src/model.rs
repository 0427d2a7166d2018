//! Physical parameters, the TLS coupling ladder and derived quantities, and
//! the protocol description used by both the deterministic and stochastic
//! simulators.
//!
//! The qubit exchanges energy with `n_tls` two-level systems on an equally
//! spaced frequency ladder. The exchange rate with TLS `k` follows a
//! Lorentzian in the ladder index, `a / (b^2 + (k - c)^2)`, with the shift
//! `c` in `[0, 0.5]` locating the ladder relative to the qubit frequency.

use crate::constants::H_OVER_KB;
use crate::error::{Error, Result};

/// Qubit parameters: transition frequency, intrinsic relaxation and thermal
/// equilibrium population of the idle qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitParams {
    /// Transition frequency f01 in Hz.
    pub f01: f64,
    /// Intrinsic relaxation rate in 1/s.
    pub gamma_q: f64,
    /// Thermal equilibrium population. Values >= 0.5 describe an inverted
    /// (negative-temperature) bath and are permitted.
    pub p_th: f64,
}

impl QubitParams {
    pub fn new(f01: f64, gamma_q: f64, p_th: f64) -> Result<Self> {
        let q = QubitParams { f01, gamma_q, p_th };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f01 > 0.0) {
            return Err(Error::invalid(format!("f01 must be > 0, got {}", self.f01)));
        }
        if !(self.gamma_q >= 0.0) {
            return Err(Error::invalid(format!(
                "gamma_q must be >= 0, got {}",
                self.gamma_q
            )));
        }
        if !(0.0..1.0).contains(&self.p_th) {
            return Err(Error::invalid(format!(
                "p_th must be in [0, 1), got {}",
                self.p_th
            )));
        }
        Ok(())
    }
}

/// TLS ladder parameters of the Lorentzian coupling profile
/// `gamma_qt(k) = a / (b^2 + (k - c)^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderParams {
    /// Resonant-coupling amplitude in 1/s.
    pub a: f64,
    /// Dimensionless width.
    pub b: f64,
    /// Ladder shift in [0, 0.5]; c = 0 puts one TLS exactly on resonance.
    pub c: f64,
    /// Number of TLSs; odd so the ladder is symmetric around the qubit.
    pub n_tls: usize,
    /// Intrinsic TLS relaxation rate in 1/s, identical for all TLSs.
    pub gamma_t: f64,
}

impl LadderParams {
    pub fn new(a: f64, b: f64, c: f64, n_tls: usize, gamma_t: f64) -> Result<Self> {
        let l = LadderParams { a, b, c, n_tls, gamma_t };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0) {
            return Err(Error::invalid(format!("a must be >= 0, got {}", self.a)));
        }
        if !(self.b > 0.0) {
            return Err(Error::invalid(format!(
                "b must be > 0 (Lorentzian width), got {}",
                self.b
            )));
        }
        if !(0.0..=0.5).contains(&self.c) {
            return Err(Error::invalid(format!("c must be in [0, 0.5], got {}", self.c)));
        }
        if self.n_tls == 0 || self.n_tls % 2 == 0 {
            return Err(Error::invalid(format!(
                "n_tls must be an odd positive integer, got {}",
                self.n_tls
            )));
        }
        if !(self.gamma_t >= 0.0) {
            return Err(Error::invalid(format!(
                "gamma_t must be >= 0, got {}",
                self.gamma_t
            )));
        }
        Ok(())
    }

    /// Ladder indices `k = -(n-1)/2 ..= (n-1)/2` in order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let half = (self.n_tls as i64 - 1) / 2;
        -half..=half
    }
}

/// Full parameter vector of the coupled qubit-TLS model.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub qubit: QubitParams,
    pub ladder: LadderParams,
}

impl SystemParams {
    pub fn new(qubit: QubitParams, ladder: LadderParams) -> Result<Self> {
        qubit.validate()?;
        ladder.validate()?;
        Ok(SystemParams { qubit, ladder })
    }

    pub fn validate(&self) -> Result<()> {
        self.qubit.validate()?;
        self.ladder.validate()
    }

    /// Total relaxation rate `gamma_1 = gamma_q + sum_k gamma_qt(k)` in 1/s.
    pub fn gamma_1(&self) -> Result<f64> {
        Ok(self.qubit.gamma_q + total_coupling(&self.ladder)?)
    }
}

impl Default for SystemParams {
    /// The device configuration shipped with the crate: f01 = 1.2 GHz,
    /// gamma_q = 10.9 kHz, p_th at 28.3 mK, a = 5.0 kHz, b = 0.48, c = 0,
    /// 51 TLSs and 1/gamma_t = 50 ms.
    fn default() -> Self {
        let p_th = thermal_population(1.2e9, 0.0283).expect("valid defaults");
        SystemParams {
            qubit: QubitParams { f01: 1.2e9, gamma_q: 10.9e3, p_th },
            ladder: LadderParams { a: 5.0e3, b: 0.48, c: 0.0, n_tls: 51, gamma_t: 20.0 },
        }
    }
}

/// Occupation probabilities of the qubit and each TLS at a time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    /// Qubit excited-state population.
    pub p_q: f64,
    /// TLS populations, ordered by ladder index.
    pub p_t: Vec<f64>,
    /// Time in seconds.
    pub t: f64,
}

impl PopulationState {
    pub fn new(p_q: f64, p_t: Vec<f64>, t: f64) -> Result<Self> {
        let s = PopulationState { p_q, p_t, t };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_q) {
            return Err(Error::invalid(format!("p_q must be in [0, 1], got {}", self.p_q)));
        }
        for (i, &p) in self.p_t.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "p_t[{i}] must be in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Uniform thermal state at the system's `p_th`.
    pub fn thermal(params: &SystemParams) -> Self {
        PopulationState {
            p_q: params.qubit.p_th,
            p_t: vec![params.qubit.p_th; params.ladder.n_tls],
            t: 0.0,
        }
    }
}

/// Qubit eigenstate targeted by preparation and feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitLevel {
    Ground,
    Excited,
}

impl QubitLevel {
    /// Population value of the level: 0 for ground, 1 for excited.
    pub fn population(self) -> f64 {
        match self {
            QubitLevel::Ground => 0.0,
            QubitLevel::Excited => 1.0,
        }
    }

    pub fn is_excited(self) -> bool {
        matches!(self, QubitLevel::Excited)
    }
}

/// Initial state of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Qubit and all TLSs at `p_th`.
    Thermal,
    /// Explicit populations (time field ignored).
    Explicit(PopulationState),
}

/// One step of a protocol schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    /// Repeated measure-and-correct cycles holding the qubit in `target`.
    Stabilize { target: QubitLevel, repetitions: usize, t_rep: f64 },
    /// One active-feedback preparation of `target`.
    Initialize { target: QubitLevel },
    /// Stroboscopic readout every `t_rep` for `duration` (no feedback).
    Monitor { duration: f64, t_rep: f64 },
    /// `count` unconditional pi-pulses spaced by `spacing`.
    PiPulseTrain { count: usize, spacing: f64 },
    /// Free evolution without readout.
    FreeDecay { duration: f64 },
    /// Idle period (identical dynamics to FreeDecay; kept separate for
    /// protocol bookkeeping).
    Wait { duration: f64 },
}

impl Step {
    /// Wall-clock duration of the step.
    pub fn duration(&self) -> f64 {
        match *self {
            Step::Stabilize { repetitions, t_rep, .. } => repetitions as f64 * t_rep,
            Step::Initialize { .. } => 0.0,
            Step::Monitor { duration, .. } => duration,
            Step::PiPulseTrain { count, spacing } => count as f64 * spacing,
            Step::FreeDecay { duration } | Step::Wait { duration } => duration,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Step::Stabilize { t_rep, .. } | Step::Monitor { t_rep, .. } if !(t_rep > 0.0) => {
                Err(Error::invalid(format!("t_rep must be > 0, got {t_rep}")))
            }
            Step::Monitor { duration, .. } | Step::FreeDecay { duration } | Step::Wait { duration }
                if !(duration >= 0.0) =>
            {
                Err(Error::invalid(format!("duration must be >= 0, got {duration}")))
            }
            Step::PiPulseTrain { spacing, .. } if !(spacing >= 0.0) => {
                Err(Error::invalid(format!("pulse spacing must be >= 0, got {spacing}")))
            }
            _ => Ok(()),
        }
    }
}

/// An ordered protocol schedule plus the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub steps: Vec<Step>,
    pub initial_state: InitialState,
}

impl Experiment {
    pub fn new(initial_state: InitialState) -> Self {
        Experiment { steps: Vec::new(), initial_state }
    }

    pub fn thermal() -> Self {
        Experiment::new(InitialState::Thermal)
    }

    pub fn stabilize(mut self, target: QubitLevel, repetitions: usize, t_rep: f64) -> Self {
        self.steps.push(Step::Stabilize { target, repetitions, t_rep });
        self
    }

    pub fn initialize(mut self, target: QubitLevel) -> Self {
        self.steps.push(Step::Initialize { target });
        self
    }

    pub fn monitor(mut self, duration: f64, t_rep: f64) -> Self {
        self.steps.push(Step::Monitor { duration, t_rep });
        self
    }

    pub fn pi_pulse_train(mut self, count: usize, spacing: f64) -> Self {
        self.steps.push(Step::PiPulseTrain { count, spacing });
        self
    }

    pub fn free_decay(mut self, duration: f64) -> Self {
        self.steps.push(Step::FreeDecay { duration });
        self
    }

    pub fn wait(mut self, duration: f64) -> Self {
        self.steps.push(Step::Wait { duration });
        self
    }

    pub fn validate(&self, n_tls: usize) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::invalid("experiment must contain at least one step"));
        }
        for step in &self.steps {
            step.validate()?;
        }
        if let InitialState::Explicit(state) = &self.initial_state {
            state.validate()?;
            if state.p_t.len() != n_tls {
                return Err(Error::invalid(format!(
                    "explicit initial state has {} TLS entries, system has {}",
                    state.p_t.len(),
                    n_tls
                )));
            }
        }
        Ok(())
    }

    /// Total wall-clock duration of the protocol.
    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(Step::duration).sum()
    }

    /// Time of the first Monitor or FreeDecay step, i.e. the origin of the
    /// observation clock. Returns the protocol end if nothing is observed.
    pub fn observation_start(&self) -> f64 {
        let mut t = 0.0;
        for step in &self.steps {
            if matches!(step, Step::Monitor { .. } | Step::FreeDecay { .. }) {
                return t;
            }
            t += step.duration();
        }
        t
    }
}

/// Coupling rates `gamma_qt(k) = a / (b^2 + (k - c)^2)` in 1/s for
/// `k = -(n-1)/2 ..= (n-1)/2`.
pub fn coupling_ladder(ladder: &LadderParams) -> Result<Vec<f64>> {
    ladder.validate()?;
    Ok(ladder
        .indices()
        .map(|k| ladder.a / (ladder.b * ladder.b + (k as f64 - ladder.c).powi(2)))
        .collect())
}

/// Sum of the ladder rates, `sum_k gamma_qt(k)`, in 1/s.
pub fn total_coupling(ladder: &LadderParams) -> Result<f64> {
    Ok(coupling_ladder(ladder)?.iter().sum())
}

/// Back out the transverse coupling `g = sqrt(a * gamma_phi / (2 b^2))` and
/// ladder spacing `delta = gamma_phi / b` for a given combined dephasing rate.
///
/// Both outputs are plain rates in 1/s; divide by `2*pi` for the
/// `2*pi*kHz` display convention.
pub fn derive_g_delta(ladder: &LadderParams, gamma_phi: f64) -> Result<(f64, f64)> {
    ladder.validate()?;
    if !(gamma_phi > 0.0) {
        return Err(Error::invalid(format!(
            "gamma_phi must be > 0, got {gamma_phi}"
        )));
    }
    let g = (ladder.a * gamma_phi / (2.0 * ladder.b * ladder.b)).sqrt();
    let delta = gamma_phi / ladder.b;
    Ok((g, delta))
}

/// Excited-state population of a two-level system with splitting `f` (Hz) at
/// temperature `t` (K): `1 / (1 + exp(h f / k_B T))`.
pub fn thermal_population(f: f64, t: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::invalid(format!("frequency must be > 0, got {f}")));
    }
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "temperature must be > 0, got {t} (use population_to_temperature for inverted states)"
        )));
    }
    Ok(1.0 / (1.0 + (H_OVER_KB * f / t).exp()))
}

/// Effective temperature in K of a two-level system with excited population
/// `p`: `T = (h f / k_B) / ln((1 - p) / p)`. Negative for `p > 0.5`.
pub fn population_to_temperature(p: f64, f: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::invalid(format!("frequency must be > 0, got {f}")));
    }
    if !(p > 0.0 && p < 1.0) || p == 0.5 {
        return Err(Error::invalid(format!(
            "population must be in (0, 1) and != 0.5, got {p}"
        )));
    }
    Ok(H_OVER_KB * f / ((1.0 - p) / p).ln())
}

/// Boltzmann populations of a multi-level system with level energies in Hz,
/// normalized to 1.
pub fn multilevel_thermal(levels: &[f64], t: f64) -> Result<Vec<f64>> {
    if levels.is_empty() {
        return Err(Error::invalid("level list must not be empty"));
    }
    if !(t > 0.0) {
        return Err(Error::invalid(format!("temperature must be > 0, got {t}")));
    }
    // Shift by the minimum energy so the weights cannot overflow.
    let e0 = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = levels
        .iter()
        .map(|&e| (-H_OVER_KB * (e - e0) / t).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / z).collect())
}
