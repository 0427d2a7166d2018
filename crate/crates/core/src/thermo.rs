//! Szilard-engine thermodynamics of a two-level system with a `d`-fold
//! degenerate excited state.
//!
//! Energies are handled dimensionlessly as `beta_eps = epsilon / (k_B T)`
//! wherever possible; every statement below is in `k_B T` / `k_B` units.
//! A negative `beta_eps` encodes population inversion.

use crate::constants::H_OVER_KB;
use crate::error::{Error, Result};
use crate::model::SystemParams;

fn check_degeneracy(d: u32) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("excited-state degeneracy d must be >= 1"));
    }
    Ok(d as f64)
}

/// A two-level system with a `d`-fold degenerate excited state, characterized
/// by its dimensionless splitting `beta_eps = eps / (k_B T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelThermo {
    pub d: u32,
    pub beta_eps: f64,
}

impl TwoLevelThermo {
    pub fn new(d: u32, beta_eps: f64) -> Result<Self> {
        check_degeneracy(d)?;
        Ok(TwoLevelThermo { d, beta_eps })
    }

    /// From the excited-manifold occupation: `beta_eps = ln(d (1 - p) / p)`.
    pub fn from_occupation(d: u32, p_excited: f64) -> Result<Self> {
        let df = check_degeneracy(d)?;
        if !(p_excited > 0.0 && p_excited < 1.0) {
            return Err(Error::invalid(format!(
                "occupation must be in (0, 1), got {p_excited}"
            )));
        }
        Ok(TwoLevelThermo { d, beta_eps: (df * (1.0 - p_excited) / p_excited).ln() })
    }

    /// From a level splitting in Hz at temperature `t` in K.
    pub fn from_frequency(d: u32, f: f64, t: f64) -> Result<Self> {
        check_degeneracy(d)?;
        if !(f > 0.0) || !(t > 0.0) {
            return Err(Error::invalid("frequency and temperature must be > 0"));
        }
        Ok(TwoLevelThermo { d, beta_eps: H_OVER_KB * f / t })
    }

    pub fn internal_energy(&self) -> f64 {
        internal_energy(self.d, self.beta_eps).expect("validated on construction")
    }

    pub fn entropy_split(&self) -> EntropySplit {
        entropy_split(self.d, self.beta_eps).expect("validated on construction")
    }

    pub fn measurement_entropy_reduction(&self) -> f64 {
        measurement_entropy_reduction(self.d, self.beta_eps).expect("validated on construction")
    }

    pub fn irr_rev_ratio(&self) -> f64 {
        irr_rev_ratio(self.d, self.beta_eps).expect("validated on construction")
    }
}

/// Excited-manifold occupation `p_e = d / (d + exp(beta_eps))`.
pub fn excited_occupation(d: u32, beta_eps: f64) -> Result<f64> {
    let d = check_degeneracy(d)?;
    // d e^{-x} / (d e^{-x} + 1) is stable for large |x|.
    let w = d * (-beta_eps).exp();
    Ok(w / (w + 1.0))
}

/// Internal energy in units of the level splitting:
/// `U / eps = d / (d + exp(beta_eps))`.
pub fn internal_energy(d: u32, beta_eps: f64) -> Result<f64> {
    excited_occupation(d, beta_eps)
}

/// Entropy decomposition in units of k_B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySplit {
    /// `S_rev = beta U`; the component exchangeable with the reservoir.
    pub s_rev: f64,
    /// `S_irr = ln(d + exp(beta_eps)) - beta_eps`; the free-energy-related
    /// component that can only be produced.
    pub s_irr: f64,
    /// Total entropy `S = S_rev + S_irr`.
    pub s: f64,
}

/// Entropy of the thermal state: `S/k_B = beta U + ln(d + e^{beta_eps}) -
/// beta_eps`, split into its reversible and irreversible parts.
pub fn entropy_split(d: u32, beta_eps: f64) -> Result<EntropySplit> {
    let df = check_degeneracy(d)?;
    let s_rev = beta_eps * internal_energy(d, beta_eps)?;
    // ln(d + e^x) - x = ln(1 + d e^{-x}), stable for large x.
    let s_irr = (df * (-beta_eps).exp()).ln_1p();
    Ok(EntropySplit { s_rev, s_irr, s: s_rev + s_irr })
}

/// Ensemble-average entropy removed by a projective measurement that
/// distinguishes the ground state from the excited manifold:
/// `dS = S - p_e ln d`. Maximized over `beta_eps` at `beta_eps = ln d`, where
/// it equals `ln 2`.
pub fn measurement_entropy_reduction(d: u32, beta_eps: f64) -> Result<f64> {
    let df = check_degeneracy(d)?;
    let s = entropy_split(d, beta_eps)?.s;
    let p_e = excited_occupation(d, beta_eps)?;
    Ok(s - p_e * df.ln())
}

/// `dS_irr / dS_rev = (d + e^{beta_eps}) / d * (ln(d + e^{beta_eps}) /
/// beta_eps - 1)`; vanishes as `beta_eps -> inf` while the cooling power
/// vanishes exponentially. Infinite at `beta_eps = 0` where `S_rev = 0`.
pub fn irr_rev_ratio(d: u32, beta_eps: f64) -> Result<f64> {
    let split = entropy_split(d, beta_eps)?;
    Ok(split.s_irr / split.s_rev)
}

/// Coefficient of performance of the measurement-driven refrigerator:
/// `COP = T_R / (T_A - T_R + T_A * dS_irr/dS_rev)`.
///
/// Bounded by the Carnot value `T_R / (T_A - T_R)`, with equality only for a
/// vanishing irreversible fraction.
pub fn cop(t_apparatus: f64, t_reservoir: f64, irr_rev_ratio: f64) -> Result<f64> {
    if !(t_reservoir > 0.0) {
        return Err(Error::invalid(format!(
            "reservoir temperature must be > 0, got {t_reservoir}"
        )));
    }
    if !(t_apparatus > t_reservoir) {
        return Err(Error::invalid(format!(
            "apparatus temperature {t_apparatus} must exceed the reservoir temperature {t_reservoir}"
        )));
    }
    if !(irr_rev_ratio >= 0.0) {
        return Err(Error::invalid(format!(
            "entropy ratio must be >= 0, got {irr_rev_ratio}"
        )));
    }
    Ok(t_reservoir / (t_apparatus - t_reservoir + t_apparatus * irr_rev_ratio))
}

/// Bookkeeping of one measurement-reset cycle at reservoir temperature
/// `t_reservoir`, with the apparatus bath at `t_apparatus`. Energies are in
/// units of `k_B * T_R`, entropies in `k_B`.
#[derive(Debug, Clone, Copy)]
pub struct CycleSummary {
    /// Level splitting over `k_B T_R`.
    pub beta_eps: f64,
    /// Internal energy extracted per cycle, `dU = beta_eps * p_e` (k_B T_R).
    pub delta_u: f64,
    /// Average measurement entropy reduction (k_B).
    pub delta_s: f64,
    /// Minimum measurement work `W_M = (T_A / T_R) * dS` (k_B T_R).
    pub w_m: f64,
    /// Work extractable from the qubit reset, `W_Q = -dU` (k_B T_R).
    pub w_q: f64,
    /// Heat removed from the reservoir, `dQ_R = T_R dS_rev = dU` (k_B T_R).
    pub dq_r: f64,
    pub cop: f64,
    pub carnot_cop: f64,
}

/// Summary of the three-step refrigeration cycle for the qubit (`d = 1`) at
/// thermal equilibrium with the reservoir.
pub fn cycle_summary(
    params: &SystemParams,
    t_apparatus: f64,
    t_reservoir: f64,
) -> Result<CycleSummary> {
    params.validate()?;
    if !(t_reservoir > 0.0) {
        return Err(Error::invalid(format!(
            "reservoir temperature must be > 0, got {t_reservoir}"
        )));
    }
    let beta_eps = H_OVER_KB * params.qubit.f01 / t_reservoir;
    let delta_u = beta_eps * internal_energy(1, beta_eps)?;
    let delta_s = measurement_entropy_reduction(1, beta_eps)?;
    let ratio = irr_rev_ratio(1, beta_eps)?;
    let cop_value = cop(t_apparatus, t_reservoir, ratio)?;
    Ok(CycleSummary {
        beta_eps,
        delta_u,
        delta_s,
        w_m: t_apparatus / t_reservoir * delta_s,
        w_q: -delta_u,
        dq_r: delta_u,
        cop: cop_value,
        carnot_cop: t_reservoir / (t_apparatus - t_reservoir),
    })
}
