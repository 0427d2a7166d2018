//! SQUID flux algebra of the flux-tunable junction.
//!
//! The two junction branches combine into a single effective junction,
//! `E_J1 cos(phi - phi_l) + E_J2 cos(phi - phi_l - phi_s)
//!  = E_J_eff cos(phi - phi_l - phi_s/2 - offset)`,
//! and a globally applied flux partitions between the two loops according to
//! their area ratio `V`. No spectrum is computed here; only the flux
//! identities.

use crate::error::{Error, Result};

/// Circuit constants of the measured device. No spectrum is computed from
/// them here; they document the operating point of the flux algebra below.
pub mod reference {
    /// Shunt capacitance (F), mainly from the SQUID junctions.
    pub const CAPACITANCE: f64 = 6.9e-15;
    /// Kinetic superinductance (H).
    pub const INDUCTANCE: f64 = 231e-9;
    /// Effective Josephson energy (Hz) at the operating flux.
    pub const EJ_EFF: f64 = 5.6e9;
    /// Loop-area ratio `V = A_l / A_s` of the design.
    pub const V_RATIO: f64 = 50.0;
    /// Operating global flux in units of the flux quantum.
    pub const PHI_EXT: f64 = 21.48;
}

/// SQUID device parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquidParams {
    /// Josephson energy of the inner junction (Hz).
    pub ej1: f64,
    /// Josephson energy of the outer junction (Hz).
    pub ej2: f64,
    /// Loop-area ratio `V = A_l / A_s`.
    pub v_ratio: f64,
    /// Global external flux in units of the flux quantum.
    pub phi_ext: f64,
}

impl SquidParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ej1 >= 0.0) || !(self.ej2 >= 0.0) {
            return Err(Error::invalid("Josephson energies must be >= 0"));
        }
        if !(self.v_ratio > 0.0) {
            return Err(Error::invalid(format!(
                "loop-area ratio must be > 0, got {}",
                self.v_ratio
            )));
        }
        Ok(())
    }
}

/// Effective Josephson energy and phase offset of the two combined branches
/// at SQUID phase `phi_s` (radians).
///
/// `E_sum = (E_J1 + E_J2) cos(phi_s / 2)`, `E_diff = (E_J2 - E_J1)
/// sin(phi_s / 2)`; the effective energy is `sign(E_sum) *
/// sqrt(E_sum^2 + E_diff^2)` with offset `arctan(E_diff / E_sum)`, keeping
/// the printed sign convention so the arctangent branch matches the phase
/// shift. The degenerate `E_sum = 0` case uses the two-argument arctangent.
pub fn effective_junction(ej1: f64, ej2: f64, phi_s: f64) -> Result<(f64, f64)> {
    if !(ej1 >= 0.0) || !(ej2 >= 0.0) {
        return Err(Error::invalid("Josephson energies must be >= 0"));
    }
    let e_sum = (ej1 + ej2) * (phi_s / 2.0).cos();
    let e_diff = (ej2 - ej1) * (phi_s / 2.0).sin();
    if e_sum == 0.0 && e_diff == 0.0 {
        return Ok((0.0, 0.0));
    }
    let magnitude = e_sum.hypot(e_diff);
    if e_sum == 0.0 {
        // Pure sine quadrature: positive magnitude at +-pi/2 offset.
        return Ok((magnitude, std::f64::consts::FRAC_PI_2.copysign(e_diff)));
    }
    Ok((magnitude.copysign(e_sum), (e_diff / e_sum).atan()))
}

/// Partition of a global external flux (units of the flux quantum) into the
/// SQUID phase, the loop phase and their sum, for loop-area ratio `V`:
/// `phi_s = 2 phi_ext / (2V + 1)`, `phi_l = (1 - 1/(2V+1)) phi_ext`.
pub fn flux_partition(v_ratio: f64, phi_ext: f64) -> Result<(f64, f64, f64)> {
    if !(v_ratio > 0.0) {
        return Err(Error::invalid(format!(
            "loop-area ratio must be > 0, got {v_ratio}"
        )));
    }
    let denom = 2.0 * v_ratio + 1.0;
    let phi_s = 2.0 / denom * phi_ext;
    let phi_l = (1.0 - 1.0 / denom) * phi_ext;
    // The sum identity holds exactly by construction.
    Ok((phi_s, phi_l, phi_l + phi_s))
}

/// Integer witness of the quasiparticle destructive-interference condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterferenceWitness {
    pub m: i64,
    pub k: i64,
}

/// Whether the loop-area ratio admits the quasiparticle
/// destructive-interference condition `V = (2k - 1) / (2m)` for integers
/// `|m|, |k| <= search_bound` (to rational tolerance 1e-9). Integer ratios
/// never satisfy it.
pub fn interference_condition(
    v_ratio: f64,
    search_bound: i64,
) -> Result<(bool, Option<InterferenceWitness>)> {
    if !(v_ratio > 0.0) {
        return Err(Error::invalid(format!(
            "loop-area ratio must be > 0, got {v_ratio}"
        )));
    }
    if search_bound < 1 {
        return Err(Error::invalid("search bound must be >= 1"));
    }
    let tol = 1e-9 * v_ratio.abs().max(1.0);
    for m in 1..=search_bound {
        // V = (2k - 1) / (2m)  =>  k = m V + 1/2.
        let k_real = m as f64 * v_ratio + 0.5;
        let k = k_real.round();
        if k.abs() as i64 > search_bound {
            continue;
        }
        let implied = (2.0 * k - 1.0) / (2.0 * m as f64);
        if (implied - v_ratio).abs() <= tol {
            return Ok((true, Some(InterferenceWitness { m, k: k as i64 })));
        }
    }
    Ok((false, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn reconstruction_error(ej1: f64, ej2: f64, phi_s: f64, phi_l: f64) -> f64 {
        let (e_eff, offset) = effective_junction(ej1, ej2, phi_s).unwrap();
        let mut worst = 0.0f64;
        for i in 0..100 {
            let phi = -6.0 + 12.0 * i as f64 / 99.0;
            let lhs = ej1 * (phi - phi_l).cos() + ej2 * (phi - phi_l - phi_s).cos();
            let rhs = e_eff * (phi - phi_l - phi_s / 2.0 - offset).cos();
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }

    #[test]
    fn symmetric_junctions() {
        let (e, off) = effective_junction(3.0e9, 3.0e9, 0.0).unwrap();
        assert_relative_eq!(e, 6.0e9, max_relative = 1e-15);
        assert_eq!(off, 0.0);
        // Full destructive combination at phi_s = pi.
        let (e, off) = effective_junction(3.0e9, 3.0e9, std::f64::consts::PI).unwrap();
        assert!(e.abs() < 1e-6, "e = {e}");
        assert_abs_diff_eq!(off, 0.0, epsilon = 1e-12);
        // Zero junction is the defined degenerate case.
        assert_eq!(effective_junction(0.0, 0.0, 1.0).unwrap(), (0.0, 0.0));
        assert!(effective_junction(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn asymmetric_reconstruction() {
        let err = reconstruction_error(5.1e9, 3.3e9, 1.7, 0.9);
        assert!(err < 1e-10 * 8.4e9, "reconstruction error {err}");
        // E_sum = 0 branch (phi_s = pi with unequal energies).
        let err = reconstruction_error(5.1e9, 3.3e9, std::f64::consts::PI, 0.4);
        assert!(err < 1e-10 * 8.4e9, "reconstruction error at the degenerate branch {err}");
    }

    #[test]
    fn swap_symmetry_of_the_magnitude() {
        for (e1, e2, ps) in [(5.1e9, 3.3e9, 1.7), (1.0e9, 9.0e9, -0.8), (2.0e9, 2.0e9, 2.9)] {
            let (a, _) = effective_junction(e1, e2, ps).unwrap();
            let (b, _) = effective_junction(e2, e1, -ps).unwrap();
            assert_relative_eq!(a.abs(), b.abs(), max_relative = 1e-12);
        }
    }

    #[test]
    fn partition_at_the_operating_point() {
        let (phi_s, phi_l, phi_ls) = flux_partition(50.0, 21.48).unwrap();
        assert_abs_diff_eq!(phi_s, 0.4254, epsilon = 1e-4);
        assert_abs_diff_eq!(phi_l, 21.2673, epsilon = 1e-4);
        assert_abs_diff_eq!(phi_ls, 21.6927, epsilon = 1e-4);
        assert_eq!(phi_l + phi_s, phi_ls);
        assert_eq!(flux_partition(50.0, 0.0).unwrap(), (0.0, 0.0, 0.0));
        assert!(flux_partition(0.0, 1.0).is_err());
        assert!(interference_condition(50.0, 0).is_err());
    }

    #[test]
    fn interference_condition_cases() {
        // V = 50: even denominator can never produce an odd numerator.
        let (ok, w) = interference_condition(50.0, 1000).unwrap();
        assert!(!ok && w.is_none());
        let (ok, w) = interference_condition(50.5, 1000).unwrap();
        assert_eq!(w, Some(InterferenceWitness { m: 1, k: 51 }));
        assert!(ok);
        let (ok, w) = interference_condition(0.5, 10).unwrap();
        assert!(ok);
        assert_eq!(w, Some(InterferenceWitness { m: 1, k: 1 }));
        // Integer ratios are always false.
        for v in 1..20 {
            let (ok, _) = interference_condition(v as f64, 500).unwrap();
            assert!(!ok, "integer V = {v} must not satisfy the condition");
        }
    }

    proptest! {
        #[test]
        fn reconstruction_identity(ej1 in 0.0f64..1e10, ej2 in 0.0f64..1e10,
                                   phi_s in -6.0f64..6.0, phi_l in -6.0f64..6.0) {
            let err = reconstruction_error(ej1, ej2, phi_s, phi_l);
            prop_assert!(err <= 1e-10 * (ej1 + ej2).max(1.0));
        }

        #[test]
        fn partition_is_linear(v in 0.1f64..1e3, phi in -50.0f64..50.0, s in 0.1f64..5.0) {
            let (a1, b1, c1) = flux_partition(v, phi).unwrap();
            let (a2, b2, c2) = flux_partition(v, s * phi).unwrap();
            prop_assert!((a2 - s * a1).abs() <= 1e-9 * a1.abs().max(1.0));
            prop_assert!((b2 - s * b1).abs() <= 1e-9 * b1.abs().max(1.0));
            prop_assert!((c2 - s * c1).abs() <= 1e-9 * c1.abs().max(1.0));
        }
    }
}
