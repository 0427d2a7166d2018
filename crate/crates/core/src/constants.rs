//! Physical constants. Every temperature conversion in the crate traces back
//! to the single ratio below.

/// Planck constant over Boltzmann constant, in s*K.
///
/// `h*f / (k_B*T) = H_OVER_KB * f / T` for `f` in Hz and `T` in K.
pub const H_OVER_KB: f64 = 4.799243e-11;
