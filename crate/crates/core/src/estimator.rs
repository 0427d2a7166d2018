//! Rate and lifetime estimation from ensembles of jump traces.
//!
//! The transition rates follow from the probability to measure the same
//! qubit state in successive monitor readouts:
//! `gamma_up = -ln(P_gg) / t_rep` and `gamma_down = -ln(P_ee) / t_rep`,
//! with `gamma_1 = gamma_up + gamma_down` and `p_eq = gamma_up / gamma_1`.
//! Conditioning uses the assigned states, exactly as the experiment must, so
//! misassignment and demolition bias the estimates the same way they do in
//! the lab; the `true_states` channel of a trace quantifies that bias.

use crate::error::{Error, Result};
use crate::fitting::simplex::{self, SimplexOptions};
use crate::trajectory::{JumpTrace, StrobePhase};

/// Time-resolved transition-rate estimates with delta-method standard errors.
///
/// Strobes whose conditioning set is empty are marked `None` (missing), never
/// zero. `gamma_1` and `p_eq` are recomputed pointwise from the two rate
/// channels after every transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    /// Time of the conditioning strobe since the observation start (s).
    pub times: Vec<f64>,
    pub gamma_up: Vec<Option<f64>>,
    pub gamma_up_err: Vec<Option<f64>>,
    pub gamma_down: Vec<Option<f64>>,
    pub gamma_down_err: Vec<Option<f64>>,
    pub gamma_1: Vec<Option<f64>>,
    pub p_eq: Vec<Option<f64>>,
    /// Smoothing width in samples (1 = unsmoothed).
    pub window: usize,
}

impl RateSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn derive_channels(&mut self) {
        self.gamma_1 = self
            .gamma_up
            .iter()
            .zip(&self.gamma_down)
            .map(|(u, d)| match (u, d) {
                (Some(u), Some(d)) => Some(u + d),
                _ => None,
            })
            .collect();
        self.p_eq = self
            .gamma_up
            .iter()
            .zip(&self.gamma_1)
            .map(|(u, g1)| match (u, g1) {
                (Some(u), Some(g1)) if *g1 > 0.0 => Some(u / g1),
                _ => None,
            })
            .collect();
    }
}

/// Conditional-transition counts pooled over a strobe window.
#[derive(Debug, Clone, Default)]
pub struct PooledRates {
    pub gamma_up: Option<f64>,
    pub gamma_up_err: Option<f64>,
    pub gamma_down: Option<f64>,
    pub gamma_down_err: Option<f64>,
    /// Number of conditioning samples in the ground state.
    pub n_ground: u64,
    /// Number of conditioning samples in the excited state.
    pub n_excited: u64,
}

impl PooledRates {
    pub fn gamma_1(&self) -> Option<f64> {
        Some(self.gamma_up? + self.gamma_down?)
    }

    pub fn gamma_1_err(&self) -> Option<f64> {
        Some((self.gamma_up_err?.powi(2) + self.gamma_down_err?.powi(2)).sqrt())
    }
}

#[derive(Clone, Copy, Default)]
struct PairCounts {
    n_g: u64,
    n_gg: u64,
    n_e: u64,
    n_ee: u64,
}

fn rate_from_survival(stay: u64, total: u64, t_rep: f64) -> (Option<f64>, Option<f64>) {
    if total == 0 {
        return (None, None);
    }
    let p = stay as f64 / total as f64;
    if p <= 0.0 {
        // Survival probability of zero has no finite rate.
        return (None, None);
    }
    // .max(0.0) normalizes the -0.0 that -ln(1) produces.
    let rate = (-p.ln() / t_rep).max(0.0);
    let err = (p * (1.0 - p) / total as f64).sqrt() / (p * t_rep);
    (Some(rate), Some(err))
}

/// Ordinals of the monitor strobes of a trace, with a flag for whether the
/// following strobe continues the same monitor step.
fn monitor_pairs(trace: &JumpTrace) -> impl Iterator<Item = (usize, bool)> + '_ {
    let n = trace.len();
    (0..n).filter_map(move |i| {
        if trace.phase[i] != StrobePhase::Monitor {
            return None;
        }
        let paired = i + 1 < n
            && trace.phase[i + 1] == StrobePhase::Monitor
            && trace.step_index[i + 1] == trace.step_index[i];
        Some((i, paired))
    })
}

fn accumulate_counts(ensemble: &[JumpTrace]) -> Result<Vec<PairCounts>> {
    if ensemble.is_empty() {
        return Err(Error::invalid("ensemble must not be empty"));
    }
    let len = ensemble[0].len();
    if ensemble.iter().any(|t| t.len() != len) {
        return Err(Error::invalid("all traces of an ensemble must share one strobe schedule"));
    }
    let n_monitor = monitor_pairs(&ensemble[0]).count();
    if n_monitor < 2 {
        return Err(Error::invalid("rate extraction needs at least two monitor strobes per trace"));
    }
    let mut counts = vec![PairCounts::default(); n_monitor];
    for trace in ensemble {
        for (ordinal, (i, paired)) in monitor_pairs(trace).enumerate() {
            if !paired {
                continue;
            }
            let c = &mut counts[ordinal];
            if trace.assigned[i] {
                c.n_e += 1;
                c.n_ee += trace.assigned[i + 1] as u64;
            } else {
                c.n_g += 1;
                c.n_gg += !trace.assigned[i + 1] as u64;
            }
        }
    }
    counts.pop(); // the final strobe has no successor
    Ok(counts)
}

/// Time-resolved rates from the conditional same-state probabilities of
/// successive monitor readouts.
pub fn extract_rates(ensemble: &[JumpTrace], t_rep: f64) -> Result<RateSeries> {
    if !(t_rep > 0.0) {
        return Err(Error::invalid(format!("t_rep must be > 0, got {t_rep}")));
    }
    let counts = accumulate_counts(ensemble)?;
    let mut series = RateSeries {
        times: (0..counts.len()).map(|m| (m + 1) as f64 * t_rep).collect(),
        gamma_up: Vec::with_capacity(counts.len()),
        gamma_up_err: Vec::with_capacity(counts.len()),
        gamma_down: Vec::with_capacity(counts.len()),
        gamma_down_err: Vec::with_capacity(counts.len()),
        gamma_1: Vec::new(),
        p_eq: Vec::new(),
        window: 1,
    };
    for c in &counts {
        let (up, up_err) = rate_from_survival(c.n_gg, c.n_g, t_rep);
        let (down, down_err) = rate_from_survival(c.n_ee, c.n_e, t_rep);
        series.gamma_up.push(up);
        series.gamma_up_err.push(up_err);
        series.gamma_down.push(down);
        series.gamma_down_err.push(down_err);
    }
    series.derive_channels();
    Ok(series)
}

/// Rates from transitions pooled over a window of monitor-strobe ordinals;
/// the stationary-data estimator.
pub fn pooled_rates(
    ensemble: &[JumpTrace],
    t_rep: f64,
    ordinals: std::ops::Range<usize>,
) -> Result<PooledRates> {
    if !(t_rep > 0.0) {
        return Err(Error::invalid(format!("t_rep must be > 0, got {t_rep}")));
    }
    let counts = accumulate_counts(ensemble)?;
    let end = ordinals.end.min(counts.len());
    if ordinals.start >= end {
        return Err(Error::invalid("empty pooling window"));
    }
    let mut total = PairCounts::default();
    for c in &counts[ordinals.start..end] {
        total.n_g += c.n_g;
        total.n_gg += c.n_gg;
        total.n_e += c.n_e;
        total.n_ee += c.n_ee;
    }
    let (gamma_up, gamma_up_err) = rate_from_survival(total.n_gg, total.n_g, t_rep);
    let (gamma_down, gamma_down_err) = rate_from_survival(total.n_ee, total.n_e, t_rep);
    Ok(PooledRates {
        gamma_up,
        gamma_up_err,
        gamma_down,
        gamma_down_err,
        n_ground: total.n_g,
        n_excited: total.n_e,
    })
}

/// Centered boxcar filter applied to the two rate channels; `gamma_1` and
/// `p_eq` are recomputed from the smoothed channels. Edges truncate to the
/// available samples and missing entries are skipped.
pub fn moving_average(series: &RateSeries, window: usize) -> Result<RateSeries> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::invalid(format!(
            "smoothing window must be an odd count >= 1, got {window}"
        )));
    }
    let half = window / 2;
    let smooth = |vals: &[Option<f64>], errs: &[Option<f64>]| {
        let mut out = Vec::with_capacity(vals.len());
        let mut out_err = Vec::with_capacity(vals.len());
        for i in 0..vals.len() {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(vals.len());
            let mut sum = 0.0;
            let mut var = 0.0;
            let mut n = 0usize;
            for j in lo..hi {
                if let Some(v) = vals[j] {
                    sum += v;
                    var += errs[j].unwrap_or(0.0).powi(2);
                    n += 1;
                }
            }
            if n == 0 {
                out.push(None);
                out_err.push(None);
            } else {
                out.push(Some(sum / n as f64));
                out_err.push(Some(var.sqrt() / n as f64));
            }
        }
        (out, out_err)
    };
    let (gamma_up, gamma_up_err) = smooth(&series.gamma_up, &series.gamma_up_err);
    let (gamma_down, gamma_down_err) = smooth(&series.gamma_down, &series.gamma_down_err);
    let mut out = RateSeries {
        times: series.times.clone(),
        gamma_up,
        gamma_up_err,
        gamma_down,
        gamma_down_err,
        gamma_1: Vec::new(),
        p_eq: Vec::new(),
        window,
    };
    out.derive_channels();
    Ok(out)
}

/// Excited-state fraction per monitor strobe with binomial standard errors.
#[derive(Debug, Clone)]
pub struct PopulationSeries {
    pub times: Vec<f64>,
    pub p_q: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Ensemble excited fraction at every monitor strobe.
pub fn population_series(ensemble: &[JumpTrace], t_rep: f64) -> Result<PopulationSeries> {
    if !(t_rep > 0.0) {
        return Err(Error::invalid(format!("t_rep must be > 0, got {t_rep}")));
    }
    if ensemble.is_empty() {
        return Err(Error::invalid("ensemble must not be empty"));
    }
    let len = ensemble[0].len();
    if ensemble.iter().any(|t| t.len() != len) {
        return Err(Error::invalid("all traces of an ensemble must share one strobe schedule"));
    }
    let monitor_idx: Vec<usize> = (0..len)
        .filter(|&i| ensemble[0].phase[i] == StrobePhase::Monitor)
        .collect();
    let n = ensemble.len() as f64;
    let mut series = PopulationSeries {
        times: (0..monitor_idx.len()).map(|m| (m + 1) as f64 * t_rep).collect(),
        p_q: Vec::with_capacity(monitor_idx.len()),
        stderr: Vec::with_capacity(monitor_idx.len()),
    };
    for &i in &monitor_idx {
        let hits = ensemble.iter().filter(|t| t.assigned[i]).count() as f64;
        let p = hits / n;
        series.p_q.push(p);
        series.stderr.push((p * (1.0 - p) / n).sqrt());
    }
    Ok(series)
}

/// Result of a windowed exponential lifetime fit.
#[derive(Debug, Clone, Copy)]
pub struct T1Fit {
    /// Fitted lifetime (s).
    pub t1: f64,
    /// Standard error of the lifetime (s).
    pub stderr: f64,
    /// Fitted initial population.
    pub p0: f64,
}

/// Least-squares fit of `p(t) = baseline + (p0 - baseline) exp(-t / T1)` to
/// the samples with `t <= fit_window`. The baseline is held fixed, matching
/// the analysis that uses the known thermal population.
pub fn fit_exponential_t1(
    times: &[f64],
    p_q: &[f64],
    fit_window: f64,
    baseline: f64,
) -> Result<T1Fit> {
    if times.len() != p_q.len() {
        return Err(Error::invalid("times and populations must have equal length"));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(p_q)
        .filter(|(t, _)| **t <= fit_window)
        .map(|(t, p)| (*t, *p))
        .collect();
    if pts.len() < 3 {
        return Err(Error::invalid(format!(
            "fit window contains {} points, need at least 3",
            pts.len()
        )));
    }
    if pts.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
        return Err(Error::invalid("fit data must be finite"));
    }

    let sse = |p0: f64, t1: f64| -> f64 {
        pts.iter()
            .map(|&(t, p)| {
                let m = baseline + (p0 - baseline) * (-t / t1).exp();
                (m - p).powi(2)
            })
            .sum()
    };
    let span = fit_window.max(pts.last().unwrap().0);
    let lo = [-1.0, span * 1e-4];
    let hi = [2.0, span * 1e4];
    let x0 = [pts[0].1, span.max(1e-9)];
    let mut objective = |x: &[f64]| sse(x[0], x[1]);
    let res = simplex::minimize(&mut objective, &x0, &lo, &hi, &SimplexOptions::default());
    if !res.converged {
        return Err(Error::FitFailed(format!(
            "exponential fit did not converge after {} iterations (residual {})",
            res.iterations, res.fx
        )));
    }
    let (p0, t1) = (res.x[0], res.x[1]);

    // Curvature-based standard error on T1.
    let dof = (pts.len() as f64 - 2.0).max(1.0);
    let s2 = res.fx / dof;
    let h = t1 * 1e-4;
    let curv = (sse(p0, t1 + h) - 2.0 * res.fx + sse(p0, t1 - h)) / (h * h);
    let stderr = if curv > 0.0 { (2.0 * s2 / curv).sqrt() } else { f64::INFINITY };
    Ok(T1Fit { t1, stderr, p0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LadderParams, QubitParams, SystemParams};
    use crate::trajectory::{run_ensemble, JumpTrace, ReadoutModel, StrobePhase};
    use crate::{Experiment, QubitLevel};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Build a monitor-only trace from a list of assigned states.
    fn trace_from(assigned: Vec<bool>) -> JumpTrace {
        let n = assigned.len();
        JumpTrace {
            iq: vec![[0.0, 0.0]; n],
            pi_fired: vec![false; n],
            true_states: assigned.clone(),
            phase: vec![StrobePhase::Monitor; n],
            step_index: vec![0; n],
            assigned,
        }
    }

    /// Stationary two-state Markov chain sampled at the strobe times, using
    /// the exact one-step conditionals from the 2x2 matrix exponential.
    fn two_state_ensemble(
        gamma_up: f64,
        gamma_down: f64,
        t_rep: f64,
        n_traces: usize,
        n_strobes: usize,
        seed: u64,
    ) -> Vec<JumpTrace> {
        let g1 = gamma_up + gamma_down;
        let p_eq = gamma_up / g1;
        let decay = (-g1 * t_rep).exp();
        let stay_g = (gamma_down + gamma_up * decay) / g1;
        let stay_e = (gamma_up + gamma_down * decay) / g1;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n_traces)
            .map(|_| {
                let mut state = rng.random::<f64>() < p_eq;
                let assigned: Vec<bool> = (0..n_strobes)
                    .map(|_| {
                        let stay = if state { stay_e } else { stay_g };
                        if rng.random::<f64>() >= stay {
                            state = !state;
                        }
                        state
                    })
                    .collect();
                trace_from(assigned)
            })
            .collect()
    }

    #[test]
    fn recovers_two_state_rates_against_matrix_exponential_oracle() {
        // gamma_up = 5 kHz, gamma_down = 41.5 kHz at t_rep = 2 us. The
        // one-step estimator converges to -ln(P_stay)/t_rep of the exact
        // chain: 4797.5 and 41287.4 (matrix-exponential values).
        let t_rep = 2e-6;
        let ensemble = two_state_ensemble(5.0e3, 41.5e3, t_rep, 400, 600, 99);
        let pooled = pooled_rates(&ensemble, t_rep, 0..600).unwrap();
        let up = pooled.gamma_up.unwrap();
        let down = pooled.gamma_down.unwrap();
        assert!(
            (up - 4797.485).abs() < 3.0 * pooled.gamma_up_err.unwrap(),
            "gamma_up {up}"
        );
        assert!(
            (down - 41287.39).abs() < 3.0 * pooled.gamma_down_err.unwrap(),
            "gamma_down {down}"
        );
        // First-order reading of the same numbers: P_gg ~ exp(-gamma_up t).
        assert_abs_diff_eq!((-(5.0e3) * t_rep as f64).exp(), 0.99005, epsilon = 1e-5);
    }

    #[test]
    fn estimator_is_unbiased_on_stationary_data() {
        let t_rep = 2e-6;
        let truth_up = -((41.5e3 + 5.0e3 * (-46.5e3f64 * t_rep).exp()) / 46.5e3).ln() / t_rep;
        let mut estimates = Vec::new();
        let mut errs = Vec::new();
        for rep in 0..100 {
            let ensemble = two_state_ensemble(5.0e3, 41.5e3, t_rep, 30, 60, 1000 + rep);
            let pooled = pooled_rates(&ensemble, t_rep, 0..60).unwrap();
            if let (Some(u), Some(e)) = (pooled.gamma_up, pooled.gamma_up_err) {
                estimates.push(u);
                errs.push(e);
            }
        }
        let n = estimates.len() as f64;
        let mean: f64 = estimates.iter().sum::<f64>() / n;
        let mean_err = (errs.iter().map(|e| e * e).sum::<f64>()).sqrt() / n;
        assert!(
            (mean - truth_up).abs() < 2.0 * mean_err,
            "mean {mean} vs truth {truth_up} (err {mean_err})"
        );
    }

    #[test]
    fn constant_ground_traces_give_zero_up_rate_and_missing_down_rate() {
        let ensemble: Vec<JumpTrace> = (0..10).map(|_| trace_from(vec![false; 50])).collect();
        let series = extract_rates(&ensemble, 2e-6).unwrap();
        assert_eq!(series.len(), 49);
        assert!(extract_rates(&[], 2e-6).is_err());
        assert!(extract_rates(&ensemble, 0.0).is_err());
        assert!(series.gamma_up.iter().all(|u| *u == Some(0.0)));
        assert!(series.gamma_down.iter().all(|d| d.is_none()));
        assert!(series.gamma_1.iter().all(|g| g.is_none()));
    }

    #[test]
    fn demolition_appears_as_added_decay_rate() {
        // Zero system rates, 4% demolition at t_rep = 2 us: the jump method
        // reports gamma_down = -ln(0.96)/t_rep ~ 20.4 kHz.
        let params = SystemParams {
            qubit: QubitParams { f01: 1.2e9, gamma_q: 0.0, p_th: 0.0 },
            ladder: LadderParams { a: 0.0, b: 0.48, c: 0.0, n_tls: 1, gamma_t: 0.0 },
        };
        let readout = ReadoutModel {
            separation_sigma: 40.0,
            demolition_down: 0.04,
            demolition_up: 0.0,
            centers: [[0.0, 0.0], [40.0, 0.0]],
        };
        let n_tls = params.ladder.n_tls;
        let exp = Experiment {
            steps: vec![crate::model::Step::Monitor { duration: 200e-6, t_rep: 2e-6 }],
            initial_state: crate::model::InitialState::Explicit(
                crate::model::PopulationState::new(1.0, vec![0.0; n_tls], 0.0).unwrap(),
            ),
        };
        let ensemble = run_ensemble(&exp, &params, &readout, 31, 4000).unwrap();
        let pooled = pooled_rates(&ensemble, 2e-6, 0..30).unwrap();
        let down = pooled.gamma_down.unwrap();
        let expect = -(1.0f64 - 0.04).ln() / 2e-6;
        assert!(
            (down - expect).abs() < 3.0 * pooled.gamma_down_err.unwrap(),
            "gamma_down {down} vs {expect}"
        );
    }

    #[test]
    fn moving_average_identities() {
        let t_rep = 2e-6;
        let ensemble = two_state_ensemble(8.0e3, 30.0e3, t_rep, 50, 80, 5);
        let series = extract_rates(&ensemble, t_rep).unwrap();
        // Window 1 is the identity.
        let same = moving_average(&series, 1).unwrap();
        assert_eq!(same.gamma_up, series.gamma_up);
        // Even windows are rejected.
        assert!(moving_average(&series, 4).is_err());
        let smoothed = moving_average(&series, 5).unwrap();
        assert_eq!(smoothed.window, 5);
        // Pointwise identities hold after smoothing.
        for i in 0..smoothed.len() {
            if let (Some(u), Some(d)) = (smoothed.gamma_up[i], smoothed.gamma_down[i]) {
                assert_relative_eq!(smoothed.gamma_1[i].unwrap(), u + d, max_relative = 1e-12);
                assert_relative_eq!(smoothed.p_eq[i].unwrap(), u / (u + d), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn moving_average_reduces_alternating_noise() {
        let m = 10.0e3;
        let x = 1.0e3;
        let n = 41;
        let series = RateSeries {
            times: (0..n).map(|i| i as f64).collect(),
            gamma_up: (0..n).map(|i| Some(m + if i % 2 == 0 { x } else { -x })).collect(),
            gamma_up_err: vec![Some(0.0); n],
            gamma_down: vec![Some(m); n],
            gamma_down_err: vec![Some(0.0); n],
            gamma_1: vec![None; n],
            p_eq: vec![None; n],
            window: 1,
        };
        let smoothed = moving_average(&series, 5).unwrap();
        for i in 2..n - 2 {
            let v = smoothed.gamma_up[i].unwrap();
            assert!((v - m).abs() <= x / 5.0f64.sqrt() + 1e-9, "sample {i}: {v}");
        }
        // A constant channel is unchanged.
        assert!(smoothed.gamma_down.iter().all(|d| *d == Some(m)));
    }

    #[test]
    fn population_series_basics() {
        let ensemble: Vec<JumpTrace> = (0..8).map(|_| trace_from(vec![true; 20])).collect();
        let series = population_series(&ensemble, 2e-6).unwrap();
        assert!(series.p_q.iter().all(|&p| p == 1.0));
        assert!(series.stderr.iter().all(|&e| e == 0.0));
        assert_abs_diff_eq!(series.times[0], 2e-6);
        assert_abs_diff_eq!(series.times[19], 40e-6);
    }

    #[test]
    fn exponential_fit_recovers_exact_decay() {
        let t1 = 21.5e-6;
        let baseline = 0.1156;
        let times: Vec<f64> = (0..41).map(|i| i as f64 * 0.5e-6).collect();
        let p: Vec<f64> = times
            .iter()
            .map(|t| baseline + (0.9 - baseline) * (-t / t1).exp())
            .collect();
        let fit = fit_exponential_t1(&times, &p, 20e-6, baseline).unwrap();
        assert_relative_eq!(fit.t1, t1, max_relative = 1e-6);
        assert_relative_eq!(fit.p0, 0.9, max_relative = 1e-6);
        // Too few points in the window is an error.
        assert!(fit_exponential_t1(&times, &p, 0.6e-6, baseline).is_err());
    }

    #[test]
    fn windowed_fit_overestimates_t1_on_the_coupled_system() {
        // Free decay of the full system after a pi-pulse from equilibrium:
        // the jump method gives 1/gamma_1 = 21.5 us while the windowed
        // exponential fit lands near 24 us because the energy deposited by
        // the pulse heats the TLS environment.
        let params = SystemParams::default();
        let exp = crate::model::Experiment::thermal()
            .pi_pulse_train(1, 0.0)
            .free_decay(100e-6);
        let times: Vec<f64> = (0..41).map(|i| i as f64 * 0.5e-6).collect();
        let det = crate::dynamics::run_deterministic(
            &exp,
            &params,
            &crate::dynamics::SampleGrid::Times(times.clone()),
        )
        .unwrap();
        let fit = fit_exponential_t1(&det.times, &det.p_q, 20e-6, params.qubit.p_th).unwrap();
        let jump_t1 = 1.0 / params.gamma_1().unwrap();
        assert_abs_diff_eq!(jump_t1 * 1e6, 21.46, epsilon = 0.05);
        assert_abs_diff_eq!(fit.t1 * 1e6, 24.08, epsilon = 0.3);
        assert!(fit.t1 > jump_t1 * 1.05);
    }

    #[test]
    fn gap_between_monitor_steps_is_not_a_transition() {
        // Two monitor segments: the pair spanning the gap must be ignored.
        let mut trace = trace_from(vec![false, false, true, true]);
        trace.step_index = vec![0, 0, 2, 2];
        let ensemble = vec![trace; 20];
        let series = extract_rates(&ensemble, 2e-6).unwrap();
        // Ordinals: 0 (pair within step 0), 1 (gap, no counts), 2 (pair
        // within step 2).
        assert_eq!(series.len(), 3);
        assert_eq!(series.gamma_up[0], Some(0.0));
        assert!(series.gamma_up[1].is_none() && series.gamma_down[1].is_none());
        assert_eq!(series.gamma_down[2], Some(0.0));
    }

    #[test]
    fn stabilize_strobes_are_excluded_from_rate_extraction() {
        let params = SystemParams::default();
        let exp = crate::model::Experiment::thermal()
            .stabilize(QubitLevel::Ground, 40, 2e-6)
            .monitor(20e-6, 2e-6);
        let ensemble = run_ensemble(&exp, &params, &ReadoutModel::ideal(), 8, 50).unwrap();
        let series = extract_rates(&ensemble, 2e-6).unwrap();
        assert_eq!(series.len(), 9); // 10 monitor strobes -> 9 pairs
    }
}
