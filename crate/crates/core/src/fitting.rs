//! Simultaneous least-squares recovery of model parameters from population
//! curves.
//!
//! The objective is the weighted sum of squared differences between measured
//! qubit populations and [`crate::dynamics::run_deterministic`] curves,
//! restricted to a per-dataset fit window. The optimizer is a bounded
//! derivative-free simplex with seeded random restarts: the objective is
//! smooth but finite differences through the matrix-exponential propagator
//! are noisy, so derivative-free descent is the robust choice at this
//! dimension (at most six parameters).

use crate::dynamics::{run_deterministic, SampleGrid};
use crate::error::{Error, Result};
use crate::model::{Experiment, SystemParams};

/// Fittable model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamId {
    A,
    B,
    C,
    GammaQ,
    GammaT,
    PTh,
}

impl ParamId {
    pub const ALL: [ParamId; 6] = [
        ParamId::A,
        ParamId::B,
        ParamId::C,
        ParamId::GammaQ,
        ParamId::GammaT,
        ParamId::PTh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamId::A => "a",
            ParamId::B => "b",
            ParamId::C => "c",
            ParamId::GammaQ => "gamma_q",
            ParamId::GammaT => "gamma_t",
            ParamId::PTh => "p_th",
        }
    }

    pub fn from_name(name: &str) -> Option<ParamId> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    fn apply(self, params: &mut SystemParams, value: f64) {
        match self {
            ParamId::A => params.ladder.a = value,
            ParamId::B => params.ladder.b = value,
            ParamId::C => params.ladder.c = value,
            ParamId::GammaQ => params.qubit.gamma_q = value,
            ParamId::GammaT => params.ladder.gamma_t = value,
            ParamId::PTh => params.qubit.p_th = value,
        }
    }

    pub fn get(self, params: &SystemParams) -> f64 {
        match self {
            ParamId::A => params.ladder.a,
            ParamId::B => params.ladder.b,
            ParamId::C => params.ladder.c,
            ParamId::GammaQ => params.qubit.gamma_q,
            ParamId::GammaT => params.ladder.gamma_t,
            ParamId::PTh => params.qubit.p_th,
        }
    }
}

/// One measured (or synthesized) population curve with its protocol.
#[derive(Debug, Clone)]
pub struct FitDataset {
    pub experiment: Experiment,
    /// Sample times on the observation clock (s).
    pub times: Vec<f64>,
    /// Measured qubit excited population.
    pub p_q: Vec<f64>,
    /// Per-point standard errors; unit weights when absent.
    pub stderr: Option<Vec<f64>>,
    /// Only samples with `t <= fit_window` enter the objective.
    pub fit_window: f64,
}

/// A least-squares problem over a subset of the model parameters.
#[derive(Debug, Clone)]
pub struct FitProblem {
    /// Parameter values for everything not being fitted.
    pub base: SystemParams,
    pub datasets: Vec<FitDataset>,
    /// Free parameters, in candidate-vector order.
    pub free: Vec<ParamId>,
    /// Bounds per free parameter, parallel to `free`.
    pub bounds: Vec<(f64, f64)>,
}

impl FitProblem {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.datasets.is_empty() {
            return Err(Error::invalid("fit problem needs at least one dataset"));
        }
        for (i, ds) in self.datasets.iter().enumerate() {
            ds.experiment.validate(self.base.ladder.n_tls)?;
            if ds.times.len() != ds.p_q.len() {
                return Err(Error::invalid(format!("dataset {i}: times/p_q length mismatch")));
            }
            if let Some(err) = &ds.stderr {
                if err.len() != ds.times.len() {
                    return Err(Error::invalid(format!("dataset {i}: stderr length mismatch")));
                }
                if err.iter().any(|e| !(*e > 0.0)) {
                    return Err(Error::invalid(format!(
                        "dataset {i}: standard errors must be positive"
                    )));
                }
            }
            if !ds.times.iter().any(|&t| t <= ds.fit_window) {
                return Err(Error::invalid(format!("dataset {i}: empty fit window")));
            }
        }
        if self.free.len() != self.bounds.len() {
            return Err(Error::invalid("free parameter list and bounds must have equal length"));
        }
        for (p, &(lo, hi)) in self.free.iter().zip(&self.bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "bounds for {} must be finite and ordered, got [{lo}, {hi}]",
                    p.name()
                )));
            }
            // Both bound endpoints must be valid parameter values.
            for v in [lo, hi] {
                let mut params = self.base.clone();
                p.apply(&mut params, v);
                params.validate().map_err(|e| {
                    Error::invalid(format!("bound {v} for {} is invalid: {e}", p.name()))
                })?;
            }
        }
        Ok(())
    }

    /// The system described by a candidate vector for the free parameters.
    pub fn params_with(&self, candidate: &[f64]) -> Result<SystemParams> {
        if candidate.len() != self.free.len() {
            return Err(Error::invalid(format!(
                "candidate has {} entries, problem has {} free parameters",
                candidate.len(),
                self.free.len()
            )));
        }
        let mut params = self.base.clone();
        for (p, &v) in self.free.iter().zip(candidate) {
            p.apply(&mut params, v);
        }
        Ok(params)
    }

    fn check_in_bounds(&self, candidate: &[f64]) -> Result<()> {
        for ((p, &(lo, hi)), &v) in self.free.iter().zip(&self.bounds).zip(candidate) {
            if !(v >= lo && v <= hi) {
                return Err(Error::invalid(format!(
                    "candidate {}={v} outside bounds [{lo}, {hi}]",
                    p.name()
                )));
            }
        }
        Ok(())
    }
}

/// Weighted residual vector `(model - data) / stderr`, concatenated over
/// datasets and restricted to each fit window.
pub fn residuals(problem: &FitProblem, candidate: &[f64]) -> Result<Vec<f64>> {
    problem.check_in_bounds(candidate)?;
    let params = problem.params_with(candidate)?;
    params.validate()?;
    let mut out = Vec::new();
    for ds in &problem.datasets {
        let idx: Vec<usize> = (0..ds.times.len()).filter(|&i| ds.times[i] <= ds.fit_window).collect();
        let times: Vec<f64> = idx.iter().map(|&i| ds.times[i]).collect();
        let sim = run_deterministic(&ds.experiment, &params, &SampleGrid::Times(times)).map_err(
            |e| Error::Numerical(format!("propagation failed at candidate {candidate:?}: {e}")),
        )?;
        for (j, &i) in idx.iter().enumerate() {
            let w = ds.stderr.as_ref().map_or(1.0, |e| 1.0 / e[i]);
            out.push((sim.p_q[j] - ds.p_q[i]) * w);
        }
    }
    Ok(out)
}

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// Best-fit values with curvature-based uncertainties and convergence
/// metadata.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Values of the free parameters, in problem order.
    pub values: Vec<f64>,
    /// Euclidean norm of the weighted residual vector at the optimum.
    pub residual_norm: f64,
    /// Per-parameter standard errors from the finite-difference curvature of
    /// the objective; `None` where the curvature is not positive.
    pub uncertainties: Vec<Option<f64>>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Minimize the residual sum of squares over the free parameters.
///
/// Bounded Nelder-Mead descent with three seeded random restarts;
/// deterministic for a given `(problem, initial)`.
pub fn fit(problem: &FitProblem, initial: &[f64]) -> Result<FitResult> {
    problem.validate()?;
    problem.check_in_bounds(initial)?;

    if problem.free.is_empty() {
        let r = residuals(problem, initial)?;
        return Ok(FitResult {
            values: Vec::new(),
            residual_norm: r.iter().map(|x| x * x).sum::<f64>().sqrt(),
            uncertainties: Vec::new(),
            iterations: 0,
            termination: Termination::Converged,
        });
    }

    let mut failure: Option<Error> = None;
    let mut evals = 0usize;
    let mut objective = |x: &[f64]| -> f64 {
        evals += 1;
        match residuals(problem, x) {
            Ok(r) => r.iter().map(|v| v * v).sum::<f64>(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        }
    };
    let (lo, hi): (Vec<f64>, Vec<f64>) = problem.bounds.iter().cloned().unzip();
    let opts = simplex::SimplexOptions::default();
    let res = simplex::minimize(&mut objective, initial, &lo, &hi, &opts);
    if !res.fx.is_finite() {
        return Err(failure.unwrap_or_else(|| Error::FitFailed("objective never finite".into())));
    }

    // Curvature-based uncertainties on the weighted sum of squares.
    let n_res: usize = problem
        .datasets
        .iter()
        .map(|ds| ds.times.iter().filter(|&&t| t <= ds.fit_window).count())
        .sum();
    let dof = (n_res as isize - problem.free.len() as isize).max(1) as f64;
    let s2 = res.fx / dof;
    let mut uncertainties = Vec::with_capacity(problem.free.len());
    for i in 0..problem.free.len() {
        let h = (hi[i] - lo[i]) * 1e-4;
        let mut xp = res.x.clone();
        let mut xm = res.x.clone();
        xp[i] = (res.x[i] + h).min(hi[i]);
        xm[i] = (res.x[i] - h).max(lo[i]);
        let (fp, fm) = (objective(&xp), objective(&xm));
        let hp = xp[i] - res.x[i];
        let hm = res.x[i] - xm[i];
        // Second derivative on a possibly asymmetric stencil.
        let curv = 2.0 * (hm * fp + hp * fm - (hp + hm) * res.fx) / (hp * hm * (hp + hm));
        uncertainties.push(if curv > 0.0 { Some((2.0 * s2 / curv).sqrt()) } else { None });
    }

    Ok(FitResult {
        values: res.x,
        residual_norm: res.fx.sqrt(),
        uncertainties,
        iterations: res.iterations,
        termination: if res.converged { Termination::Converged } else { Termination::MaxIterations },
    })
}

/// One-dimensional profile of the objective: the parameter is fixed at each
/// grid value and the remaining free parameters re-optimized. Returns
/// `(value, best residual norm)` pairs. A monotone increase away from the
/// optimum indicates identifiability.
pub fn profile_parameter(
    problem: &FitProblem,
    param: ParamId,
    grid: &[f64],
    initial: &[f64],
) -> Result<Vec<(f64, f64)>> {
    problem.validate()?;
    if grid.is_empty() {
        return Err(Error::invalid("profile grid must not be empty"));
    }
    let pos = problem.free.iter().position(|&p| p == param);
    let mut out = Vec::with_capacity(grid.len());
    for &value in grid {
        let mut sub = problem.clone();
        param.apply(&mut sub.base, value);
        let sub_initial: Vec<f64>;
        match pos {
            Some(i) => {
                sub.free.remove(i);
                sub.bounds.remove(i);
                sub_initial = initial
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| v)
                    .collect();
            }
            None => sub_initial = initial.to_vec(),
        }
        let fit_res = fit(&sub, &sub_initial)?;
        out.push((value, fit_res.residual_norm));
    }
    Ok(out)
}

/// Bounded Nelder-Mead simplex descent in box-scaled coordinates.
pub(crate) mod simplex {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    pub struct SimplexOptions {
        pub max_iter: usize,
        /// Simplex-size tolerance in scaled coordinates.
        pub xatol: f64,
        /// Relative spread tolerance on the objective values.
        pub fatol: f64,
        /// Number of seeded random restarts after the first descent.
        pub restarts: usize,
        pub restart_scale: f64,
        pub seed: u64,
    }

    impl Default for SimplexOptions {
        fn default() -> Self {
            SimplexOptions {
                max_iter: 4000,
                xatol: 1e-10,
                fatol: 1e-14,
                restarts: 3,
                restart_scale: 0.08,
                seed: 0x5EED_5EED,
            }
        }
    }

    pub struct SimplexResult {
        pub x: Vec<f64>,
        pub fx: f64,
        pub iterations: usize,
        pub converged: bool,
    }

    fn clamp01(z: &mut [f64]) {
        for v in z {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// One Nelder-Mead descent from `z0` in the unit box.
    fn descend(
        f: &mut dyn FnMut(&[f64]) -> f64,
        z0: &[f64],
        opts: &SimplexOptions,
    ) -> SimplexResult {
        let d = z0.len();
        let mut simplex: Vec<Vec<f64>> = vec![z0.to_vec()];
        for i in 0..d {
            let mut v = z0.to_vec();
            v[i] = if v[i] + 0.08 <= 1.0 { v[i] + 0.08 } else { v[i] - 0.08 };
            clamp01(&mut v);
            simplex.push(v);
        }
        let mut fvals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
        let mut iterations = 0;
        let mut converged = false;

        while iterations < opts.max_iter {
            iterations += 1;
            let mut order: Vec<usize> = (0..=d).collect();
            order.sort_by(|&i, &j| fvals[i].total_cmp(&fvals[j]));
            let (best, worst, second_worst) = (order[0], order[d], order[d.saturating_sub(1)]);

            let spread = (fvals[worst] - fvals[best]).abs();
            let size = simplex
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[best])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread <= opts.fatol * (fvals[best].abs() + 1e-30) || size <= opts.xatol {
                converged = true;
                break;
            }

            let mut centroid = vec![0.0; d];
            for &i in order.iter().take(d) {
                for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += v / d as f64;
                }
            }
            let point = |coef: f64| -> Vec<f64> {
                let mut v: Vec<f64> = centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c + coef * (c - w))
                    .collect();
                clamp01(&mut v);
                v
            };

            let reflected = point(1.0);
            let fr = f(&reflected);
            if fr < fvals[best] {
                let expanded = point(2.0);
                let fe = f(&expanded);
                if fe < fr {
                    simplex[worst] = expanded;
                    fvals[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    fvals[worst] = fr;
                }
            } else if fr < fvals[second_worst] {
                simplex[worst] = reflected;
                fvals[worst] = fr;
            } else {
                let contracted = if fr < fvals[worst] { point(0.5) } else { point(-0.5) };
                let fc = f(&contracted);
                if fc < fvals[worst].min(fr) {
                    simplex[worst] = contracted;
                    fvals[worst] = fc;
                } else {
                    // Shrink toward the best vertex.
                    let best_v = simplex[best].clone();
                    for i in 0..=d {
                        if i == best {
                            continue;
                        }
                        for (v, b) in simplex[i].iter_mut().zip(&best_v) {
                            *v = b + 0.5 * (*v - b);
                        }
                        fvals[i] = f(&simplex[i]);
                    }
                }
            }
        }

        let best = (0..=d).min_by(|&i, &j| fvals[i].total_cmp(&fvals[j])).unwrap();
        SimplexResult { x: simplex[best].clone(), fx: fvals[best], iterations, converged }
    }

    /// Minimize `f` within the box `[lo, hi]`, with seeded random restarts.
    pub fn minimize(
        f: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        lo: &[f64],
        hi: &[f64],
        opts: &SimplexOptions,
    ) -> SimplexResult {
        let d = x0.len();
        assert!(lo.len() == d && hi.len() == d, "bounds must match dimension");
        let scale: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
        let to_x = |z: &[f64]| -> Vec<f64> {
            z.iter().zip(lo).zip(&scale).map(|((zi, l), s)| l + zi * s).collect()
        };
        let mut f_scaled = |z: &[f64]| f(&to_x(z));

        let z0: Vec<f64> = x0
            .iter()
            .zip(lo)
            .zip(&scale)
            .map(|((x, l), s)| ((x - l) / s).clamp(0.0, 1.0))
            .collect();
        let mut best = descend(&mut f_scaled, &z0, opts);
        let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.restarts {
            let mut start: Vec<f64> = best
                .x
                .iter()
                .map(|&z| z + opts.restart_scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            clamp01(&mut start);
            let run = descend(&mut f_scaled, &start, opts);
            let iterations = best.iterations + run.iterations;
            if run.fx < best.fx {
                best = run;
            }
            best.iterations = iterations;
        }
        SimplexResult { x: to_x(&best.x), ..best }
    }
}
