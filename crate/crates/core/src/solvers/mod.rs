//! Alternating least squares solvers with attainment diagnostics.
//!
//! Every solver records the relative objective after each sweep and the
//! summand balance `κ = Σ|λ_i| / ‖Σ_i term_i‖`. `κ ≥ 1` always; it blows up
//! when the iterates approach an infimum that is not attained, because the
//! individual summands grow while their sum stays bounded.

mod als;
mod block_term;
mod cp;
mod decomposition;
mod splr;
mod symmetric;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use block_term::{block_term_restarts, block_term_solve, BlockSpec, BlockTermResult};
pub use cp::{cp_als, cp_als_from, masked_cp_als, masked_cp_als_restarts};
pub use decomposition::{diagnose, diagnose_terms, CpDecomposition, Diagnosis};
pub use splr::{splr_solve, SparsitySpec, SplrResult};
pub use symmetric::symmetric_approx;

/// Window (in iterations) over which a diverging run must still be making
/// progress.
pub const DIVERGENCE_WINDOW: usize = 100;
/// Minimum relative residual decrease over the window for `Diverging`.
pub const DIVERGENCE_MIN_DECREASE: f64 = 1e-10;
/// Gram matrices with a larger condition number are regularized.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;
/// Relative Tikhonov weight added to ill-conditioned Gram matrices.
pub const TIKHONOV: f64 = 1e-12;
/// Past this κ the factors carry no usable digits; iteration stops.
pub const KAPPA_ABORT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    #[default]
    RandomGaussian,
    /// Start from caller-supplied factors (see [`cp_als_from`]).
    Given,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol_rel_change: f64,
    pub tol_residual: f64,
    pub kappa_threshold: f64,
    pub restarts: usize,
    pub seed: u64,
    pub init: InitStrategy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol_rel_change: 1e-10,
            tol_residual: 1e-13,
            kappa_threshold: 1e2,
            restarts: 5,
            seed: 0,
            init: InitStrategy::RandomGaussian,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidOption(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("tol_rel_change", self.tol_rel_change)?;
        positive("tol_residual", self.tol_residual)?;
        positive("kappa_threshold", self.kappa_threshold)?;
        if self.restarts == 0 {
            return Err(Error::InvalidOption("restarts must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOption("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// Stream for restart `restart`: ChaCha keyed by `seed`, stream id =
    /// restart index.
    pub(crate) fn rng(&self, restart: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(restart as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    Diverging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveFlag {
    /// A Gram system was Tikhonov-regularized.
    Regularized,
    /// Fewer observations than model parameters.
    NonIdentifiable,
    /// Some slice of the mask has no observed entry.
    UnobservedRows,
    /// A safeguarded step could not decrease the objective.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Relative objective after each iteration.
    pub residuals: Vec<f64>,
    /// Summand balance after each iteration.
    pub kappa: Vec<f64>,
    pub iterations: usize,
    pub status: Status,
    /// Index of the restart whose result is returned.
    pub restart_id: usize,
    pub seed: u64,
    /// Final objective of every restart, in restart order.
    pub restart_residuals: Vec<f64>,
    pub flags: Vec<SolveFlag>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn final_kappa(&self) -> f64 {
        self.kappa.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Largest increase between consecutive residuals (≤ 0 when monotone).
    pub fn max_increase(&self) -> f64 {
        self.residuals
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.residuals.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// Per-iteration result reported by a solver step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepOutcome {
    pub objective: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pub residuals: Vec<f64>,
    pub kappa: Vec<f64>,
    pub status: Status,
}

impl Trace {
    fn diverging(&self, threshold: f64) -> bool {
        let t = self.residuals.len();
        if t < 2 || *self.kappa.last().unwrap() <= threshold {
            return false;
        }
        let back = self.residuals[t - 1 - DIVERGENCE_WINDOW.min(t - 1)];
        let now = self.residuals[t - 1];
        back - now > DIVERGENCE_MIN_DECREASE * back
    }
}

/// Runs `step` until convergence, divergence or the iteration budget.
///
/// * `Converged`: objective ≤ `tol_residual`, or a relative change below
///   `tol_rel_change` without the divergence signature.
/// * `Diverging`: κ > `kappa_threshold` while the objective still dropped by
///   more than [`DIVERGENCE_MIN_DECREASE`] (relative) over the last
///   [`DIVERGENCE_WINDOW`] iterations, at the point the run stops.
/// * `MaxIter`: otherwise.
pub(crate) fn drive<T>(
    state: &mut T,
    opts: &SolveOptions,
    mut step: impl FnMut(&mut T) -> Result<StepOutcome>,
) -> Result<Trace> {
    let mut trace = Trace {
        residuals: Vec::new(),
        kappa: Vec::new(),
        status: Status::MaxIter,
    };
    for _ in 0..opts.max_iter {
        let out = step(state)?;
        let prev = trace.residuals.last().copied();
        trace.residuals.push(out.objective);
        trace.kappa.push(out.kappa);
        if out.objective <= opts.tol_residual {
            trace.status = Status::Converged;
            return Ok(trace);
        }
        if !out.objective.is_finite() || out.kappa > KAPPA_ABORT {
            break;
        }
        if let Some(prev) = prev {
            let small_change = (prev - out.objective).abs() <= opts.tol_rel_change * prev;
            if small_change && !trace.diverging(opts.kappa_threshold) {
                trace.status = Status::Converged;
                return Ok(trace);
            }
        }
    }
    trace.status = if trace.diverging(opts.kappa_threshold) {
        Status::Diverging
    } else {
        Status::MaxIter
    };
    Ok(trace)
}

/// Runs `attempt` once per restart, restart `k` drawing from stream `k`.
pub(crate) fn each_restart<T>(
    opts: &SolveOptions,
    mut attempt: impl FnMut(usize, &mut ChaCha8Rng) -> Result<(T, Trace, Vec<SolveFlag>)>,
) -> Result<Vec<(T, SolveReport)>> {
    opts.validate()?;
    let runs = (0..opts.restarts)
        .map(|restart| attempt(restart, &mut opts.rng(restart)))
        .collect::<Result<Vec<_>>>()?;
    let finals: Vec<f64> = runs
        .iter()
        .map(|(_, t, _)| t.residuals.last().copied().unwrap_or(f64::INFINITY))
        .collect();
    Ok(runs
        .into_iter()
        .enumerate()
        .map(|(restart_id, (value, trace, mut flags))| {
            flags.sort();
            flags.dedup();
            let report = SolveReport {
                iterations: trace.residuals.len(),
                residuals: trace.residuals,
                kappa: trace.kappa,
                status: trace.status,
                restart_id,
                seed: opts.seed,
                restart_residuals: finals.clone(),
                flags,
            };
            (value, report)
        })
        .collect())
}

/// Runs every restart and keeps the lowest final objective (the earliest
/// restart on ties).
pub(crate) fn best_of_restarts<T>(
    opts: &SolveOptions,
    attempt: impl FnMut(usize, &mut ChaCha8Rng) -> Result<(T, Trace, Vec<SolveFlag>)>,
) -> Result<(T, SolveReport)> {
    let runs = each_restart(opts, attempt)?;
    let best = runs
        .into_iter()
        .reduce(|best, next| {
            if next.1.final_residual() < best.1.final_residual() {
                next
            } else {
                best
            }
        })
        .expect("at least one restart");
    Ok(best)
}

pub(crate) fn check_rank(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidRank(r));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(objectives: &[f64], kappas: &[f64], opts: &SolveOptions) -> Trace {
        let mut i = 0usize;
        drive(&mut (), opts, |_| {
            let k = i.min(objectives.len() - 1);
            i += 1;
            Ok(StepOutcome {
                objective: objectives[k],
                kappa: kappas[k],
            })
        })
        .unwrap()
    }

    #[test]
    fn converges_on_small_change() {
        let opts = SolveOptions::default();
        let t = run(&[1.0, 0.5, 0.5], &[1.0, 1.0, 1.0], &opts);
        assert_eq!(t.status, Status::Converged);
        assert_eq!(t.residuals.len(), 3);
    }

    #[test]
    fn converges_on_tiny_residual() {
        let t = run(&[1.0, 1e-14], &[1.0, 1.0], &SolveOptions::default());
        assert_eq!(t.status, Status::Converged);
    }

    #[test]
    fn diverging_signature_needs_progress_and_large_kappa() {
        let opts = SolveOptions::default().with_max_iter(300);
        let objectives: Vec<f64> = (0..300).map(|i| 1.0 + 1.0 / (i as f64 + 1.0)).collect();
        let kappas: Vec<f64> = (0..300).map(|i| 1.0 + i as f64).collect();
        assert_eq!(run(&objectives, &kappas, &opts).status, Status::Diverging);
        let calm = vec![2.0; 300];
        assert_eq!(run(&objectives, &calm, &opts).status, Status::MaxIter);
    }

    #[test]
    fn options_validation() {
        assert!(SolveOptions::default().validate().is_ok());
        assert!(SolveOptions {
            restarts: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolveOptions {
            tol_rel_change: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolveOptions {
            kappa_threshold: f64::NAN,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
