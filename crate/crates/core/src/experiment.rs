//! Seeded Monte Carlo experiments.
//!
//! Trial `i` draws everything, including the seed handed to the solver,
//! from ChaCha8 keyed by the experiment seed with stream id `i`. Within a
//! stream the draw index is the ChaCha block counter, so rows do not depend
//! on execution order or thread count. Trials run on the rayon pool and are
//! collected in trial order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::{FieldTag, Scalar, C64};
use crate::solvers::{
    block_term_solve, cp_als, diagnose_terms, masked_cp_als_restarts, splr_solve, BlockSpec,
    SolveOptions, SparsitySpec, Status,
};
use crate::tensor::Tensor;
use crate::varieties::{
    difference_quotient, structured_point, structured_tangent, StructuredSpec, TangentWitness,
};
use crate::witness::{classify_2x2x2, DeltaSign};

pub const ARTIFACT: &str = "tensor-attain";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Restart residuals within this relative spread count as agreeing.
pub const AGREEMENT_TOL: f64 = 1e-4;
/// Completion: observed residual and full relative error for a recovery.
pub const COMPLETION_OBSERVED_TOL: f64 = 1e-6;
pub const COMPLETION_FULL_TOL: f64 = 1e-4;
/// Sparse plus low rank: `‖(B + C) − A‖ / ‖A‖` for a recovery.
pub const SPLR_TOL: f64 = 1e-6;
/// Planted spikes exceed this multiple of `‖B₀‖`.
pub const SPIKE_SCALE: f64 = 10.0;
/// Block term: relative residual for a recovery.
pub const BLOCK_TERM_TOL: f64 = 1e-4;

/// Largest tensor an experiment may draw.
pub const MAX_ENTRIES: usize = 1 << 20;

pub const REPORT_FILE: &str = "report.json";
pub const CSV_FILE: &str = "results.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    /// Random real 2×2×2 tensors: real rank-2 ALS against ALS on the
    /// promoted tensor, split by the sign of the hyperdeterminant.
    RealVsComplex2x2x2,
    /// Difference quotients of a Segre curve approaching its tangent.
    WitnessLimit,
    /// Spread of the best residual over restarts.
    RestartUniqueness,
    /// Planted low-rank completion.
    Completion,
    /// Planted low rank plus spikes, free support.
    #[serde(rename = "SPLR")]
    Splr,
    /// Planted sum of multilinear-rank blocks.
    BlockTerm,
}

fn default_observed_fraction() -> f64 {
    0.7
}

fn default_sparsity() -> usize {
    5
}

fn default_t_grid() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: ExperimentKind,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Tensor shape; each kind has a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    /// Model rank for the CP-based kinds (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Block ranks for `BlockTerm` (default `"2,2,2;2,2,2"`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlockSpec>,
    /// Field of the random inputs; each kind has a default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldTag>,
    #[serde(default = "default_observed_fraction")]
    pub observed_fraction: f64,
    /// Number of planted spikes for `SPLR`.
    #[serde(default = "default_sparsity")]
    pub sparsity: usize,
    /// Step sizes for `WitnessLimit`, cycled over the trials.
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub options: SolveOptions,
    /// Directory for `report.json` and `results.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(name: ExperimentKind, trials: usize, seed: u64) -> Self {
        Self {
            name,
            trials,
            seed,
            dims: None,
            rank: None,
            blocks: None,
            field: None,
            observed_fraction: default_observed_fraction(),
            sparsity: default_sparsity(),
            t_grid: default_t_grid(),
            options: SolveOptions::default(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.dims.clone().unwrap_or_else(|| match self.name {
            ExperimentKind::RealVsComplex2x2x2 | ExperimentKind::WitnessLimit => vec![2, 2, 2],
            ExperimentKind::RestartUniqueness => vec![3, 3, 3],
            ExperimentKind::Completion | ExperimentKind::Splr => vec![4, 4, 4],
            ExperimentKind::BlockTerm => vec![5, 5, 5],
        })
    }

    pub fn rank(&self) -> usize {
        self.rank.unwrap_or(2)
    }

    pub fn blocks(&self) -> BlockSpec {
        self.blocks
            .clone()
            .unwrap_or_else(|| BlockSpec::new(vec![vec![2, 2, 2]; 2]).expect("valid default"))
    }

    pub fn field(&self) -> FieldTag {
        self.field.unwrap_or(match self.name {
            ExperimentKind::RestartUniqueness | ExperimentKind::Completion => FieldTag::Complex,
            _ => FieldTag::Real,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        self.options.validate()?;
        let dims = self.dims();
        if dims.is_empty() || dims.contains(&0) {
            return bad(format!("dims must be nonempty and positive, got {dims:?}"));
        }
        match dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)) {
            Some(len) if len <= MAX_ENTRIES => {}
            _ => return bad(format!("dims {dims:?} exceed {MAX_ENTRIES} entries")),
        }
        if self.rank == Some(0) {
            return bad("rank must be at least 1".into());
        }
        match self.name {
            ExperimentKind::RealVsComplex2x2x2 => {
                if dims != [2, 2, 2] {
                    return bad(format!(
                        "RealVsComplex2x2x2 needs dims [2, 2, 2], got {dims:?}"
                    ));
                }
                if self.field.is_some() {
                    return bad("RealVsComplex2x2x2 always compares both fields".into());
                }
            }
            ExperimentKind::WitnessLimit => {
                if dims.iter().any(|&n| n != dims[0]) {
                    return bad(format!("WitnessLimit needs equal dims, got {dims:?}"));
                }
                if self.t_grid.is_empty()
                    || self.t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite()))
                {
                    return bad(format!(
                        "t_grid must be nonempty, positive and finite, got {:?}",
                        self.t_grid
                    ));
                }
            }
            ExperimentKind::Completion => {
                if !(self.observed_fraction > 0.0 && self.observed_fraction <= 1.0) {
                    return bad(format!(
                        "observed_fraction must lie in (0, 1], got {}",
                        self.observed_fraction
                    ));
                }
            }
            ExperimentKind::Splr => {
                if self.sparsity >= dims.iter().product::<usize>() {
                    return bad(format!(
                        "sparsity {} leaves no entry for the low-rank part",
                        self.sparsity
                    ));
                }
            }
            ExperimentKind::BlockTerm => self.blocks().check_shape(&dims)?,
            ExperimentKind::RestartUniqueness => {}
        }
        Ok(())
    }
}

/// One trial. Columns that do not apply to the experiment are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    /// Seed handed to the solver (or, without a solver, to nothing).
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_sign: Option<DeltaSign>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex_status: Option<Status>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex_kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// `residual / t`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// `(worst − best) / best` over restart residuals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    /// `‖B − A‖ / ‖A‖` including unobserved entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered: Option<bool>,
}

impl TrialRow {
    fn new(trial: usize, seed: u64, residual: f64) -> Self {
        Self {
            trial,
            seed,
            status: None,
            residual,
            kappa: None,
            delta_sign: None,
            complex_status: None,
            complex_residual: None,
            complex_kappa: None,
            t: None,
            ratio: None,
            spread: None,
            agree: None,
            full_error: None,
            monotone: None,
            recovered: None,
        }
    }

    fn solved(trial: usize, seed: u64, status: Status, residual: f64, kappa: f64) -> Self {
        Self {
            status: Some(status),
            kappa: Some(kappa),
            ..Self::new(trial, seed, residual)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    /// Fraction of rows per solver status; empty without a solver.
    pub status_fractions: BTreeMap<Status, f64>,
    pub median_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_kappa: Option<f64>,
    /// Experiment-specific fractions, keyed by name.
    pub fractions: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub artifact: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub rows: Vec<TrialRow>,
    pub summary: Summary,
}

/// Runs every trial and, when `config.output` is set, writes the report
/// there.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let rows = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, trial))
        .collect::<Result<Vec<_>>>()?;
    let report = ExperimentReport {
        artifact: ARTIFACT.into(),
        version: VERSION.into(),
        config: config.clone(),
        summary: summarize(config.name, &rows),
        rows,
    };
    if let Some(dir) = &config.output {
        write_report(&report, dir)?;
    }
    Ok(report)
}

/// Random stream of trial `trial`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialRow> {
    let mut rng = trial_rng(config.seed, trial);
    let seed: u64 = rng.random();
    let opts = config.options.clone().with_seed(seed);
    match (config.name, config.field()) {
        (ExperimentKind::RealVsComplex2x2x2, _) => real_vs_complex(trial, &opts, &mut rng),
        (ExperimentKind::WitnessLimit, FieldTag::Real) => {
            witness_limit::<f64>(config, trial, seed, &mut rng)
        }
        (ExperimentKind::WitnessLimit, FieldTag::Complex) => {
            witness_limit::<C64>(config, trial, seed, &mut rng)
        }
        (ExperimentKind::RestartUniqueness, FieldTag::Real) => {
            uniqueness::<f64>(config, trial, &opts, &mut rng)
        }
        (ExperimentKind::RestartUniqueness, FieldTag::Complex) => {
            uniqueness::<C64>(config, trial, &opts, &mut rng)
        }
        (ExperimentKind::Completion, FieldTag::Real) => {
            completion::<f64>(config, trial, &opts, &mut rng)
        }
        (ExperimentKind::Completion, FieldTag::Complex) => {
            completion::<C64>(config, trial, &opts, &mut rng)
        }
        (ExperimentKind::Splr, FieldTag::Real) => splr::<f64>(config, trial, &opts, &mut rng),
        (ExperimentKind::Splr, FieldTag::Complex) => splr::<C64>(config, trial, &opts, &mut rng),
        (ExperimentKind::BlockTerm, FieldTag::Real) => {
            block_term::<f64>(config, trial, &opts, &mut rng)
        }
        (ExperimentKind::BlockTerm, FieldTag::Complex) => {
            block_term::<C64>(config, trial, &opts, &mut rng)
        }
    }
}

fn real_vs_complex(trial: usize, opts: &SolveOptions, rng: &mut ChaCha8Rng) -> Result<TrialRow> {
    let a: Tensor<f64> = Tensor::gaussian(&[2, 2, 2], rng)?;
    let cert = classify_2x2x2(&a)?;
    let (_, real) = cp_als(&a, 2, opts)?;
    let (_, complex) = cp_als(&a.promote(), 2, opts)?;
    Ok(TrialRow {
        delta_sign: Some(cert.delta_sign),
        complex_status: Some(complex.status),
        complex_residual: Some(complex.final_residual()),
        complex_kappa: Some(complex.final_kappa()),
        ..TrialRow::solved(
            trial,
            opts.seed,
            real.status,
            real.final_residual(),
            real.final_kappa(),
        )
    })
}

fn gaussian_vec<S: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<S> {
    (0..n).map(|_| S::gaussian(rng)).collect()
}

/// `‖W − B_t‖ / ‖W‖` for the tangent `W` at a random point of the Segre
/// variety along a random direction; κ is the balance of the two terms
/// of the difference quotient, which grows like `2/t`.
fn witness_limit<S: Scalar>(
    config: &ExperimentConfig,
    trial: usize,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<TrialRow> {
    let dims = config.dims();
    let (n, d) = (dims[0], dims.len());
    let spec = StructuredSpec::segre(n, d)?;
    let base: Vec<Vec<Vec<S>>> = (0..d).map(|_| vec![gaussian_vec(n, rng)]).collect();
    let perturb: Vec<Vec<Vec<S>>> = (0..d).map(|_| vec![gaussian_vec(n, rng)]).collect();
    let w = TangentWitness::new(spec, base, perturb)?;
    let t = config.t_grid[trial % config.t_grid.len()];

    let tangent = structured_tangent(&w)?;
    let b = difference_quotient(&w, t)?;
    let residual = tangent.sub(&b)?.norm() / tangent.norm();
    let inv = S::from_real(1.0 / t);
    let ahead = structured_point(&w.spec, &w.shifted_base(S::from_real(t)))?.scale(inv);
    let behind = structured_point(&w.spec, &w.base)?.scale(-inv);
    let kappa = diagnose_terms(&[ahead, behind])?.kappa;
    Ok(TrialRow {
        kappa: Some(kappa),
        t: Some(t),
        ratio: Some(residual / t),
        ..TrialRow::new(trial, seed, residual)
    })
}

fn uniqueness<S: Scalar>(
    config: &ExperimentConfig,
    trial: usize,
    opts: &SolveOptions,
    rng: &mut ChaCha8Rng,
) -> Result<TrialRow> {
    let a: Tensor<S> = Tensor::gaussian(&config.dims(), rng)?;
    let (_, rep) = cp_als(&a, config.rank(), opts)?;
    let best = rep
        .restart_residuals
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let worst = rep.restart_residuals.iter().copied().fold(0.0, f64::max);
    let spread = if best > 0.0 {
        (worst - best) / best
    } else {
        worst
    };
    Ok(TrialRow {
        spread: Some(spread),
        agree: Some(spread <= AGREEMENT_TOL),
        ..TrialRow::solved(
            trial,
            opts.seed,
            rep.status,
            rep.final_residual(),
            rep.final_kappa(),
        )
    })
}

/// Sum of `r` rank-one terms with Gaussian factors.
fn planted_cp<S: Scalar>(shape: &[usize], r: usize, rng: &mut ChaCha8Rng) -> Result<Tensor<S>> {
    let mut acc = Tensor::zeros(shape)?;
    for _ in 0..r {
        let vs: Vec<Vec<S>> = shape.iter().map(|&n| gaussian_vec(n, rng)).collect();
        let refs: Vec<&[S]> = vs.iter().map(Vec::as_slice).collect();
        acc.axpy(S::one(), &Tensor::outer_vectors(&refs)?)?;
    }
    Ok(acc)
}

fn completion<S: Scalar>(
    config: &ExperimentConfig,
    trial: usize,
    opts: &SolveOptions,
    rng: &mut ChaCha8Rng,
) -> Result<TrialRow> {
    let dims = config.dims();
    let a: Tensor<S> = planted_cp(&dims, config.rank(), rng)?;
    let mask = Mask::random(&dims, config.observed_fraction, rng)?;
    if mask.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "trial {trial} drew an empty mask"
        )));
    }
    let runs = masked_cp_als_restarts(&a, &mask, config.rank(), opts)?;
    // earliest restart among equals, as in the solver's own selection
    let (model, rep) = runs
        .iter()
        .reduce(|best, next| {
            if next.1.final_residual() < best.1.final_residual() {
                next
            } else {
                best
            }
        })
        .expect("at least one restart");
    let full_error = model.reconstruct().sub(&a)?.norm() / a.norm();
    let residual = rep.final_residual();
    Ok(TrialRow {
        full_error: Some(full_error),
        recovered: Some(residual <= COMPLETION_OBSERVED_TOL && full_error <= COMPLETION_FULL_TOL),
        ..TrialRow::solved(trial, opts.seed, rep.status, residual, rep.final_kappa())
    })
}

fn splr<S: Scalar>(
    config: &ExperimentConfig,
    trial: usize,
    opts: &SolveOptions,
    rng: &mut ChaCha8Rng,
) -> Result<TrialRow> {
    let dims = config.dims();
    let b0: Tensor<S> = planted_cp(&dims, config.rank(), rng)?;
    let len = b0.len();
    // k distinct positions by a partial Fisher–Yates shuffle
    let mut positions: Vec<usize> = (0..len).collect();
    for i in 0..config.sparsity {
        let j = rng.random_range(i..len);
        positions.swap(i, j);
    }
    let magnitude = SPIKE_SCALE * b0.norm();
    let mut data = b0.into_data();
    for &p in &positions[..config.sparsity] {
        let g = S::gaussian(rng);
        let unit = if g.modulus() > 0.0 {
            g.signum()
        } else {
            S::one()
        };
        data[p] += unit.scale(magnitude + g.modulus());
    }
    let a = Tensor::new(dims, data)?;
    let res = splr_solve(
        &a,
        config.rank(),
        &SparsitySpec::TopK(config.sparsity),
        opts,
    )?;
    let sum_error = res.sum.sub(&a)?.norm() / a.norm();
    Ok(TrialRow {
        full_error: Some(sum_error),
        recovered: Some(sum_error <= SPLR_TOL),
        ..TrialRow::solved(
            trial,
            opts.seed,
            res.report.status,
            res.report.final_residual(),
            res.report.final_kappa(),
        )
    })
}

fn block_term<S: Scalar>(
    config: &ExperimentConfig,
    trial: usize,
    opts: &SolveOptions,
    rng: &mut ChaCha8Rng,
) -> Result<TrialRow> {
    let dims = config.dims();
    let spec = config.blocks();
    let mut a: Tensor<S> = Tensor::zeros(&dims)?;
    for ranks in &spec.blocks {
        let mut block = Tensor::gaussian(ranks, rng)?;
        for (j, (&n, &r)) in dims.iter().zip(ranks).enumerate() {
            let u = nalgebra::DMatrix::from_fn(n, r, |_, _| S::gaussian(rng));
            block = block.mode_product(&u, j)?;
        }
        a.axpy(S::one(), &block)?;
    }
    let res = block_term_solve(&a, &spec, opts)?;
    let rep = res.report;
    let residual = rep.final_residual();
    Ok(TrialRow {
        monotone: Some(rep.is_monotone(0.0)),
        recovered: Some(residual <= BLOCK_TERM_TOL),
        ..TrialRow::solved(trial, opts.seed, rep.status, residual, rep.final_kappa())
    })
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

fn share(rows: &[TrialRow], pick: impl Fn(&TrialRow) -> Option<bool>) -> Option<f64> {
    let flags: Vec<bool> = rows.iter().filter_map(pick).collect();
    (!flags.is_empty()).then(|| flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}

pub fn summarize(kind: ExperimentKind, rows: &[TrialRow]) -> Summary {
    let n = rows.len();
    let mut counts: BTreeMap<Status, usize> = BTreeMap::new();
    for s in rows.iter().filter_map(|r| r.status) {
        *counts.entry(s).or_default() += 1;
    }
    let status_fractions = counts
        .into_iter()
        .map(|(s, c)| (s, c as f64 / n as f64))
        .collect();
    let mut fractions = BTreeMap::new();
    let mut put = |key: &str, value: Option<f64>| {
        if let Some(v) = value {
            fractions.insert(key.to_string(), v);
        }
    };
    match kind {
        ExperimentKind::RealVsComplex2x2x2 => {
            let negative = |r: &TrialRow| r.delta_sign == Some(DeltaSign::Negative);
            put("delta_negative", share(rows, |r| Some(negative(r))));
            let neg: Vec<TrialRow> = rows.iter().filter(|r| negative(r)).cloned().collect();
            put(
                "delta_negative_real_diverging_complex_converged",
                share(&neg, |r| {
                    Some(
                        r.status == Some(Status::Diverging)
                            && r.complex_status == Some(Status::Converged),
                    )
                }),
            );
            let pos: Vec<TrialRow> = rows
                .iter()
                .filter(|r| r.delta_sign == Some(DeltaSign::Positive))
                .cloned()
                .collect();
            put(
                "delta_positive_real_converged",
                share(&pos, |r| Some(r.status == Some(Status::Converged))),
            );
        }
        ExperimentKind::WitnessLimit => {
            put("within_2t", share(rows, |r| r.ratio.map(|q| q <= 2.0)));
        }
        ExperimentKind::RestartUniqueness => put("agree", share(rows, |r| r.agree)),
        ExperimentKind::Completion | ExperimentKind::Splr => {
            put("recovered", share(rows, |r| r.recovered))
        }
        ExperimentKind::BlockTerm => {
            put("recovered", share(rows, |r| r.recovered));
            put("monotone", share(rows, |r| r.monotone));
        }
    }
    Summary {
        trials: n,
        status_fractions,
        median_residual: median(rows.iter().map(|r| r.residual).collect()).unwrap_or(f64::NAN),
        median_kappa: median(rows.iter().filter_map(|r| r.kappa).collect()),
        fractions,
    }
}

/// CSV header of each experiment.
pub fn csv_columns(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::RealVsComplex2x2x2 => &[
            "trial",
            "delta_sign",
            "real_status",
            "real_kappa",
            "complex_residual",
        ],
        ExperimentKind::WitnessLimit => &["trial", "seed", "t", "residual", "kappa", "ratio"],
        ExperimentKind::RestartUniqueness => &[
            "trial", "seed", "status", "residual", "kappa", "spread", "agree",
        ],
        ExperimentKind::Completion => &[
            "trial",
            "seed",
            "status",
            "residual",
            "kappa",
            "full_error",
            "recovered",
        ],
        ExperimentKind::Splr => &[
            "trial",
            "seed",
            "status",
            "residual",
            "kappa",
            "sum_error",
            "recovered",
        ],
        ExperimentKind::BlockTerm => &[
            "trial",
            "seed",
            "status",
            "residual",
            "kappa",
            "monotone",
            "recovered",
        ],
    }
}

fn snake<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(x: Option<bool>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_record(kind: ExperimentKind, row: &TrialRow) -> Vec<String> {
    let status = row.status.map(|s| snake(&s)).unwrap_or_default();
    let head = || {
        vec![
            row.trial.to_string(),
            row.seed.to_string(),
            status.clone(),
            row.residual.to_string(),
            num(row.kappa),
        ]
    };
    match kind {
        ExperimentKind::RealVsComplex2x2x2 => vec![
            row.trial.to_string(),
            row.delta_sign.map(|s| snake(&s)).unwrap_or_default(),
            status.clone(),
            num(row.kappa),
            num(row.complex_residual),
        ],
        ExperimentKind::WitnessLimit => vec![
            row.trial.to_string(),
            row.seed.to_string(),
            num(row.t),
            row.residual.to_string(),
            num(row.kappa),
            num(row.ratio),
        ],
        ExperimentKind::RestartUniqueness => {
            [head(), vec![num(row.spread), flag(row.agree)]].concat()
        }
        ExperimentKind::Completion | ExperimentKind::Splr => {
            [head(), vec![num(row.full_error), flag(row.recovered)]].concat()
        }
        ExperimentKind::BlockTerm => {
            [head(), vec![flag(row.monotone), flag(row.recovered)]].concat()
        }
    }
}

pub fn write_csv<W: std::io::Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let kind = report.config.name;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_columns(kind))?;
    for row in &report.rows {
        w.write_record(csv_record(kind, row))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.json` and `results.csv` into `dir`, creating it.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(dir.join(REPORT_FILE), json)?;
    write_csv(report, fs::File::create(dir.join(CSV_FILE))?)
}
