use super::als::{accelerated_sweep, fit_scale, kappa, random_model, Target};
use super::decomposition::CpDecomposition;
use super::{
    best_of_restarts, check_rank, drive, each_restart, InitStrategy, SolveFlag, SolveOptions,
    SolveReport, StepOutcome, Trace,
};
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Best rank-`r` approximation by alternating least squares.
///
/// The solve runs in the field of `a`; promote explicitly to solve over ℂ.
pub fn cp_als<S: Scalar>(
    a: &Tensor<S>,
    r: usize,
    opts: &SolveOptions,
) -> Result<(CpDecomposition<S>, SolveReport)> {
    if opts.init == InitStrategy::Given {
        return Err(Error::InvalidOption(
            "init = given requires cp_als_from".into(),
        ));
    }
    run(Target::dense(a.clone())?, r, None, opts, Vec::new())
}

/// As [`cp_als`], with restart 0 started from `init`; later restarts are
/// random.
pub fn cp_als_from<S: Scalar>(
    a: &Tensor<S>,
    init: &CpDecomposition<S>,
    opts: &SolveOptions,
) -> Result<(CpDecomposition<S>, SolveReport)> {
    if init.shape() != a.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape().to_vec(),
            found: init.shape().to_vec(),
        });
    }
    run(
        Target::dense(a.clone())?,
        init.rank(),
        Some(init),
        opts,
        Vec::new(),
    )
}

/// Rank-`r` completion: minimizes `‖P_Θ(A − B)‖ / ‖P_Θ(A)‖`.
///
/// Only `P_Θ(B)` is determined by the data; the unobserved part of `B` may
/// differ between restarts.
pub fn masked_cp_als<S: Scalar>(
    a: &Tensor<S>,
    mask: &Mask,
    r: usize,
    opts: &SolveOptions,
) -> Result<(CpDecomposition<S>, SolveReport)> {
    let (target, flags) = masked_target(a, mask, r, opts)?;
    run(target, r, None, opts, flags)
}

/// Every restart of [`masked_cp_als`], in restart order, each canonicalized
/// with its own report. Useful to compare `P_Θ(B)` against `B` across
/// restarts.
pub fn masked_cp_als_restarts<S: Scalar>(
    a: &Tensor<S>,
    mask: &Mask,
    r: usize,
    opts: &SolveOptions,
) -> Result<Vec<(CpDecomposition<S>, SolveReport)>> {
    let (target, flags) = masked_target(a, mask, r, opts)?;
    let shape = target.tensor.shape().to_vec();
    let runs = each_restart(opts, |_, rng| {
        attempt(
            &target,
            scaled_start(&target, &shape, r, rng),
            opts,
            flags.clone(),
        )
    })?;
    Ok(runs
        .into_iter()
        .map(|(mut m, rep)| {
            m.canonicalize();
            (m, rep)
        })
        .collect())
}

fn masked_target<S: Scalar>(
    a: &Tensor<S>,
    mask: &Mask,
    r: usize,
    opts: &SolveOptions,
) -> Result<(Target<S>, Vec<SolveFlag>)> {
    if opts.init == InitStrategy::Given {
        return Err(Error::InvalidOption(
            "masked_cp_als draws its own initialization".into(),
        ));
    }
    if mask.shape() != a.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape().to_vec(),
            found: mask.shape().to_vec(),
        });
    }
    if mask.is_empty() {
        return Err(Error::InvalidMask("no observed entries".into()));
    }
    check_rank(r)?;
    let target = Target::masked(a.clone(), mask)?;
    let mut flags = Vec::new();
    let params = r * (a.shape().iter().sum::<usize>() + 1 - a.order());
    if mask.len() < params {
        flags.push(SolveFlag::NonIdentifiable);
    }
    if target.has_unobserved_rows() {
        flags.push(SolveFlag::UnobservedRows);
    }
    Ok((target, flags))
}

fn scaled_start<S: Scalar, R: rand::Rng + ?Sized>(
    target: &Target<S>,
    shape: &[usize],
    r: usize,
    rng: &mut R,
) -> CpDecomposition<S> {
    let mut model = random_model(shape, r, rng);
    fit_scale(&mut model, target);
    model
}

fn attempt<S: Scalar>(
    target: &Target<S>,
    mut model: CpDecomposition<S>,
    opts: &SolveOptions,
    mut flags: Vec<SolveFlag>,
) -> Result<(CpDecomposition<S>, Trace, Vec<SolveFlag>)> {
    let trace = drive(&mut model, opts, |m| {
        let b = accelerated_sweep(m, target, &mut flags);
        Ok(StepOutcome {
            objective: target.relative_residual(&b),
            kappa: kappa(&m.weights, &b),
        })
    })?;
    Ok((model, trace, flags))
}

fn run<S: Scalar>(
    target: Target<S>,
    r: usize,
    init: Option<&CpDecomposition<S>>,
    opts: &SolveOptions,
    base_flags: Vec<SolveFlag>,
) -> Result<(CpDecomposition<S>, SolveReport)> {
    check_rank(r)?;
    let shape = target.tensor.shape().to_vec();
    let (mut model, report) = best_of_restarts(opts, |restart, rng| {
        let model = match init {
            Some(m) if restart == 0 => m.clone(),
            _ => scaled_start(&target, &shape, r, rng),
        };
        attempt(&target, model, opts, base_flags.clone())
    })?;
    model.canonicalize();
    Ok((model, report))
}
