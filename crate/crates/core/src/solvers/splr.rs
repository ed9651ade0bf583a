use super::als::{accelerated_sweep, fit_scale, kappa, random_model, Target};
use super::decomposition::CpDecomposition;
use super::{
    best_of_restarts, check_rank, drive, InitStrategy, SolveOptions, SolveReport, StepOutcome,
};
use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Support of the sparse part.
#[derive(Debug, Clone, PartialEq)]
pub enum SparsitySpec {
    /// `C` is supported on a known pattern.
    Fixed(Mask),
    /// `C` has at most `k` nonzero entries, placed freely.
    TopK(usize),
}

#[derive(Debug, Clone)]
pub struct SplrResult<S: Scalar> {
    pub b: CpDecomposition<S>,
    pub c: Tensor<S>,
    /// `B + C`, the part the problem determines uniquely.
    pub sum: Tensor<S>,
    pub report: SolveReport,
}

/// Sparse-plus-low-rank approximation `A ≈ B + C` with `rank(B) ≤ r`.
///
/// For fixed `B` the best `C` is the restriction of `A − B` to the support
/// (the pattern, or the `k` largest-modulus entries), so the objective
/// reduces to `‖P_{Ωᶜ}(A − B)‖ / ‖A‖`. Each iteration picks the support for
/// the current `B` (the first against `B = 0`) and then takes one masked
/// ALS sweep on its complement. Both steps are exact block minimizations,
/// so the objective is nonincreasing; with an empty support the iteration
/// is plain [`cp_als`](super::cp_als).
pub fn splr_solve<S: Scalar>(
    a: &Tensor<S>,
    r: usize,
    sparsity: &SparsitySpec,
    opts: &SolveOptions,
) -> Result<SplrResult<S>> {
    check_rank(r)?;
    if opts.init == InitStrategy::Given {
        return Err(Error::InvalidOption(
            "splr_solve draws its own initialization".into(),
        ));
    }
    match sparsity {
        SparsitySpec::Fixed(mask) if mask.shape() != a.shape() => {
            return Err(Error::ShapeMismatch {
                expected: a.shape().to_vec(),
                found: mask.shape().to_vec(),
            })
        }
        SparsitySpec::TopK(k) if *k > a.len() => {
            return Err(Error::InvalidMask(format!(
                "k = {k} exceeds the {} entries of the tensor",
                a.len()
            )))
        }
        _ => {}
    }
    let norm_a = a.norm();
    let scale = if norm_a > 0.0 { norm_a } else { 1.0 };
    let fixed = match sparsity {
        SparsitySpec::Fixed(mask) => Some(Target::masked(a.clone(), &mask.complement())?),
        SparsitySpec::TopK(_) => None,
    };

    let (mut b, report) = best_of_restarts(opts, |_, rng| {
        let mut model = random_model(a.shape(), r, rng);
        let mut flags = Vec::new();
        let mut current = None;
        let trace = drive(&mut model, opts, |m| {
            let support = match sparsity {
                SparsitySpec::Fixed(_) => None,
                SparsitySpec::TopK(k) => {
                    let resid = match &current {
                        Some(bt) => a.sub(bt)?,
                        None => a.clone(),
                    };
                    Some(Target::masked(a.clone(), &top_k(&resid, *k).complement())?)
                }
            };
            let target = support
                .as_ref()
                .or(fixed.as_ref())
                .expect("one support is set");
            if current.is_none() {
                fit_scale(m, target);
            }
            let bt = accelerated_sweep(m, target, &mut flags);
            let objective = target.residual_norms(&bt).0 / scale;
            let out = StepOutcome {
                objective,
                kappa: kappa(&m.weights, &bt),
            };
            current = Some(bt);
            Ok(out)
        })?;
        Ok((model, trace, flags))
    })?;
    b.canonicalize();
    let bt = b.reconstruct();
    let support = match sparsity {
        SparsitySpec::Fixed(mask) => mask.clone(),
        SparsitySpec::TopK(k) => top_k(&a.sub(&bt)?, *k),
    };
    let c = support.project(&a.sub(&bt)?)?;
    let sum = bt.add(&c)?;
    Ok(SplrResult { b, c, sum, report })
}

/// The `k` largest-modulus entries; ties go to the lower flat index.
fn top_k<S: Scalar>(t: &Tensor<S>, k: usize) -> Mask {
    let data = t.data();
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&i, &j| data[j].modulus().total_cmp(&data[i].modulus()));
    order.truncate(k);
    Mask::from_flat(t.shape(), &order).expect("indices are in range")
}
