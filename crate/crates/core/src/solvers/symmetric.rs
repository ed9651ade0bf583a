//! Projected ALS for `Σ_i λ_i v_i^{⊗d}`.
//!
//! One iteration: an unconstrained CP sweep, then the factors of each term
//! are phase-aligned to mode 0 and averaged, then the weights are refit by
//! least squares. If the projected point does not improve the objective
//! the step is blended back towards the previous iterate (β halving); a
//! step that cannot improve leaves the iterate unchanged and is flagged
//! `Stalled`.

use nalgebra::DMatrix;

use super::als::{kappa, solve_gram, sweep, Target};
use super::decomposition::CpDecomposition;
use super::{
    best_of_restarts, check_rank, drive, InitStrategy, SolveFlag, SolveOptions, SolveReport,
    StepOutcome,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Inputs farther than this (relative) from symmetric are rejected.
pub const SYMMETRY_TOL: f64 = 1e-10;
const BACKTRACK_STEPS: usize = 20;

pub fn symmetric_approx<S: Scalar>(
    a: &Tensor<S>,
    r: usize,
    opts: &SolveOptions,
) -> Result<(CpDecomposition<S>, SolveReport)> {
    check_rank(r)?;
    if opts.init == InitStrategy::Given {
        return Err(Error::InvalidOption(
            "symmetric_approx draws its own initialization".into(),
        ));
    }
    let defect = a.symmetry_defect()?;
    if defect > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(defect));
    }
    let n = a.shape()[0];
    let d = a.order();
    let target = Target::dense(a.clone())?;

    let (mut v, report) = best_of_restarts(opts, |_, rng| {
        let start = DMatrix::from_fn(n, r, |_, _| S::gaussian(rng));
        let mut flags = Vec::new();
        let mut state = Sym::fit(normalize(start), d, &target, &mut flags);
        let trace = drive(&mut state, opts, |s| {
            s.step(&target, &mut flags);
            Ok(StepOutcome {
                objective: s.objective,
                kappa: s.kappa,
            })
        })?;
        Ok((state, trace, flags))
    })?;
    v.canonicalize(d);
    let model = CpDecomposition {
        shape: a.shape().to_vec(),
        weights: v.weights,
        factors: vec![v.vectors; d],
    };
    Ok((model, report))
}

struct Sym<S: Scalar> {
    vectors: DMatrix<S>,
    weights: Vec<S>,
    order: usize,
    objective: f64,
    kappa: f64,
}

impl<S: Scalar> Sym<S> {
    /// Least-squares weights for fixed unit vectors.
    fn fit(
        vectors: DMatrix<S>,
        order: usize,
        target: &Target<S>,
        flags: &mut Vec<SolveFlag>,
    ) -> Self {
        let r = vectors.ncols();
        let inner = vectors.adjoint() * &vectors;
        let gram = DMatrix::from_fn(r, r, |i, k| pow(inner[(i, k)], order));
        let rhs = DMatrix::from_fn(r, 1, |i, _| {
            let col: Vec<S> = vectors.column(i).iter().copied().collect();
            target
                .tensor
                .inner(&power_tensor(&col, order))
                .expect("shapes agree")
        });
        let w = solve_gram(&gram, &rhs, flags);
        let weights: Vec<S> = w.iter().copied().collect();
        let model = CpDecomposition {
            shape: target.tensor.shape().to_vec(),
            weights: weights.clone(),
            factors: vec![vectors.clone(); order],
        };
        let b = model.reconstruct();
        Self {
            objective: target.relative_residual(&b),
            kappa: kappa(&weights, &b),
            vectors,
            weights,
            order,
        }
    }

    fn step(&mut self, target: &Target<S>, flags: &mut Vec<SolveFlag>) {
        let mut free = CpDecomposition {
            shape: target.tensor.shape().to_vec(),
            weights: self.weights.clone(),
            factors: vec![self.vectors.clone(); self.order],
        };
        sweep(&mut free, target, flags);
        let projected = average_modes(&free.factors);

        let mut beta = 1.0;
        for _ in 0..BACKTRACK_STEPS {
            let trial = if beta == 1.0 {
                projected.clone()
            } else {
                blend(&self.vectors, &projected, beta)
            };
            let cand = Self::fit(trial, self.order, target, flags);
            if cand.objective <= self.objective {
                *self = cand;
                return;
            }
            beta *= 0.5;
        }
        if !flags.contains(&SolveFlag::Stalled) {
            flags.push(SolveFlag::Stalled);
        }
    }

    /// Real nonnegative weights where the field allows it: complex phases
    /// are spread as `λ^{1/d}` over the vector, real odd orders move the
    /// sign into the vector, real even orders keep a signed weight.
    fn canonicalize(&mut self, d: usize) {
        for i in 0..self.weights.len() {
            let w = self.weights[i];
            if w.modulus() == 0.0 {
                continue;
            }
            let unit = w.signum();
            let root = match S::FIELD {
                crate::scalar::FieldTag::Complex => Some(unit.powf(1.0 / d as f64)),
                crate::scalar::FieldTag::Real if d % 2 == 1 => Some(unit),
                crate::scalar::FieldTag::Real => None,
            };
            if let Some(root) = root {
                self.vectors
                    .column_mut(i)
                    .iter_mut()
                    .for_each(|x| *x *= root);
                self.weights[i] = S::from_real(w.modulus());
            }
        }
    }
}

fn pow<S: Scalar>(x: S, d: usize) -> S {
    (0..d).fold(S::one(), |acc, _| acc * x)
}

fn power_tensor<S: Scalar>(v: &[S], d: usize) -> Tensor<S> {
    Tensor::outer_vectors(&vec![v; d]).expect("nonempty vector")
}

fn normalize<S: Scalar>(mut m: DMatrix<S>) -> DMatrix<S> {
    for mut col in m.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col.unscale_mut(n);
        } else {
            col[0] = S::one();
        }
    }
    m
}

/// Aligns the phase of each mode's factor to mode 0 and averages.
fn average_modes<S: Scalar>(factors: &[DMatrix<S>]) -> DMatrix<S> {
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        for i in 0..acc.ncols() {
            let c = factors[0].column(i).dotc(&f.column(i));
            let phase = if c.modulus() > 0.0 {
                c.signum().conjugate()
            } else {
                S::one()
            };
            for k in 0..acc.nrows() {
                acc[(k, i)] += f[(k, i)] * phase;
            }
        }
    }
    normalize(acc)
}

fn blend<S: Scalar>(old: &DMatrix<S>, new: &DMatrix<S>, beta: f64) -> DMatrix<S> {
    let mut out = old.clone();
    for i in 0..old.ncols() {
        let c = old.column(i).dotc(&new.column(i));
        let phase = if c.modulus() > 0.0 {
            c.signum().conjugate()
        } else {
            S::one()
        };
        for k in 0..old.nrows() {
            out[(k, i)] = old[(k, i)].scale(1.0 - beta) + new[(k, i)] * phase.scale(beta);
        }
    }
    normalize(out)
}
