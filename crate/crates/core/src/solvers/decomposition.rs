use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{decode_entries, encode_entries, RawEntry};
use crate::scalar::{FieldTag, Scalar, C64};
use crate::tensor::Tensor;

/// `Σ_i λ_i · u_{1,i} ⊗ ⋯ ⊗ u_{d,i}` with unit-norm factor columns.
///
/// `factors[j]` is the `n_j × r` matrix whose column `i` is `u_{j,i}`.
/// Solvers return nonnegative real weights with any phase carried by the
/// mode-0 factor (see [`CpDecomposition::canonicalize`]); symmetric
/// approximations of even order over ℝ may carry negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CpDecomposition<S: Scalar> {
    pub(crate) shape: Vec<usize>,
    pub(crate) weights: Vec<S>,
    pub(crate) factors: Vec<DMatrix<S>>,
}

const UNIT_TOL: f64 = 1e-12;

impl<S: Scalar> CpDecomposition<S> {
    pub fn new(weights: Vec<S>, factors: Vec<DMatrix<S>>) -> Result<Self> {
        let d = Self::check_layout(&weights, &factors)?;
        for (j, f) in factors.iter().enumerate() {
            for (i, col) in f.column_iter().enumerate() {
                if (col.norm() - 1.0).abs() > UNIT_TOL {
                    return Err(Error::Layout(format!(
                        "factor {i} of mode {j} is not unit-norm"
                    )));
                }
            }
        }
        let shape = factors.iter().map(|f| f.nrows()).collect();
        debug_assert_eq!(factors.len(), d);
        Ok(Self {
            shape,
            weights,
            factors,
        })
    }

    /// Normalizes every column and folds the norms into the weights.
    pub fn from_unnormalized(mut weights: Vec<S>, mut factors: Vec<DMatrix<S>>) -> Result<Self> {
        Self::check_layout(&weights, &factors)?;
        for f in factors.iter_mut() {
            for (i, mut col) in f.column_iter_mut().enumerate() {
                let n = col.norm();
                if n > 0.0 {
                    col.unscale_mut(n);
                    weights[i] = weights[i].scale(n);
                } else {
                    col.fill(S::zero());
                    col[0] = S::one();
                    weights[i] = S::zero();
                }
            }
        }
        let shape = factors.iter().map(|f| f.nrows()).collect();
        Ok(Self {
            shape,
            weights,
            factors,
        })
    }

    fn check_layout(weights: &[S], factors: &[DMatrix<S>]) -> Result<usize> {
        if factors.is_empty() {
            return Err(Error::Empty("decomposition without modes"));
        }
        if weights.is_empty() {
            return Err(Error::InvalidRank(0));
        }
        if let Some(f) = factors
            .iter()
            .find(|f| f.ncols() != weights.len() || f.nrows() == 0)
        {
            return Err(Error::Layout(format!(
                "factor matrix {}x{} does not match rank {}",
                f.nrows(),
                f.ncols(),
                weights.len()
            )));
        }
        if weights
            .iter()
            .chain(factors.iter().flat_map(|f| f.iter()))
            .any(|x| !x.finite())
        {
            return Err(Error::NonFinite(0));
        }
        Ok(factors.len())
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn field(&self) -> FieldTag {
        S::FIELD
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn factors(&self) -> &[DMatrix<S>] {
        &self.factors
    }

    pub fn factor(&self, mode: usize, term: usize) -> Vec<S> {
        self.factors[mode].column(term).iter().copied().collect()
    }

    pub fn term(&self, i: usize) -> Tensor<S> {
        let cols: Vec<Vec<S>> = (0..self.order()).map(|j| self.factor(j, i)).collect();
        let refs: Vec<&[S]> = cols.iter().map(|c| c.as_slice()).collect();
        Tensor::outer_vectors(&refs)
            .expect("valid layout")
            .scale(self.weights[i])
    }

    pub fn reconstruct(&self) -> Tensor<S> {
        let len: usize = self.shape.iter().product();
        let mut data = vec![S::zero(); len];
        for i in 0..self.rank() {
            // expand the rank-one term mode by mode
            let mut term = vec![self.weights[i]];
            for f in &self.factors {
                let col = f.column(i);
                term = term
                    .iter()
                    .flat_map(|&a| col.iter().map(move |&b| a * b))
                    .collect();
            }
            for (acc, t) in data.iter_mut().zip(term) {
                *acc += t;
            }
        }
        Tensor::new(self.shape.clone(), data).expect("finite factors")
    }

    /// Makes every weight real and nonnegative and every mode ≥ 1 factor
    /// have a real positive entry at its largest-modulus position; the
    /// compensating phases go into the mode-0 factor.
    pub fn canonicalize(&mut self) {
        for i in 0..self.rank() {
            let mut phase = S::one();
            for f in self.factors.iter_mut().skip(1) {
                let mut col = f.column_mut(i);
                let pivot = col.iter().enumerate().fold((0, -1.0), |best, (k, x)| {
                    if x.modulus() > best.1 {
                        (k, x.modulus())
                    } else {
                        best
                    }
                });
                let p = col[pivot.0];
                if p.modulus() > 0.0 {
                    let u = p.signum();
                    col.iter_mut().for_each(|x| *x *= u.conjugate());
                    phase *= u;
                }
            }
            let w = self.weights[i];
            if w.modulus() > 0.0 {
                phase *= w.signum();
            }
            self.weights[i] = S::from_real(w.modulus());
            self.factors[0]
                .column_mut(i)
                .iter_mut()
                .for_each(|x| *x *= phase);
        }
    }

    /// `{"field","shape","rank","weights":[…],"factors":[[u_{j,1},…]…]}`,
    /// `factors[mode][term]`, entries as in the tensor format.
    pub fn to_json(&self) -> Value {
        let factors: Vec<Vec<Vec<Value>>> = self
            .factors
            .iter()
            .map(|f| {
                f.column_iter()
                    .map(|c| encode_entries(&c.iter().copied().collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        json!({
            "field": S::FIELD,
            "shape": self.shape,
            "rank": self.rank(),
            "weights": encode_entries(&self.weights),
            "factors": factors,
        })
    }

    pub fn from_json(value: Value) -> Result<Self> {
        let raw: RawDecomposition = serde_json::from_value(value)?;
        if raw.field != S::FIELD {
            return Err(Error::FieldMismatch {
                expected: S::FIELD,
                found: raw.field,
            });
        }
        let weights = decode_entries::<S>(&raw.weights)?;
        if raw.rank != weights.len() || raw.factors.len() != raw.shape.len() {
            return Err(Error::Layout(
                "rank/shape do not match weights/factors".into(),
            ));
        }
        let factors = raw
            .factors
            .iter()
            .zip(&raw.shape)
            .map(|(cols, &n)| {
                if cols.len() != weights.len() {
                    return Err(Error::Layout("factor count does not match rank".into()));
                }
                let cols = cols
                    .iter()
                    .map(|c| decode_entries::<S>(c))
                    .collect::<Result<Vec<_>>>()?;
                if cols.iter().any(|c| c.len() != n) {
                    return Err(Error::Layout("factor length does not match shape".into()));
                }
                Ok(DMatrix::from_fn(n, weights.len(), |r, c| cols[c][r]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_unnormalized(weights, factors)
    }
}

impl CpDecomposition<f64> {
    /// The same decomposition with complex scalars.
    pub fn promote(&self) -> CpDecomposition<C64> {
        CpDecomposition {
            shape: self.shape.clone(),
            weights: self.weights.iter().map(|&w| C64::new(w, 0.0)).collect(),
            factors: self
                .factors
                .iter()
                .map(|f| f.map(|x| C64::new(x, 0.0)))
                .collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecomposition {
    field: FieldTag,
    shape: Vec<usize>,
    rank: usize,
    weights: Vec<RawEntry>,
    factors: Vec<Vec<Vec<RawEntry>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    /// `Σ|λ_i| / ‖Σ term_i‖`; `+∞` when the reconstruction vanishes.
    pub kappa: f64,
    pub zero_reconstruction: bool,
    pub per_term_norms: Vec<f64>,
    /// `‖A − B‖ / ‖A‖` when a target was supplied.
    pub residual: Option<f64>,
}

fn balance(total: f64, sum_norm: f64) -> (f64, bool) {
    if sum_norm > 0.0 {
        (total / sum_norm, false)
    } else {
        (f64::INFINITY, true)
    }
}

pub fn diagnose<S: Scalar>(
    decomp: &CpDecomposition<S>,
    target: Option<&Tensor<S>>,
) -> Result<Diagnosis> {
    let per_term_norms: Vec<f64> = decomp.weights().iter().map(|w| w.modulus()).collect();
    let b = decomp.reconstruct();
    let (kappa, zero_reconstruction) = balance(per_term_norms.iter().sum(), b.norm());
    let residual = match target {
        Some(a) => {
            let na = a.norm();
            let r = a.sub(&b)?.norm();
            Some(if na > 0.0 { r / na } else { r })
        }
        None => None,
    };
    Ok(Diagnosis {
        kappa,
        zero_reconstruction,
        per_term_norms,
        residual,
    })
}

/// Same balance diagnostic for arbitrary summand tensors.
pub fn diagnose_terms<S: Scalar>(terms: &[Tensor<S>]) -> Result<Diagnosis> {
    let (first, rest) = terms.split_first().ok_or(Error::Empty("no terms"))?;
    let mut sum = first.clone();
    for t in rest {
        sum.axpy(S::one(), t)?;
    }
    let per_term_norms: Vec<f64> = terms.iter().map(|t| t.norm()).collect();
    let (kappa, zero_reconstruction) = balance(per_term_norms.iter().sum(), sum.norm());
    Ok(Diagnosis {
        kappa,
        zero_reconstruction,
        per_term_norms,
        residual: None,
    })
}
