//! Index subsets Θ of a tensor shape, used as completion masks and as fixed
//! sparsity patterns.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{checked_len, Tensor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    shape: Vec<usize>,
    observed: Vec<bool>,
    count: usize,
}

impl Mask {
    /// Builds a mask from 0-based multi-indices. Duplicates and
    /// out-of-range indices are rejected.
    pub fn new(shape: &[usize], indices: &[Vec<usize>]) -> Result<Self> {
        let len = checked_len(shape)?;
        let mut observed = vec![false; len];
        for idx in indices {
            if idx.len() != shape.len() {
                return Err(Error::InvalidMask(format!(
                    "index {idx:?} has {} components for an order-{} tensor",
                    idx.len(),
                    shape.len()
                )));
            }
            let mut flat = 0usize;
            for (&i, &n) in idx.iter().zip(shape) {
                if i >= n {
                    return Err(Error::InvalidMask(format!(
                        "index {idx:?} out of range for {shape:?}"
                    )));
                }
                flat = flat * n + i;
            }
            if std::mem::replace(&mut observed[flat], true) {
                return Err(Error::InvalidMask(format!("duplicate index {idx:?}")));
            }
        }
        Ok(Self {
            shape: shape.to_vec(),
            count: indices.len(),
            observed,
        })
    }

    pub fn full(shape: &[usize]) -> Result<Self> {
        let len = checked_len(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            observed: vec![true; len],
            count: len,
        })
    }

    pub fn empty(shape: &[usize]) -> Result<Self> {
        let len = checked_len(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            observed: vec![false; len],
            count: 0,
        })
    }

    pub fn from_flat(shape: &[usize], flat: &[usize]) -> Result<Self> {
        let len = checked_len(shape)?;
        let mut observed = vec![false; len];
        for &f in flat {
            if f >= len {
                return Err(Error::InvalidMask(format!("flat index {f} out of range")));
            }
            if std::mem::replace(&mut observed[f], true) {
                return Err(Error::InvalidMask(format!("duplicate flat index {f}")));
            }
        }
        Ok(Self {
            shape: shape.to_vec(),
            observed,
            count: flat.len(),
        })
    }

    /// Uniformly random subset with `round(fraction · len)` entries.
    pub fn random<R: Rng + ?Sized>(shape: &[usize], fraction: f64, rng: &mut R) -> Result<Self> {
        let len = checked_len(shape)?;
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidMask(format!(
                "observed fraction {fraction} outside [0, 1]"
            )));
        }
        let k = ((fraction * len as f64).round() as usize).min(len);
        let mut flat = sample(rng, len, k).into_vec();
        flat.sort_unstable();
        Self::from_flat(shape, &flat)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn is_full(&self) -> bool {
        self.count == self.observed.len()
    }

    pub fn contains_flat(&self, flat: usize) -> bool {
        self.observed.get(flat).copied().unwrap_or(false)
    }

    pub fn flags(&self) -> &[bool] {
        &self.observed
    }

    pub fn flat_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.observed
            .iter()
            .enumerate()
            .filter_map(|(i, &o)| o.then_some(i))
    }

    /// 0-based multi-indices in row-major order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        self.flat_indices()
            .map(|mut f| {
                let mut idx = vec![0; self.shape.len()];
                for k in (0..self.shape.len()).rev() {
                    idx[k] = f % self.shape[k];
                    f /= self.shape[k];
                }
                idx
            })
            .collect()
    }

    pub fn complement(&self) -> Self {
        let observed: Vec<bool> = self.observed.iter().map(|o| !o).collect();
        Self {
            shape: self.shape.clone(),
            count: observed.len() - self.count,
            observed,
        }
    }

    fn check_shape(&self, shape: &[usize]) -> Result<()> {
        if self.shape != shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: shape.to_vec(),
            });
        }
        Ok(())
    }

    /// `P_Θ`: keeps observed entries and zeroes the rest.
    pub fn project<S: Scalar>(&self, t: &Tensor<S>) -> Result<Tensor<S>> {
        self.check_shape(t.shape())?;
        let data = t
            .data()
            .iter()
            .zip(&self.observed)
            .map(|(&x, &o)| if o { x } else { S::zero() })
            .collect();
        Tensor::new(t.shape().to_vec(), data)
    }
}
