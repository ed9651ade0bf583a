//! Dense hypermatrices over ℝ or ℂ.
//!
//! Storage is row-major: the last index varies fastest. For shape
//! `(n_0, …, n_{d-1})` the entry at `(i_0, …, i_{d-1})` lives at flat
//! position `Σ_k i_k · Π_{l>k} n_l`. Mode indices are 0-based in the Rust
//! API; the JSON formats and the CLI use 1-based entry indices.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{FieldTag, Scalar, C64};

/// Largest order accepted by the explicit permutation sums in
/// [`Tensor::symmetrize`] and [`Tensor::alternate`].
pub const MAX_SYMMETRIZE_ORDER: usize = 8;

/// Relative singular-value threshold shared by rank and independence tests.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S: Scalar> {
    shape: Vec<usize>,
    data: Vec<S>,
}

pub(crate) fn checked_len(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::InvalidShape(
            "a tensor needs at least one mode".into(),
        ));
    }
    shape.iter().try_fold(1usize, |acc, &n| {
        if n == 0 {
            return Err(Error::InvalidShape(format!(
                "zero-length mode in {shape:?}"
            )));
        }
        acc.checked_mul(n)
            .ok_or_else(|| Error::InvalidShape(format!("shape {shape:?} overflows")))
    })
}

/// Advances a row-major multi-index; returns false after the last index.
pub(crate) fn next_index(idx: &mut [usize], shape: &[usize]) -> bool {
    for k in (0..shape.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

impl<S: Scalar> Tensor<S> {
    pub fn new(shape: Vec<usize>, data: Vec<S>) -> Result<Self> {
        let len = checked_len(&shape)?;
        if data.len() != len {
            return Err(Error::InvalidShape(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = checked_len(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![S::zero(); len],
        })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> S) -> Result<Self> {
        let len = checked_len(shape)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; shape.len()];
        loop {
            data.push(f(&idx));
            if !next_index(&mut idx, shape) {
                break;
            }
        }
        Self::new(shape.to_vec(), data)
    }

    pub fn gaussian<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Result<Self> {
        let len = checked_len(shape)?;
        let data = (0..len).map(|_| S::gaussian(rng)).collect();
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Unit vector `e_i` (0-based) of length `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut data = vec![S::zero(); n];
        data[i] = S::one();
        Self {
            shape: vec![n],
            data,
        }
    }

    pub fn vector(data: Vec<S>) -> Result<Self> {
        Self::new(vec![data.len()], data)
    }

    pub fn field(&self) -> FieldTag {
        S::FIELD
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> Option<usize> {
        if idx.len() != self.shape.len() {
            return None;
        }
        let mut flat = 0;
        for (&i, &n) in idx.iter().zip(&self.shape) {
            if i >= n {
                return None;
            }
            flat = flat * n + i;
        }
        Some(flat)
    }

    pub fn get(&self, idx: &[usize]) -> Option<S> {
        self.flat_index(idx).map(|f| self.data[f])
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: other.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: S, other: &Self) -> Result<()> {
        self.check_same(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&self, alpha: S) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&a| a * alpha).collect(),
        }
    }

    /// Hermitian inner product `Σ a · conj(b)`.
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.check_same(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |acc, (&a, &b)| acc + a * b.conjugate()))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.abs2()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Outer product `t_1 ⊗ ⋯ ⊗ t_m`; modes are concatenated in order.
    /// With vector arguments this is the rank-one tensor `v_1 ⊗ ⋯ ⊗ v_m`.
    pub fn outer(parts: &[&Self]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or(Error::Empty("outer product of no factors"))?;
        let mut acc = (*first).clone();
        for t in rest {
            let mut shape = acc.shape.clone();
            shape.extend_from_slice(&t.shape);
            checked_len(&shape)?;
            let mut data = Vec::with_capacity(acc.data.len() * t.data.len());
            for &a in &acc.data {
                data.extend(t.data.iter().map(|&b| a * b));
            }
            acc = Self { shape, data };
        }
        Ok(acc)
    }

    /// Rank-one tensor from plain factor vectors.
    pub fn outer_vectors(vectors: &[&[S]]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Empty("outer product of no vectors"));
        }
        if vectors.iter().any(|v| v.is_empty()) {
            return Err(Error::Empty("outer product with an empty vector"));
        }
        let shape: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
        let len = checked_len(&shape)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; shape.len()];
        loop {
            data.push(
                idx.iter()
                    .zip(vectors)
                    .fold(S::one(), |acc, (&i, v)| acc * v[i]),
            );
            if !next_index(&mut idx, &shape) {
                break;
            }
        }
        Ok(Self { shape, data })
    }

    /// Applies the action `τ(v_1 ⊗ ⋯ ⊗ v_d) = v_{τ(1)} ⊗ ⋯ ⊗ v_{τ(d)}`.
    ///
    /// Mode `k` of the result is mode `τ(k)` of `self`, so non-cubical
    /// shapes are allowed and the result has shape `n_{τ(k)}`. The action is
    /// a right action: `permute(permute(A, τ), ρ) = permute(A, τ ∘ ρ)`.
    pub fn permute(&self, tau: &Permutation) -> Result<Self> {
        let d = self.order();
        if tau.len() != d {
            return Err(Error::InvalidPermutation(format!(
                "permutation of {} symbols applied to an order-{d} tensor",
                tau.len()
            )));
        }
        let shape: Vec<usize> = (0..d).map(|k| self.shape[tau.image(k)]).collect();
        let src_strides = strides(&self.shape);
        // stride in the source for each result mode
        let mapped: Vec<usize> = (0..d).map(|k| src_strides[tau.image(k)]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0; d];
        loop {
            let src: usize = idx.iter().zip(&mapped).map(|(i, s)| i * s).sum();
            data.push(self.data[src]);
            if !next_index(&mut idx, &shape) {
                break;
            }
        }
        Ok(Self { shape, data })
    }

    fn cubical_order(&self) -> Result<usize> {
        let n = self.shape[0];
        if self.shape.iter().any(|&m| m != n) {
            return Err(Error::UnequalModes(self.shape.clone()));
        }
        let d = self.order();
        if d > MAX_SYMMETRIZE_ORDER {
            return Err(Error::OrderTooLarge {
                order: d,
                max: MAX_SYMMETRIZE_ORDER,
            });
        }
        Ok(d)
    }

    fn permutation_average(&self, signed: bool) -> Result<Self> {
        let d = self.cubical_order()?;
        let perms = Permutation::all(d);
        let mut acc = Self {
            shape: self.shape.clone(),
            data: vec![S::zero(); self.data.len()],
        };
        for tau in &perms {
            let p = self.permute(tau)?;
            let coeff = if signed && tau.sign() < 0 {
                -S::one()
            } else {
                S::one()
            };
            acc.axpy(coeff, &p)?;
        }
        let inv = S::from_real(1.0 / perms.len() as f64);
        Ok(acc.scale(inv))
    }

    /// `(1/d!) Σ_τ τ(T)`, the projector onto symmetric tensors.
    pub fn symmetrize(&self) -> Result<Self> {
        self.permutation_average(false)
    }

    /// `(1/d!) Σ_τ sgn(τ) τ(T)`, the projector onto alternating tensors.
    pub fn alternate(&self) -> Result<Self> {
        self.permutation_average(true)
    }

    /// Mode-`mode` unfolding: an `n_mode × Π_{j≠mode} n_j` matrix. Column
    /// `p` is the row-major linearization of the remaining indices kept in
    /// their original order (last index fastest).
    pub fn unfold(&self, mode: usize) -> Result<DMatrix<S>> {
        let d = self.order();
        if mode >= d {
            return Err(Error::ModeOutOfRange { mode, order: d });
        }
        let rows = self.shape[mode];
        let cols = self.data.len() / rows;
        let inner: usize = self.shape[mode + 1..].iter().product();
        let mut m = DMatrix::zeros(rows, cols);
        let out = m.as_mut_slice();
        // data is [outer][row][inner]; column-major entry (row, col) sits at col·rows + row
        for (o, block) in self.data.chunks_exact(rows * inner).enumerate() {
            for (row, line) in block.chunks_exact(inner).enumerate() {
                for (k, &x) in line.iter().enumerate() {
                    out[(o * inner + k) * rows + row] = x;
                }
            }
        }
        Ok(m)
    }

    /// Inverse of [`Tensor::unfold`].
    pub fn fold(matrix: &DMatrix<S>, mode: usize, shape: &[usize]) -> Result<Self> {
        let len = checked_len(shape)?;
        let d = shape.len();
        if mode >= d {
            return Err(Error::ModeOutOfRange { mode, order: d });
        }
        let rows = shape[mode];
        if matrix.nrows() != rows || matrix.ncols() * rows != len {
            return Err(Error::InvalidShape(format!(
                "{}x{} matrix cannot fold into {shape:?} along mode {mode}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let inner: usize = shape[mode + 1..].iter().product();
        let src = matrix.as_slice();
        let mut data = Vec::with_capacity(len);
        for o in 0..len / (rows * inner) {
            for row in 0..rows {
                data.extend((0..inner).map(|k| src[(o * inner + k) * rows + row]));
            }
        }
        Self::new(shape.to_vec(), data)
    }

    /// Multiplies mode `mode` by `matrix` (`m × n_mode`), replacing that
    /// dimension by `m`.
    pub fn mode_product(&self, matrix: &DMatrix<S>, mode: usize) -> Result<Self> {
        let unf = self.unfold(mode)?;
        if matrix.ncols() != unf.nrows() {
            return Err(Error::ShapeMismatch {
                expected: vec![matrix.nrows(), unf.nrows()],
                found: vec![matrix.nrows(), matrix.ncols()],
            });
        }
        let prod = matrix * unf;
        let mut shape = self.shape.clone();
        shape[mode] = matrix.nrows();
        Self::fold(&prod, mode, &shape)
    }

    pub fn mrank(&self, tol: f64) -> Result<MultilinearRank> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidTolerance(tol));
        }
        let ranks = (0..self.order())
            .map(|k| Ok(numerical_rank(&self.unfold(k)?, tol)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultilinearRank {
            ranks,
            tolerance: tol,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).modulus())
            .fold(0.0, f64::max))
    }

    /// Relative deviation from symmetry under adjacent transpositions,
    /// which generate the symmetric group.
    pub fn symmetry_defect(&self) -> Result<f64> {
        let d = self.order();
        let n = self.shape[0];
        if self.shape.iter().any(|&m| m != n) {
            return Err(Error::UnequalModes(self.shape.clone()));
        }
        let norm = self.norm();
        let mut worst: f64 = 0.0;
        for k in 0..d.saturating_sub(1) {
            let p = self.permute(&Permutation::transposition(d, k, k + 1))?;
            worst = worst.max(p.sub(self)?.norm());
        }
        Ok(if norm > 0.0 { worst / norm } else { worst })
    }
}

impl Tensor<f64> {
    /// Explicit embedding ℝ ⊂ ℂ.
    pub fn promote(&self) -> Tensor<C64> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }
}

/// Number of singular values above `tol · σ_max`.
pub fn numerical_rank<S: Scalar>(m: &DMatrix<S>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// A bijection on `{0, …, d-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &i in &images {
            if i >= d || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection"
                )));
            }
        }
        Ok(Self { images })
    }

    /// From 1-based images, as written in documentation.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let zero: Option<Vec<usize>> = images.iter().map(|&i| i.checked_sub(1)).collect();
        Self::new(
            zero.ok_or_else(|| Error::InvalidPermutation("index 0 in 1-based images".into()))?,
        )
    }

    pub fn identity(d: usize) -> Self {
        Self {
            images: (0..d).collect(),
        }
    }

    pub fn transposition(d: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..d).collect();
        images.swap(a, b);
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Parity via cycle decomposition.
    pub fn sign(&self) -> i32 {
        let d = self.images.len();
        let mut seen = vec![false; d];
        let mut transpositions = 0;
        for start in 0..d {
            let mut len = 0;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.images[k];
                len += 1;
            }
            if len > 0 {
                transpositions += len - 1;
            }
        }
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// `self ∘ other`: `k ↦ self(other(k))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::InvalidPermutation(
                "composing permutations of different sizes".into(),
            ));
        }
        Ok(Self {
            images: other.images.iter().map(|&k| self.images[k]).collect(),
        })
    }

    /// All `d!` permutations in lexicographic order.
    pub fn all(d: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..d).collect();
        loop {
            out.push(Self {
                images: cur.clone(),
            });
            // next lexicographic permutation
            let Some(i) = (1..d).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..d).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MultilinearRank {
    pub ranks: Vec<usize>,
    pub tolerance: f64,
}

/// A tensor whose field is known only at run time (file input, CLI).
#[derive(Debug, Clone, PartialEq)]
pub enum Hypermatrix {
    Real(Tensor<f64>),
    Complex(Tensor<C64>),
}

impl From<Tensor<f64>> for Hypermatrix {
    fn from(t: Tensor<f64>) -> Self {
        Hypermatrix::Real(t)
    }
}

impl From<Tensor<C64>> for Hypermatrix {
    fn from(t: Tensor<C64>) -> Self {
        Hypermatrix::Complex(t)
    }
}

impl Hypermatrix {
    pub fn field(&self) -> FieldTag {
        match self {
            Hypermatrix::Real(_) => FieldTag::Real,
            Hypermatrix::Complex(_) => FieldTag::Complex,
        }
    }

    pub fn shape(&self) -> &[usize] {
        match self {
            Hypermatrix::Real(t) => t.shape(),
            Hypermatrix::Complex(t) => t.shape(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Hypermatrix::Real(t) => t.norm(),
            Hypermatrix::Complex(t) => t.norm(),
        }
    }

    pub fn promote(&self) -> Tensor<C64> {
        match self {
            Hypermatrix::Real(t) => t.promote(),
            Hypermatrix::Complex(t) => t.clone(),
        }
    }

    fn mismatch(&self, other: &Self) -> Error {
        Error::FieldMismatch {
            expected: self.field(),
            found: other.field(),
        }
    }

    /// Inner product; mixed-field arguments are rejected.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        match (self, other) {
            (Hypermatrix::Real(a), Hypermatrix::Real(b)) => Ok(C64::new(a.inner(b)?, 0.0)),
            (Hypermatrix::Complex(a), Hypermatrix::Complex(b)) => a.inner(b),
            _ => Err(self.mismatch(other)),
        }
    }

    /// Outer product of same-field factors (vectors or tensors).
    pub fn outer(parts: &[Hypermatrix]) -> Result<Hypermatrix> {
        let first = parts
            .first()
            .ok_or(Error::Empty("outer product of no factors"))?;
        if let Some(bad) = parts.iter().find(|p| p.field() != first.field()) {
            return Err(first.mismatch(bad));
        }
        match first {
            Hypermatrix::Real(_) => {
                let ts: Vec<&Tensor<f64>> = parts
                    .iter()
                    .map(|p| match p {
                        Hypermatrix::Real(t) => t,
                        Hypermatrix::Complex(_) => unreachable!(),
                    })
                    .collect();
                Tensor::outer(&ts).map(Hypermatrix::Real)
            }
            Hypermatrix::Complex(_) => {
                let ts: Vec<&Tensor<C64>> = parts
                    .iter()
                    .map(|p| match p {
                        Hypermatrix::Complex(t) => t,
                        Hypermatrix::Real(_) => unreachable!(),
                    })
                    .collect();
                Tensor::outer(&ts).map(Hypermatrix::Complex)
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Hypermatrix> {
        match (self, other) {
            (Hypermatrix::Real(a), Hypermatrix::Real(b)) => a.add(b).map(Hypermatrix::Real),
            (Hypermatrix::Complex(a), Hypermatrix::Complex(b)) => {
                a.add(b).map(Hypermatrix::Complex)
            }
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn mrank(&self, tol: f64) -> Result<MultilinearRank> {
        match self {
            Hypermatrix::Real(t) => t.mrank(tol),
            Hypermatrix::Complex(t) => t.mrank(tol),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn outer_of_unit_vectors() {
        let t = Tensor::<C64>::outer(&[
            &Tensor::unit(2, 0),
            &Tensor::unit(2, 1),
            &Tensor::unit(2, 1),
        ])
        .unwrap();
        assert_eq!(t.shape(), &[2, 2, 2]);
        for (flat, x) in t.data().iter().enumerate() {
            let expect = if flat == 0b011 { 1.0 } else { 0.0 };
            assert_eq!(*x, C64::new(expect, 0.0));
        }
    }

    #[test]
    fn outer_is_bilinear() {
        let a = [2.0, 0.0];
        let b = [3.0, 0.0];
        let t = Tensor::outer_vectors(&[&a, &b]).unwrap();
        assert_eq!(t.data(), &[6.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn outer_norm_and_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vs: Vec<Tensor<f64>> = [2, 3, 4]
            .iter()
            .map(|&n| Tensor::gaussian(&[n], &mut rng).unwrap())
            .collect();
        let refs: Vec<&Tensor<f64>> = vs.iter().collect();
        let t = Tensor::outer(&refs).unwrap();
        assert_eq!(t.shape(), &[2, 3, 4]);
        let expect: f64 = vs.iter().map(|v| v.norm()).product();
        assert!((t.norm() - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn outer_rejects_empty() {
        assert!(matches!(Tensor::<f64>::outer(&[]), Err(Error::Empty(_))));
        assert!(matches!(
            Tensor::<f64>::outer_vectors(&[&[]]),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn mixed_fields_rejected() {
        let r = Hypermatrix::Real(Tensor::unit(2, 0));
        let c = Hypermatrix::Complex(Tensor::unit(2, 0));
        assert!(matches!(r.inner(&c), Err(Error::FieldMismatch { .. })));
        assert!(matches!(
            Hypermatrix::outer(&[r.clone(), c.clone()]),
            Err(Error::FieldMismatch { .. })
        ));
        assert!(matches!(r.add(&c), Err(Error::FieldMismatch { .. })));
    }

    #[test]
    fn symmetrize_pair_has_half_coefficient() {
        let t = Tensor::outer_vectors(&[&e(2, 0), &e(2, 1)]).unwrap();
        let s = t.symmetrize().unwrap();
        assert_eq!(s.data(), &[0.0, 0.5, 0.5, 0.0]);
        let a = t.alternate().unwrap();
        assert_eq!(a.data(), &[0.0, 0.5, -0.5, 0.0]);
    }

    #[test]
    fn alternate_of_square_vanishes() {
        let t = Tensor::outer_vectors(&[&e(3, 0), &e(3, 0)]).unwrap();
        assert!(t.alternate().unwrap().norm() == 0.0);
    }

    #[test]
    fn cube_is_already_symmetric() {
        let v = [0.3, -1.2, 2.0];
        let t = Tensor::outer_vectors(&[&v, &v, &v]).unwrap();
        assert!(t.symmetrize().unwrap().max_abs_diff(&t).unwrap() < 1e-15);
    }

    #[test]
    fn symmetrize_needs_cubical_shape() {
        let t = Tensor::<f64>::zeros(&[2, 3]).unwrap();
        assert!(matches!(t.symmetrize(), Err(Error::UnequalModes(_))));
        let big = Tensor::<f64>::zeros(&[1; 9]).unwrap();
        assert!(matches!(big.alternate(), Err(Error::OrderTooLarge { .. })));
    }

    #[test]
    fn inner_examples() {
        let a = Tensor::outer_vectors(&[&e(2, 0), &e(2, 1)]).unwrap();
        let b = Tensor::outer_vectors(&[&e(2, 1), &e(2, 0)]).unwrap();
        assert_eq!(a.inner(&a).unwrap(), 1.0);
        assert_eq!(a.inner(&b).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = Tensor::<C64>::gaussian(&[2, 3], &mut rng).unwrap();
        let it = t.scale(C64::i());
        let got = it.inner(&t).unwrap();
        let want = C64::i() * t.norm_sqr();
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn permute_swaps_factors() {
        let a = Tensor::outer_vectors(&[&e(2, 0), &e(2, 1)]).unwrap();
        let b = Tensor::outer_vectors(&[&e(2, 1), &e(2, 0)]).unwrap();
        let swap = Permutation::from_one_based(&[2, 1]).unwrap();
        assert_eq!(a.permute(&swap).unwrap(), b);
    }

    #[test]
    fn permute_matches_rank_one_action_on_rectangular_shape() {
        let v: [&[f64]; 3] = [&[1.0, 2.0], &[3.0, 4.0, 5.0], &[6.0, 7.0, 8.0, 9.0]];
        let t = Tensor::outer_vectors(&[v[0], v[1], v[2]]).unwrap();
        let tau = Permutation::new(vec![2, 0, 1]).unwrap();
        let want = Tensor::outer_vectors(&[v[2], v[0], v[1]]).unwrap();
        assert_eq!(t.permute(&tau).unwrap(), want);
    }

    #[test]
    fn permute_rejects_wrong_size() {
        let t = Tensor::<f64>::zeros(&[2, 2]).unwrap();
        assert!(t.permute(&Permutation::identity(3)).is_err());
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
    }

    #[test]
    fn permutation_signs() {
        assert_eq!(Permutation::identity(4).sign(), 1);
        assert_eq!(Permutation::transposition(4, 1, 3).sign(), -1);
        assert_eq!(Permutation::new(vec![1, 2, 0]).unwrap().sign(), 1);
        let all = Permutation::all(4);
        assert_eq!(all.len(), 24);
        assert_eq!(all.iter().map(|p| p.sign()).sum::<i32>(), 0);
    }

    #[test]
    fn unfold_shape_and_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = Tensor::<C64>::gaussian(&[2, 3, 4], &mut rng).unwrap();
        let m = t.unfold(0).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (2, 12));
        for k in 0..3 {
            let back = Tensor::fold(&t.unfold(k).unwrap(), k, t.shape()).unwrap();
            assert_eq!(back, t);
        }
        assert!(matches!(t.unfold(3), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    #[allow(clippy::identity_op)]
    fn unfold_column_order_is_documented_bijection() {
        let t =
            Tensor::<f64>::from_fn(&[2, 3, 4], |i| (100 * i[0] + 10 * i[1] + i[2]) as f64).unwrap();
        let m = t.unfold(1).unwrap();
        // column p = i0 * 4 + i2
        assert_eq!(m[(2, 1 * 4 + 3)], 123.0);
        let m2 = t.unfold(2).unwrap();
        assert_eq!(m2[(3, 1 * 3 + 2)], 123.0);
    }

    #[test]
    fn rank_one_unfoldings_have_rank_one() {
        let t = Tensor::outer_vectors(&[&[1.0, 2.0], &[0.5, -1.0, 3.0], &[1.0, 1.0, 0.0, 2.0]])
            .unwrap();
        for k in 0..3 {
            assert_eq!(numerical_rank(&t.unfold(k).unwrap(), DEFAULT_RANK_TOL), 1);
        }
    }

    #[test]
    fn mrank_examples() {
        let z = Tensor::<f64>::zeros(&[2, 3, 2]).unwrap();
        assert_eq!(z.mrank(DEFAULT_RANK_TOL).unwrap().ranks, vec![0, 0, 0]);
        assert!(matches!(z.mrank(1.5), Err(Error::InvalidTolerance(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let parts: Vec<Tensor<f64>> = (0..6)
            .map(|_| Tensor::gaussian(&[3], &mut rng).unwrap())
            .collect();
        let r1 = Tensor::outer(&[&parts[0], &parts[1], &parts[2]]).unwrap();
        assert_eq!(r1.mrank(DEFAULT_RANK_TOL).unwrap().ranks, vec![1, 1, 1]);
        let r2 = r1
            .add(&Tensor::outer(&[&parts[3], &parts[4], &parts[5]]).unwrap())
            .unwrap();
        assert_eq!(r2.mrank(DEFAULT_RANK_TOL).unwrap().ranks, vec![2, 2, 2]);
    }

    #[test]
    fn mode_product_identity_and_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = Tensor::<f64>::gaussian(&[2, 3, 4], &mut rng).unwrap();
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(t.mode_product(&id, 1).unwrap().max_abs_diff(&t).unwrap() < 1e-15);
        let m = DMatrix::<f64>::from_element(5, 4, 1.0);
        assert_eq!(t.mode_product(&m, 2).unwrap().shape(), &[2, 3, 5]);
    }

    #[test]
    fn tensor_validation() {
        assert!(matches!(
            Tensor::<f64>::new(vec![], vec![]),
            Err(Error::InvalidShape(_))
        ));
        assert!(matches!(
            Tensor::<f64>::new(vec![2, 0], vec![]),
            Err(Error::InvalidShape(_))
        ));
        assert!(matches!(
            Tensor::<f64>::new(vec![2], vec![1.0]),
            Err(Error::InvalidShape(_))
        ));
        assert!(matches!(
            Tensor::<f64>::new(vec![2], vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
        assert!(matches!(
            Tensor::<f64>::zeros(&[usize::MAX, 2]),
            Err(Error::InvalidShape(_))
        ));
    }
}
