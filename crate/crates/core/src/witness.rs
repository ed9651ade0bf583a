//! The 2×2×2 case study: the two real rank-3 normal forms, Cayley's
//! hyperdeterminant, and a field-aware rank classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{FieldTag, Scalar};
use crate::tensor::{numerical_rank, Hypermatrix, MultilinearRank, Tensor, DEFAULT_RANK_TOL};

/// `|Δ| ≤ DELTA_ZERO_TOL · ‖A‖⁴` is treated as `Δ = 0`.
pub const DELTA_ZERO_TOL: f64 = 1e-10;

fn check_pair<S: Scalar>(f0: &[S], f1: &[S]) -> Result<()> {
    if f0.len() != 2 || f1.len() != 2 {
        return Err(Error::Layout(
            "witness generators take vectors of length 2".into(),
        ));
    }
    let m = nalgebra::DMatrix::from_fn(2, 2, |r, c| if c == 0 { f0[r] } else { f1[r] });
    if numerical_rank(&m, DEFAULT_RANK_TOL) < 2 {
        return Err(Error::DependentVectors);
    }
    Ok(())
}

fn sum_of_outer<S: Scalar>(terms: &[[&[S]; 3]]) -> Result<Tensor<S>> {
    let mut acc = Tensor::zeros(&[2, 2, 2])?;
    for t in terms {
        acc.axpy(S::one(), &Tensor::outer_vectors(t)?)?;
    }
    Ok(acc)
}

/// `f1⊗f0⊗f0 + f0⊗f1⊗f0 + f0⊗f0⊗f1`: rank 3 over both ℝ and ℂ, border
/// rank 2.
pub fn dsl_tangent_witness<S: Scalar>(f0: &[S], f1: &[S]) -> Result<Tensor<S>> {
    check_pair(f0, f1)?;
    sum_of_outer(&[[f1, f0, f0], [f0, f1, f0], [f0, f0, f1]])
}

/// `(f0+f1)⊗f1⊗f1 + (f0−f1)⊗f0⊗f0 + f1⊗(f0+f1)⊗(f0−f1)`: real rank 3,
/// complex rank 2, in the open set where Δ < 0.
pub fn dsl_open_witness(f0: &[f64], f1: &[f64]) -> Result<Tensor<f64>> {
    check_pair(f0, f1)?;
    let plus: Vec<f64> = f0.iter().zip(f1).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = f0.iter().zip(f1).map(|(a, b)| a - b).collect();
    sum_of_outer(&[[&plus, f1, f1], [&minus, f0, f0], [f1, &plus, &minus]])
}

/// Cayley's hyperdeterminant of a 2×2×2 tensor, entries `a_{ijk}` at flat
/// position `4i + 2j + k`:
///
/// ```text
/// Δ = a000²a111² + a001²a110² + a010²a101² + a100²a011²
///   − 2(a000a001a110a111 + a000a010a101a111 + a000a100a011a111
///     + a001a010a101a110 + a001a100a011a110 + a010a100a011a101)
///   + 4(a000a011a101a110 + a001a010a100a111)
/// ```
pub fn hyperdeterminant<S: Scalar>(a: &Tensor<S>) -> Result<S> {
    if a.shape() != [2, 2, 2] {
        return Err(Error::Not2x2x2(a.shape().to_vec()));
    }
    let x = a.data();
    let (a000, a001, a010, a011) = (x[0], x[1], x[2], x[3]);
    let (a100, a101, a110, a111) = (x[4], x[5], x[6], x[7]);
    let two = S::from_real(2.0);
    let four = S::from_real(4.0);
    let squares = a000 * a000 * a111 * a111
        + a001 * a001 * a110 * a110
        + a010 * a010 * a101 * a101
        + a100 * a100 * a011 * a011;
    let pairs = a000 * a001 * a110 * a111
        + a000 * a010 * a101 * a111
        + a000 * a100 * a011 * a111
        + a001 * a010 * a101 * a110
        + a001 * a100 * a011 * a110
        + a010 * a100 * a011 * a101;
    let quads = a000 * a011 * a101 * a110 + a001 * a010 * a100 * a111;
    Ok(squares - two * pairs + four * quads)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaValue {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSign {
    Positive,
    Negative,
    Zero,
    /// Complex input with `Δ ≠ 0`.
    Nonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub shape: [usize; 3],
    pub field: FieldTag,
    pub delta: DeltaValue,
    pub delta_sign: DeltaSign,
    pub mrank: MultilinearRank,
    /// `None` for complex input.
    pub real_rank: Option<u8>,
    pub complex_rank: u8,
    pub border_rank: u8,
}

/// Classifies real/complex rank and complex border rank of a 2×2×2 tensor.
///
/// Tensors whose multilinear rank contains a 0 or 1 are flattenings of a
/// matrix (or a vector), so their rank is the largest multilinear rank
/// entry over either field. Among tensors of multilinear rank (2,2,2):
///
/// | Δ | real rank | complex rank | border rank |
/// |---|---|---|---|
/// | > 0 | 2 | 2 | 2 |
/// | < 0 | 3 | 2 | 2 |
/// | 0 | 3 | 3 | 2 |
pub fn classify_2x2x2<S: Scalar>(a: &Tensor<S>) -> Result<RankCertificate> {
    let delta = hyperdeterminant(a)?;
    let mrank = a.mrank(DEFAULT_RANK_TOL)?;
    let norm = a.norm();
    let zero = delta.modulus() <= DELTA_ZERO_TOL * norm.powi(4);
    let (re, im) = delta.parts();
    let (delta_value, delta_sign) = match S::FIELD {
        FieldTag::Real => (
            DeltaValue::Real(re),
            if zero {
                DeltaSign::Zero
            } else if re > 0.0 {
                DeltaSign::Positive
            } else {
                DeltaSign::Negative
            },
        ),
        FieldTag::Complex => (
            DeltaValue::Complex([re, im]),
            if zero {
                DeltaSign::Zero
            } else {
                DeltaSign::Nonzero
            },
        ),
    };

    let max_mrank = *mrank.ranks.iter().max().unwrap_or(&0) as u8;
    let degenerate = mrank.ranks.iter().any(|&r| r < 2);
    let (real_rank, complex_rank, border_rank) = if degenerate {
        (max_mrank, max_mrank, max_mrank)
    } else {
        match delta_sign {
            DeltaSign::Positive | DeltaSign::Nonzero => (2, 2, 2),
            DeltaSign::Negative => (3, 2, 2),
            DeltaSign::Zero => (3, 3, 2),
        }
    };
    Ok(RankCertificate {
        shape: [2, 2, 2],
        field: S::FIELD,
        delta: delta_value,
        delta_sign,
        mrank,
        real_rank: (S::FIELD == FieldTag::Real).then_some(real_rank),
        complex_rank,
        border_rank,
    })
}

pub fn classify_hypermatrix(h: &Hypermatrix) -> Result<RankCertificate> {
    match h {
        Hypermatrix::Real(t) => classify_2x2x2(t),
        Hypermatrix::Complex(t) => classify_2x2x2(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C64;

    const E1: [f64; 2] = [1.0, 0.0];
    const E2: [f64; 2] = [0.0, 1.0];

    /// Independent route: Δ is the discriminant of the binary quadratic
    /// form `det(x·A_0 + y·A_1)` built from the two mode-1 slices.
    fn pencil_discriminant(x: &[f64]) -> f64 {
        let (p, q) = (&x[0..4], &x[4..8]);
        // det([[p0 x + q0 y, p1 x + q1 y], [p2 x + q2 y, p3 x + q3 y]])
        let a = p[0] * p[3] - p[1] * p[2];
        let c = q[0] * q[3] - q[1] * q[2];
        let b = p[0] * q[3] + q[0] * p[3] - p[1] * q[2] - q[1] * p[2];
        b * b - 4.0 * a * c
    }

    #[test]
    fn tangent_witness_entries() {
        let t = dsl_tangent_witness(&E1, &E2).unwrap();
        assert_eq!(t.data(), &[0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(hyperdeterminant(&t).unwrap(), 0.0);
    }

    #[test]
    fn open_witness_slices() {
        let t = dsl_open_witness(&E1, &E2).unwrap();
        // slice i=1: [[1,0],[0,1]]; slice i=2: [[0,-1],[1,0]]
        assert_eq!(t.data(), &[1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0]);
        let delta = hyperdeterminant(&t).unwrap();
        assert_eq!(delta, pencil_discriminant(t.data()));
        assert_eq!(delta, -4.0);
    }

    #[test]
    fn generators_reject_dependent_inputs() {
        assert!(matches!(
            dsl_tangent_witness(&E1, &[2.0, 0.0]),
            Err(Error::DependentVectors)
        ));
        assert!(matches!(
            dsl_open_witness(&E1, &E1),
            Err(Error::DependentVectors)
        ));
    }

    #[test]
    fn diagonal_tensor_has_positive_delta() {
        let mut x = [0.0; 8];
        x[0] = 1.0;
        x[7] = 1.0;
        let t = Tensor::new(vec![2, 2, 2], x.to_vec()).unwrap();
        assert_eq!(pencil_discriminant(&x), 1.0);
        assert_eq!(hyperdeterminant(&t).unwrap(), 1.0);
    }

    #[test]
    fn rank_one_has_zero_delta() {
        let t = Tensor::outer_vectors(&[&[1.0, 2.0], &[-0.5, 3.0], &[2.0, 1.0]]).unwrap();
        assert!(hyperdeterminant(&t).unwrap().abs() < 1e-12);
        let c = classify_2x2x2(&t).unwrap();
        assert_eq!(
            (c.real_rank, c.complex_rank, c.border_rank),
            (Some(1), 1, 1)
        );
    }

    #[test]
    fn hyperdeterminant_matches_pencil_oracle_on_fixed_entries() {
        let x = [0.3, -1.1, 2.0, 0.7, -0.4, 1.9, 0.05, -2.2];
        let t = Tensor::new(vec![2, 2, 2], x.to_vec()).unwrap();
        let d = hyperdeterminant(&t).unwrap();
        assert!((d - pencil_discriminant(&x)).abs() < 1e-12);
    }

    #[test]
    fn wrong_shape_rejected() {
        let t = Tensor::<f64>::zeros(&[2, 2]).unwrap();
        assert!(matches!(hyperdeterminant(&t), Err(Error::Not2x2x2(_))));
        assert!(classify_2x2x2(&t).is_err());
    }

    #[test]
    fn classifier_examples() {
        let z = Tensor::<f64>::zeros(&[2, 2, 2]).unwrap();
        let c = classify_2x2x2(&z).unwrap();
        assert_eq!(
            (c.real_rank, c.complex_rank, c.border_rank),
            (Some(0), 0, 0)
        );

        let w = dsl_tangent_witness(&E1, &E2).unwrap();
        let c = classify_2x2x2(&w).unwrap();
        assert_eq!(
            (c.real_rank, c.complex_rank, c.border_rank),
            (Some(3), 3, 2)
        );
        assert_eq!(c.delta_sign, DeltaSign::Zero);

        let o = dsl_open_witness(&E1, &E2).unwrap();
        let c = classify_2x2x2(&o).unwrap();
        assert_eq!(
            (c.real_rank, c.complex_rank, c.border_rank),
            (Some(3), 2, 2)
        );

        let c = classify_2x2x2(&o.promote()).unwrap();
        assert_eq!((c.real_rank, c.complex_rank, c.border_rank), (None, 2, 2));
        assert_eq!(c.delta, DeltaValue::Complex([-4.0, 0.0]));
    }

    #[test]
    fn matrix_flattenings_use_matrix_rank() {
        // e1 ⊗ I has mrank (1,2,2) and rank 2
        let t = Tensor::new(vec![2, 2, 2], vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let c = classify_2x2x2(&t).unwrap();
        assert_eq!(c.mrank.ranks, vec![1, 2, 2]);
        assert_eq!(
            (c.real_rank, c.complex_rank, c.border_rank),
            (Some(2), 2, 2)
        );
    }

    #[test]
    fn complex_tangent_witness_classifies_rank_three() {
        let f0 = [C64::new(1.0, 0.5), C64::new(0.0, 1.0)];
        let f1 = [C64::new(-0.3, 0.0), C64::new(2.0, -1.0)];
        let t = dsl_tangent_witness(&f0, &f1).unwrap();
        let c = classify_2x2x2(&t).unwrap();
        assert_eq!((c.complex_rank, c.border_rank), (3, 2));
    }
}
