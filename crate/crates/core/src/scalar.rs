//! Scalar fields supported by the crate.
//!
//! Every tensor is typed by its field. Real tensors are never silently
//! promoted to complex ones; [`crate::Tensor::promote`] is the only route.

use std::fmt;

use nalgebra::{Complex, ComplexField};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTag::Real => f.write_str("real"),
            FieldTag::Complex => f.write_str("complex"),
        }
    }
}

/// A scalar of ℝ or ℂ, backed by `f64` or `Complex<f64>`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Default + PartialEq + Send + Sync + fmt::Debug + 'static
{
    const FIELD: FieldTag;

    /// Standard Gaussian draw. Complex draws have independent N(0,1) real and
    /// imaginary parts.
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Builds a scalar from (re, im). Returns `None` for a real scalar with
    /// a nonzero imaginary part.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    fn parts(self) -> (f64, f64);

    fn to_c64(self) -> C64 {
        let (re, im) = self.parts();
        C64::new(re, im)
    }

    fn abs2(self) -> f64 {
        self.modulus_squared()
    }

    fn finite(self) -> bool {
        let (re, im) = self.parts();
        re.is_finite() && im.is_finite()
    }
}

impl Scalar for f64 {
    const FIELD: FieldTag = FieldTag::Real;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }

    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }
}

impl Scalar for C64 {
    const FIELD: FieldTag = FieldTag::Complex;

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    }

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(C64::new(re, im))
    }

    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn real_rejects_imaginary_part() {
        assert_eq!(f64::from_parts(1.5, 0.0), Some(1.5));
        assert_eq!(f64::from_parts(1.5, 1e-300), None);
        assert_eq!(C64::from_parts(1.0, 2.0), Some(C64::new(1.0, 2.0)));
    }

    #[test]
    fn complex_gaussian_has_both_parts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = C64::gaussian(&mut rng);
        assert!(z.re != 0.0 && z.im != 0.0);
        assert_eq!(<C64 as Scalar>::FIELD, FieldTag::Complex);
    }
}
