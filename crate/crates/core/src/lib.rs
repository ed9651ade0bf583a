//! Tensor approximation lab over ℝ and ℂ.
//!
//! * [`tensor`]: dense hypermatrices, symmetric/alternating projectors,
//!   unfoldings and multilinear rank.
//! * [`varieties`]: points and tangent vectors of Segre, Veronese, Chow,
//!   Grassmann varieties and their compositions.
//! * [`witness`]: the 2×2×2 rank-3 normal forms, Cayley's hyperdeterminant
//!   and a real/complex rank classifier.
//! * [`solvers`]: alternating least squares for best rank-r, symmetric,
//!   completion, sparse-plus-low-rank and block-term approximation, with
//!   diagnostics that expose non-attainment.
//! * [`experiment`]: seeded Monte Carlo experiments writing CSV/JSON tables.

pub mod error;
pub mod experiment;
pub mod io;
pub mod mask;
pub mod scalar;
pub mod solvers;
pub mod tensor;
pub mod varieties;
pub mod witness;

pub use error::{Error, Result};
pub use mask::Mask;
pub use scalar::{FieldTag, Scalar, C64};
pub use tensor::{Hypermatrix, MultilinearRank, Permutation, Tensor};
