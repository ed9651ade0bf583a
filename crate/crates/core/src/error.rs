use thiserror::Error;

use crate::scalar::FieldTag;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch { expected: FieldTag, found: FieldTag },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("all modes must have equal dimension, got {0:?}")]
    UnequalModes(Vec<usize>),

    #[error("order {order} exceeds the supported maximum {max} for permutation sums")]
    OrderTooLarge { order: usize, max: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("mode {mode} out of range for order {order}")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("invalid tolerance {0}: must lie in (0, 1)")]
    InvalidTolerance(f64),

    #[error("layout mismatch: {0}")]
    Layout(String),

    #[error("vectors are linearly dependent")]
    DependentVectors,

    #[error("expected a 2x2x2 tensor, got shape {0:?}")]
    Not2x2x2(Vec<usize>),

    #[error("invalid rank {0}: must be at least 1")]
    InvalidRank(usize),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("invalid solver option: {0}")]
    InvalidOption(String),

    #[error("invalid block spec: {0}")]
    InvalidBlockSpec(String),

    #[error("input is not symmetric: relative deviation {0:.3e}")]
    NotSymmetric(f64),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable kind, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::FieldMismatch { .. } => "field_mismatch",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::InvalidShape(_) => "invalid_shape",
            Error::NonFinite(_) => "non_finite",
            Error::Empty(_) => "empty",
            Error::UnequalModes(_) => "unequal_modes",
            Error::OrderTooLarge { .. } => "order_too_large",
            Error::InvalidPermutation(_) => "invalid_permutation",
            Error::ModeOutOfRange { .. } => "mode_out_of_range",
            Error::InvalidTolerance(_) => "invalid_tolerance",
            Error::Layout(_) => "layout_mismatch",
            Error::DependentVectors => "dependent_vectors",
            Error::Not2x2x2(_) => "not_2x2x2",
            Error::InvalidRank(_) => "invalid_rank",
            Error::InvalidMask(_) => "invalid_mask",
            Error::InvalidOption(_) => "invalid_option",
            Error::InvalidBlockSpec(_) => "invalid_block_spec",
            Error::NotSymmetric(_) => "not_symmetric",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Parse(_) => "parse",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}
