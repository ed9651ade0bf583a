//! JSON file formats.
//!
//! Tensor: `{"shape":[n1,…,nd], "field":"real"|"complex", "data":[…]}` with
//! `data` flat in row-major order; real entries are numbers, complex entries
//! are `[re, im]` pairs.
//!
//! Mask / sparsity pattern: `{"indices":[[i1,…,id], …]}` with 1-based
//! indices.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mask::Mask;
use crate::scalar::{FieldTag, Scalar, C64};
use crate::tensor::{Hypermatrix, Tensor};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawEntry {
    Number(f64),
    Pair([f64; 2]),
}

pub fn decode_entries<S: Scalar>(entries: &[RawEntry]) -> Result<Vec<S>> {
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let value = match (S::FIELD, e) {
                (FieldTag::Real, RawEntry::Number(x)) => S::from_parts(*x, 0.0),
                (FieldTag::Complex, RawEntry::Pair([re, im])) => S::from_parts(*re, *im),
                (FieldTag::Real, RawEntry::Pair(_)) => {
                    return Err(Error::Parse(format!(
                        "entry {i}: real data must be plain numbers"
                    )))
                }
                (FieldTag::Complex, RawEntry::Number(_)) => {
                    return Err(Error::Parse(format!(
                        "entry {i}: complex data must be [re, im] pairs"
                    )))
                }
            };
            match value {
                Some(v) if v.finite() => Ok(v),
                _ => Err(Error::NonFinite(i)),
            }
        })
        .collect()
}

pub fn encode_entries<S: Scalar>(data: &[S]) -> Vec<Value> {
    data.iter()
        .map(|&x| match S::FIELD {
            FieldTag::Real => json!(x.parts().0),
            FieldTag::Complex => {
                let (re, im) = x.parts();
                json!([re, im])
            }
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTensor {
    shape: Vec<usize>,
    field: FieldTag,
    data: Vec<RawEntry>,
}

fn tensor_from_raw(raw: RawTensor) -> Result<Hypermatrix> {
    Ok(match raw.field {
        FieldTag::Real => {
            Hypermatrix::Real(Tensor::new(raw.shape, decode_entries::<f64>(&raw.data)?)?)
        }
        FieldTag::Complex => {
            Hypermatrix::Complex(Tensor::new(raw.shape, decode_entries::<C64>(&raw.data)?)?)
        }
    })
}

pub fn parse_tensor(text: &str) -> Result<Hypermatrix> {
    tensor_from_raw(serde_json::from_str(text)?)
}

pub fn parse_tensor_value(value: Value) -> Result<Hypermatrix> {
    tensor_from_raw(serde_json::from_value(value)?)
}

pub fn tensor_to_json<S: Scalar>(t: &Tensor<S>) -> Value {
    json!({
        "shape": t.shape(),
        "field": S::FIELD,
        "data": encode_entries(t.data()),
    })
}

pub fn hypermatrix_to_json(h: &Hypermatrix) -> Value {
    match h {
        Hypermatrix::Real(t) => tensor_to_json(t),
        Hypermatrix::Complex(t) => tensor_to_json(t),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMask {
    indices: Vec<Vec<usize>>,
}

/// Parses a 1-based index list against a known tensor shape.
pub fn parse_mask(text: &str, shape: &[usize]) -> Result<Mask> {
    let raw: RawMask = serde_json::from_str(text)?;
    let zero_based = raw
        .indices
        .into_iter()
        .map(|idx| {
            idx.into_iter()
                .map(|i| {
                    i.checked_sub(1)
                        .ok_or_else(|| Error::InvalidMask("indices are 1-based".into()))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Mask::new(shape, &zero_based)
}

pub fn mask_to_json(mask: &Mask) -> Value {
    let one_based: Vec<Vec<usize>> = mask
        .indices()
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| i + 1).collect())
        .collect();
    json!({ "indices": one_based })
}
