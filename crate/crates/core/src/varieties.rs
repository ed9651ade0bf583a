//! Points and tangent vectors of Segre, Veronese, Chow and Grassmann
//! varieties and their compositions.
//!
//! Every variety point is described as a list of groups. Group `i` holds
//! `arity` vectors combined by the symmetric product `∘` or the
//! alternating product `∧`, and that group product is raised to an outer
//! tensor power `power`:
//!
//! ```text
//! (v_{1,1} * ⋯ * v_{k_1,1})^{⊗p_1} ⊗ ⋯ ⊗ (v_{1,m} * ⋯ * v_{k_m,m})^{⊗p_m}
//! ```
//!
//! | variety | groups |
//! |---|---|
//! | Segre | `d` groups, arity 1, power 1 |
//! | Veronese | 1 group, arity 1, power `d` |
//! | Chow | 1 `∘` group, arity `d`, power 1 |
//! | Grassmann | 1 `∧` group, arity `k`, power 1 |
//! | Segre–Veronese | `m` groups, arity 1, powers `d_i` |
//! | Segre–Chow / Segre–Grassmann | `m` `∘` / `∧` groups, power 1 |
//! | Veronese–Chow / Veronese–Grassmann | 1 `∘` / `∧` group with power > 1 |
//! | Segre–Veronese–Chow / –Grassmann | `m` `∘` / `∧` groups with powers |
//!
//! Points live in the full tensor power space `V^{⊗D}`, `D = Σ arity·power`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{decode_entries, RawEntry};
use crate::scalar::{FieldTag, Scalar, C64};
use crate::tensor::{numerical_rank, Hypermatrix, Tensor, DEFAULT_RANK_TOL, MAX_SYMMETRIZE_ORDER};

/// Upper bound on the number of entries of a structured tensor.
pub const MAX_STRUCTURED_LEN: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupOp {
    Sym,
    Alt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Group {
    pub op: GroupOp,
    pub arity: usize,
    pub power: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredSpec {
    pub ambient_dim: usize,
    pub groups: Vec<Group>,
}

impl StructuredSpec {
    pub fn new(ambient_dim: usize, groups: Vec<Group>) -> Result<Self> {
        let spec = Self {
            ambient_dim,
            groups,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn group(op: GroupOp, arity: usize, power: usize) -> Group {
        Group { op, arity, power }
    }

    pub fn segre(n: usize, d: usize) -> Result<Self> {
        Self::new(n, vec![Self::group(GroupOp::Sym, 1, 1); d])
    }

    pub fn veronese(n: usize, d: usize) -> Result<Self> {
        Self::new(n, vec![Self::group(GroupOp::Sym, 1, d)])
    }

    pub fn chow(n: usize, d: usize) -> Result<Self> {
        Self::new(n, vec![Self::group(GroupOp::Sym, d, 1)])
    }

    pub fn grassmann(n: usize, k: usize) -> Result<Self> {
        Self::new(n, vec![Self::group(GroupOp::Alt, k, 1)])
    }

    pub fn segre_veronese(n: usize, powers: &[usize]) -> Result<Self> {
        Self::new(
            n,
            powers
                .iter()
                .map(|&d| Self::group(GroupOp::Sym, 1, d))
                .collect(),
        )
    }

    pub fn segre_chow(n: usize, arities: &[usize]) -> Result<Self> {
        Self::new(
            n,
            arities
                .iter()
                .map(|&d| Self::group(GroupOp::Sym, d, 1))
                .collect(),
        )
    }

    pub fn segre_grassmann(n: usize, arities: &[usize]) -> Result<Self> {
        Self::new(
            n,
            arities
                .iter()
                .map(|&k| Self::group(GroupOp::Alt, k, 1))
                .collect(),
        )
    }

    /// `(v_1 ∘ ⋯ ∘ v_d)^{⊗k}`.
    pub fn veronese_chow(n: usize, d: usize, k: usize) -> Result<Self> {
        Self::new(n, vec![Self::group(GroupOp::Sym, d, k)])
    }

    /// `(v_1 ∧ ⋯ ∧ v_k)^{⊗d}`.
    pub fn veronese_grassmann(n: usize, k: usize, d: usize) -> Result<Self> {
        Self::new(n, vec![Self::group(GroupOp::Alt, k, d)])
    }

    /// Groups given as `(arity d_i, power k_i)`.
    pub fn segre_veronese_chow(n: usize, groups: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            n,
            groups
                .iter()
                .map(|&(d, k)| Self::group(GroupOp::Sym, d, k))
                .collect(),
        )
    }

    /// Groups given as `(arity k_i, power d_i)`.
    pub fn segre_veronese_grassmann(n: usize, groups: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            n,
            groups
                .iter()
                .map(|&(k, d)| Self::group(GroupOp::Alt, k, d))
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim == 0 {
            return Err(Error::Layout("ambient dimension must be positive".into()));
        }
        if self.groups.is_empty() {
            return Err(Error::Layout("at least one group is required".into()));
        }
        for (i, g) in self.groups.iter().enumerate() {
            if g.arity == 0 || g.power == 0 {
                return Err(Error::Layout(format!(
                    "group {i}: arity and power must be at least 1"
                )));
            }
            if g.arity > MAX_SYMMETRIZE_ORDER {
                return Err(Error::OrderTooLarge {
                    order: g.arity,
                    max: MAX_SYMMETRIZE_ORDER,
                });
            }
            if g.op == GroupOp::Alt && g.arity > self.ambient_dim {
                return Err(Error::Layout(format!(
                    "group {i}: alternating product of {} vectors in dimension {}",
                    g.arity, self.ambient_dim
                )));
            }
        }
        let order = self.order();
        let len = (0..order).try_fold(1usize, |acc, _| acc.checked_mul(self.ambient_dim));
        match len {
            Some(l) if l <= MAX_STRUCTURED_LEN => Ok(()),
            _ => Err(Error::InvalidShape(format!(
                "structured tensor of order {order} in dimension {} is too large",
                self.ambient_dim
            ))),
        }
    }

    /// Total tensor order `Σ arity · power`.
    pub fn order(&self) -> usize {
        self.groups
            .iter()
            .map(|g| g.arity.saturating_mul(g.power))
            .fold(0usize, |a, b| a.saturating_add(b))
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.ambient_dim; self.order()]
    }

    pub fn kind(&self) -> VarietyKind {
        let m = self.groups.len();
        let any_power = self.groups.iter().any(|g| g.power > 1);
        if self.groups.iter().all(|g| g.arity == 1) {
            return match (m, any_power) {
                (1, true) => VarietyKind::Veronese,
                (_, false) => VarietyKind::Segre,
                (_, true) => VarietyKind::SegreVeronese,
            };
        }
        // arity-1 groups are compatible with either product
        let has_sym = self
            .groups
            .iter()
            .any(|g| g.arity > 1 && g.op == GroupOp::Sym);
        let has_alt = self
            .groups
            .iter()
            .any(|g| g.arity > 1 && g.op == GroupOp::Alt);
        match (has_sym, has_alt, m == 1, any_power) {
            (true, true, ..) => VarietyKind::Mixed,
            (true, false, true, false) => VarietyKind::Chow,
            (true, false, true, true) => VarietyKind::VeroneseChow,
            (true, false, false, false) => VarietyKind::SegreChow,
            (true, false, false, true) => VarietyKind::SegreVeroneseChow,
            (false, true, true, false) => VarietyKind::Grassmann,
            (false, true, true, true) => VarietyKind::VeroneseGrassmann,
            (false, true, false, false) => VarietyKind::SegreGrassmann,
            (false, true, false, true) => VarietyKind::SegreVeroneseGrassmann,
            (false, false, ..) => unreachable!("some group has arity > 1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarietyKind {
    Segre,
    Veronese,
    Chow,
    Grassmann,
    SegreVeronese,
    SegreChow,
    SegreGrassmann,
    VeroneseChow,
    VeroneseGrassmann,
    SegreVeroneseChow,
    SegreVeroneseGrassmann,
    /// Both `∘` and `∧` groups of arity > 1; no sufficient condition known.
    Mixed,
}

/// Base vectors `v_{j,i}` and perturbations `w_{j,i}`, indexed
/// `[group][slot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentWitness<S: Scalar> {
    pub spec: StructuredSpec,
    pub base: Vec<Vec<Vec<S>>>,
    pub perturb: Vec<Vec<Vec<S>>>,
}

fn check_layout<S: Scalar>(
    spec: &StructuredSpec,
    vectors: &[Vec<Vec<S>>],
    what: &str,
) -> Result<()> {
    spec.validate()?;
    if vectors.len() != spec.groups.len() {
        return Err(Error::Layout(format!(
            "{what}: {} groups given, spec has {}",
            vectors.len(),
            spec.groups.len()
        )));
    }
    for (i, (g, vs)) in spec.groups.iter().zip(vectors).enumerate() {
        if vs.len() != g.arity {
            return Err(Error::Layout(format!(
                "{what}: group {i} has {} vectors, arity is {}",
                vs.len(),
                g.arity
            )));
        }
        if let Some(v) = vs.iter().find(|v| v.len() != spec.ambient_dim) {
            return Err(Error::Layout(format!(
                "{what}: group {i} has a vector of length {}, ambient dimension is {}",
                v.len(),
                spec.ambient_dim
            )));
        }
        if vs.iter().flatten().any(|x| !x.finite()) {
            return Err(Error::Layout(format!(
                "{what}: group {i} has a non-finite entry"
            )));
        }
    }
    Ok(())
}

impl<S: Scalar> TangentWitness<S> {
    pub fn new(
        spec: StructuredSpec,
        base: Vec<Vec<Vec<S>>>,
        perturb: Vec<Vec<Vec<S>>>,
    ) -> Result<Self> {
        let w = Self {
            spec,
            base,
            perturb,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        check_layout(&self.spec, &self.base, "base")?;
        check_layout(&self.spec, &self.perturb, "perturb")
    }

    /// Base vectors moved to `v + t·w`.
    pub fn shifted_base(&self, t: S) -> Vec<Vec<Vec<S>>> {
        self.base
            .iter()
            .zip(&self.perturb)
            .map(|(vg, wg)| {
                vg.iter()
                    .zip(wg)
                    .map(|(v, w)| v.iter().zip(w).map(|(&a, &b)| a + t * b).collect())
                    .collect()
            })
            .collect()
    }
}

/// `v_1 ∘ ⋯ ∘ v_k` or `v_1 ∧ ⋯ ∧ v_k` (each with the `1/k!` coefficient).
pub fn group_product<S: Scalar>(op: GroupOp, vectors: &[Vec<S>]) -> Result<Tensor<S>> {
    let refs: Vec<&[S]> = vectors.iter().map(|v| v.as_slice()).collect();
    let t = Tensor::outer_vectors(&refs)?;
    if vectors.len() == 1 {
        return Ok(t);
    }
    match op {
        GroupOp::Sym => t.symmetrize(),
        GroupOp::Alt => t.alternate(),
    }
}

fn tensor_power<S: Scalar>(g: &Tensor<S>, p: usize) -> Result<Tensor<S>> {
    Tensor::outer(&vec![g; p])
}

/// `g_1^{⊗p_1} ⊗ ⋯ ⊗ g_m^{⊗p_m}` with `g_i` the group products of `base`.
pub fn structured_point<S: Scalar>(
    spec: &StructuredSpec,
    base: &[Vec<Vec<S>>],
) -> Result<Tensor<S>> {
    check_layout(spec, base, "base")?;
    let powers = spec
        .groups
        .iter()
        .zip(base)
        .map(|(g, vs)| tensor_power(&group_product(g.op, vs)?, g.power))
        .collect::<Result<Vec<_>>>()?;
    Tensor::outer(&powers.iter().collect::<Vec<_>>())
}

/// Derivative at `t = 0` of `t ↦ structured_point(spec, v + t·w)`.
///
/// Product rule, group by group: the group product is multilinear, so its
/// derivative is `Σ_j (v_1 * ⋯ * w_j * ⋯ * v_k)`; the tensor power
/// contributes one term per position of the differentiated factor. Summed
/// over positions this equals `p · g^{∘(p-1)} ∘ g'` (symmetrizing over the
/// `p` block positions), i.e. the tangent normal form scaled by the power.
pub fn structured_tangent<S: Scalar>(w: &TangentWitness<S>) -> Result<Tensor<S>> {
    w.validate()?;
    let spec = &w.spec;
    let products: Vec<Tensor<S>> = spec
        .groups
        .iter()
        .zip(&w.base)
        .map(|(g, vs)| group_product(g.op, vs))
        .collect::<Result<_>>()?;
    let powers: Vec<Tensor<S>> = spec
        .groups
        .iter()
        .zip(&products)
        .map(|(g, p)| tensor_power(p, g.power))
        .collect::<Result<_>>()?;

    let mut total = Tensor::zeros(&spec.shape())?;
    for (i, g) in spec.groups.iter().enumerate() {
        // derivative of the group product
        let mut deriv = Tensor::zeros(&vec![spec.ambient_dim; g.arity])?;
        for j in 0..g.arity {
            let mut slots = w.base[i].clone();
            slots[j] = w.perturb[i][j].clone();
            deriv.axpy(S::one(), &group_product(g.op, &slots)?)?;
        }
        // derivative of the tensor power
        let mut power_deriv = Tensor::zeros(&vec![spec.ambient_dim; g.arity * g.power])?;
        for q in 0..g.power {
            let factors: Vec<&Tensor<S>> = (0..g.power)
                .map(|s| if s == q { &deriv } else { &products[i] })
                .collect();
            power_deriv.axpy(S::one(), &Tensor::outer(&factors)?)?;
        }
        let factors: Vec<&Tensor<S>> = (0..spec.groups.len())
            .map(|s| if s == i { &power_deriv } else { &powers[s] })
            .collect();
        total.axpy(S::one(), &Tensor::outer(&factors)?)?;
    }
    Ok(total)
}

/// `(γ(t) − γ(0)) / t` for the curve `γ(t) = structured_point(v + t·w)`.
/// This is a difference of two variety points, hence of rank at most two.
pub fn difference_quotient<S: Scalar>(w: &TangentWitness<S>, t: f64) -> Result<Tensor<S>> {
    let g0 = structured_point(&w.spec, &w.base)?;
    let gt = structured_point(&w.spec, &w.shifted_base(S::from_real(t)))?;
    Ok(gt.sub(&g0)?.scale(S::from_real(1.0 / t)))
}

/// Threshold for projective-class distinctness: `|⟨û, v̂⟩| < 1 − 1e-9`.
pub const DISTINCT_CLASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub kind: VarietyKind,
    pub holds: bool,
    pub reason: String,
    /// Whether the `d, k, m ≥ 3` hypothesis of the rank statement holds for
    /// this spec. The algebraic condition is evaluated regardless.
    pub order_hypothesis: bool,
}

fn independent<S: Scalar>(vectors: &[&Vec<S>]) -> bool {
    let Some(first) = vectors.first() else {
        return true;
    };
    let n = first.len();
    if vectors.len() > n {
        return false;
    }
    let m = nalgebra::DMatrix::from_fn(n, vectors.len(), |r, c| vectors[c][r]);
    numerical_rank(&m, DEFAULT_RANK_TOL) == vectors.len()
}

fn distinct_classes<S: Scalar>(vectors: &[&Vec<S>]) -> std::result::Result<(), String> {
    let norms: Vec<f64> = vectors
        .iter()
        .map(|v| v.iter().map(|x| x.abs2()).sum::<f64>().sqrt())
        .collect();
    if let Some(i) = norms.iter().position(|&n| n == 0.0) {
        return Err(format!("vector {i} is zero and has no projective class"));
    }
    for a in 0..vectors.len() {
        for b in a + 1..vectors.len() {
            let ip = vectors[a]
                .iter()
                .zip(vectors[b])
                .fold(S::zero(), |acc, (&x, &y)| acc + x * y.conjugate())
                .modulus();
            if ip / (norms[a] * norms[b]) >= 1.0 - DISTINCT_CLASS_TOL {
                return Err(format!(
                    "vectors {a} and {b} define the same projective class"
                ));
            }
        }
    }
    Ok(())
}

/// Evaluates the sufficient condition for `brank = 2 < rank` matching the
/// witness' variety.
pub fn sufficient_condition<S: Scalar>(w: &TangentWitness<S>) -> ConditionReport {
    let kind = w.spec.kind();
    let order_hypothesis = order_hypothesis(&w.spec, kind);
    let report = |holds: bool, reason: String| ConditionReport {
        kind,
        holds,
        reason,
        order_hypothesis,
    };
    if let Err(e) = w.validate() {
        return report(false, format!("invalid witness: {e}"));
    }
    let all_vectors = || -> Vec<&Vec<S>> {
        w.base
            .iter()
            .flatten()
            .chain(w.perturb.iter().flatten())
            .collect()
    };

    match kind {
        VarietyKind::Segre | VarietyKind::Veronese => {
            for (i, (v, p)) in w.base.iter().zip(&w.perturb).enumerate() {
                if !independent(&[&v[0], &p[0]]) {
                    return report(
                        false,
                        format!("{{v, w}} of group {i} is linearly dependent"),
                    );
                }
            }
            report(true, "each {v, w} pair is linearly independent".into())
        }
        VarietyKind::Chow
        | VarietyKind::SegreVeronese
        | VarietyKind::SegreChow
        | VarietyKind::VeroneseChow
        | VarietyKind::SegreVeroneseChow => match distinct_classes(&all_vectors()) {
            Ok(()) => report(true, "all projective classes [v], [w] are distinct".into()),
            Err(why) => report(false, why),
        },
        VarietyKind::Grassmann
        | VarietyKind::SegreGrassmann
        | VarietyKind::VeroneseGrassmann
        | VarietyKind::SegreVeroneseGrassmann => {
            for (i, (v, p)) in w.base.iter().zip(&w.perturb).enumerate() {
                let vs: Vec<&Vec<S>> = v.iter().chain(p).collect();
                if !independent(&vs) {
                    return report(
                        false,
                        format!("v_1 ∧ ⋯ ∧ v_k ∧ w_1 ∧ ⋯ ∧ w_k vanishes for group {i}"),
                    );
                }
            }
            report(true, "every group wedge v ∧ w is nonzero".into())
        }
        VarietyKind::Mixed => report(
            false,
            "no sufficient condition is listed for mixed symmetric/alternating compositions".into(),
        ),
    }
}

fn order_hypothesis(spec: &StructuredSpec, kind: VarietyKind) -> bool {
    let m = spec.groups.len();
    let g = spec.groups[0];
    match kind {
        VarietyKind::Segre => m >= 3,
        VarietyKind::Veronese => g.power >= 3,
        VarietyKind::Chow | VarietyKind::Grassmann => g.arity >= 3,
        VarietyKind::VeroneseChow | VarietyKind::VeroneseGrassmann => g.arity >= 3 && g.power >= 3,
        VarietyKind::SegreVeronese
        | VarietyKind::SegreChow
        | VarietyKind::SegreGrassmann
        | VarietyKind::SegreVeroneseChow
        | VarietyKind::SegreVeroneseGrassmann => m >= 3,
        VarietyKind::Mixed => false,
    }
}

/// A witness whose field is fixed by the input file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyWitness {
    Real(TangentWitness<f64>),
    Complex(TangentWitness<C64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWitness {
    field: FieldTag,
    ambient_dim: usize,
    groups: Vec<Group>,
    base: Vec<Vec<Vec<RawEntry>>>,
    perturb: Vec<Vec<Vec<RawEntry>>>,
}

fn decode_layout<S: Scalar>(raw: &[Vec<Vec<RawEntry>>]) -> Result<Vec<Vec<Vec<S>>>> {
    raw.iter()
        .map(|g| g.iter().map(|v| decode_entries::<S>(v)).collect())
        .collect()
}

/// Witness file: `{"field", "ambient_dim", "groups":[{"op":"sym"|"alt",
/// "arity", "power"}], "base":[[v…]…], "perturb":[[w…]…]}`, vectors nested
/// per group and slot.
pub fn parse_witness(text: &str) -> Result<AnyWitness> {
    let raw: RawWitness = serde_json::from_str(text)?;
    let spec = StructuredSpec::new(raw.ambient_dim, raw.groups)?;
    Ok(match raw.field {
        FieldTag::Real => AnyWitness::Real(TangentWitness::new(
            spec,
            decode_layout(&raw.base)?,
            decode_layout(&raw.perturb)?,
        )?),
        FieldTag::Complex => AnyWitness::Complex(TangentWitness::new(
            spec,
            decode_layout(&raw.base)?,
            decode_layout(&raw.perturb)?,
        )?),
    })
}

impl AnyWitness {
    pub fn tangent(&self) -> Result<Hypermatrix> {
        Ok(match self {
            AnyWitness::Real(w) => structured_tangent(w)?.into(),
            AnyWitness::Complex(w) => structured_tangent(w)?.into(),
        })
    }

    pub fn point(&self) -> Result<Hypermatrix> {
        Ok(match self {
            AnyWitness::Real(w) => structured_point(&w.spec, &w.base)?.into(),
            AnyWitness::Complex(w) => structured_point(&w.spec, &w.base)?.into(),
        })
    }

    pub fn condition(&self) -> ConditionReport {
        match self {
            AnyWitness::Real(w) => sufficient_condition(w),
            AnyWitness::Complex(w) => sufficient_condition(w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn veronese_point_is_tensor_power() {
        let spec = StructuredSpec::veronese(2, 3).unwrap();
        let p = structured_point(&spec, &[vec![e(2, 0)]]).unwrap();
        let want = Tensor::outer_vectors(&[&e(2, 0), &e(2, 0), &e(2, 0)]).unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn grassmann_point_is_plucker_wedge() {
        let spec = StructuredSpec::grassmann(2, 2).unwrap();
        let p = structured_point(&spec, &[vec![e(2, 0), e(2, 1)]]).unwrap();
        assert_eq!(p.data(), &[0.0, 0.5, -0.5, 0.0]);
    }

    #[test]
    fn segre_veronese_point() {
        let spec = StructuredSpec::segre_veronese(2, &[2, 1]).unwrap();
        let v1 = vec![1.0, 2.0];
        let v2 = vec![-1.0, 0.5];
        let p = structured_point(&spec, &[vec![v1.clone()], vec![v2.clone()]]).unwrap();
        let want = Tensor::outer_vectors(&[&v1, &v1, &v2]).unwrap();
        assert!(p.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn segre_tangent_is_the_three_term_witness() {
        let spec = StructuredSpec::segre(2, 3).unwrap();
        let w = TangentWitness::new(spec, vec![vec![e(2, 0)]; 3], vec![vec![e(2, 1)]; 3]).unwrap();
        let t = structured_tangent(&w).unwrap();
        // ones at (2,1,1), (1,2,1), (1,1,2) in 1-based indexing
        let mut want = vec![0.0; 8];
        want[0b100] = 1.0;
        want[0b010] = 1.0;
        want[0b001] = 1.0;
        assert_eq!(t.data(), want.as_slice());
    }

    #[test]
    fn veronese_tangent_is_scaled_normal_form() {
        let spec = StructuredSpec::veronese(2, 3).unwrap();
        let w = TangentWitness::new(spec, vec![vec![e(2, 0)]], vec![vec![e(2, 1)]]).unwrap();
        let t = structured_tangent(&w).unwrap();
        let normal = group_product(GroupOp::Sym, &[e(2, 0), e(2, 0), e(2, 1)]).unwrap();
        assert!(t.max_abs_diff(&normal.scale(3.0)).unwrap() < 1e-15);
    }

    #[test]
    fn layout_errors() {
        let spec = StructuredSpec::segre(2, 3).unwrap();
        assert!(
            TangentWitness::new(spec.clone(), vec![vec![e(2, 0)]; 2], vec![vec![e(2, 1)]; 3])
                .is_err()
        );
        assert!(TangentWitness::new(spec, vec![vec![e(3, 0)]; 3], vec![vec![e(2, 1)]; 3]).is_err());
        assert!(StructuredSpec::grassmann(2, 3).is_err());
        assert!(StructuredSpec::new(2, vec![]).is_err());
        assert!(StructuredSpec::segre(2, 40).is_err());
    }

    #[test]
    fn segre_condition_holds_for_independent_pairs() {
        let spec = StructuredSpec::segre(2, 3).unwrap();
        let w = TangentWitness::new(spec, vec![vec![e(2, 0)]; 3], vec![vec![e(2, 1)]; 3]).unwrap();
        let r = sufficient_condition(&w);
        assert!(r.holds, "{}", r.reason);
        assert!(r.order_hypothesis);
        assert_eq!(r.kind, VarietyKind::Segre);
    }

    #[test]
    fn equal_perturbation_fails_condition() {
        for spec in [
            StructuredSpec::segre(3, 3).unwrap(),
            StructuredSpec::veronese(3, 3).unwrap(),
            StructuredSpec::chow(3, 3).unwrap(),
            StructuredSpec::grassmann(4, 2).unwrap(),
        ] {
            let base: Vec<Vec<Vec<f64>>> = spec
                .groups
                .iter()
                .map(|g| {
                    (0..g.arity)
                        .map(|j| e(spec.ambient_dim, j % spec.ambient_dim))
                        .collect()
                })
                .collect();
            let w = TangentWitness::new(spec, base.clone(), base).unwrap();
            assert!(!sufficient_condition(&w).holds);
        }
    }

    #[test]
    fn grassmann_in_dimension_three_fails_by_pigeonhole() {
        let spec = StructuredSpec::grassmann(3, 2).unwrap();
        let w = TangentWitness::new(
            spec,
            vec![vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]],
            vec![vec![vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]]],
        )
        .unwrap();
        let r = sufficient_condition(&w);
        assert!(!r.holds);
        assert!(!r.order_hypothesis);
    }

    #[test]
    fn kinds_are_classified() {
        assert_eq!(
            StructuredSpec::segre_veronese(2, &[2, 1]).unwrap().kind(),
            VarietyKind::SegreVeronese
        );
        assert_eq!(
            StructuredSpec::segre_chow(3, &[2, 2]).unwrap().kind(),
            VarietyKind::SegreChow
        );
        assert_eq!(
            StructuredSpec::segre_grassmann(3, &[2, 2]).unwrap().kind(),
            VarietyKind::SegreGrassmann
        );
        assert_eq!(
            StructuredSpec::veronese_chow(3, 2, 2).unwrap().kind(),
            VarietyKind::VeroneseChow
        );
        assert_eq!(
            StructuredSpec::veronese_grassmann(3, 2, 2).unwrap().kind(),
            VarietyKind::VeroneseGrassmann
        );
        assert_eq!(
            StructuredSpec::segre_veronese_chow(2, &[(2, 2), (2, 1)])
                .unwrap()
                .kind(),
            VarietyKind::SegreVeroneseChow
        );
        assert_eq!(
            StructuredSpec::segre_veronese_grassmann(3, &[(2, 2), (2, 1)])
                .unwrap()
                .kind(),
            VarietyKind::SegreVeroneseGrassmann
        );
        let mixed = StructuredSpec::new(
            3,
            vec![
                Group {
                    op: GroupOp::Sym,
                    arity: 2,
                    power: 1,
                },
                Group {
                    op: GroupOp::Alt,
                    arity: 2,
                    power: 1,
                },
            ],
        )
        .unwrap();
        assert_eq!(mixed.kind(), VarietyKind::Mixed);
    }

    #[test]
    fn witness_file_roundtrip() {
        let text = r#"{"field":"real","ambient_dim":2,
            "groups":[{"op":"sym","arity":1,"power":1},{"op":"sym","arity":1,"power":1},{"op":"sym","arity":1,"power":1}],
            "base":[[[1,0]],[[1,0]],[[1,0]]],
            "perturb":[[[0,1]],[[0,1]],[[0,1]]]}"#;
        let w = parse_witness(text).unwrap();
        assert!(w.condition().holds);
        let t = w.tangent().unwrap();
        assert_eq!(t.shape(), &[2, 2, 2]);
        assert!(parse_witness(
            r#"{"field":"real","ambient_dim":2,"groups":[],"base":[],"perturb":[]}"#
        )
        .is_err());
    }
}
