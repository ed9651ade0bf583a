//! Block-term approximation `A ≈ B_1 + ⋯ + B_k` with `mrank(B_i)` bounded.
//!
//! Each cycle visits the blocks in order and replaces `B_i` by a
//! multilinear-rank truncation of `R_i = A − Σ_{j≠i} B_j`: the better of a
//! truncated HOSVD refined by Tucker sweeps and Tucker sweeps warm-started
//! from the current subspaces. An update that would increase the
//! objective is rejected.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::als::best_step;
use super::{drive, each_restart, InitStrategy, SolveOptions, SolveReport, StepOutcome};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Tucker (HOOI) sweeps applied after each truncation.
pub const TUCKER_SWEEPS: usize = 3;

/// Serialized as its string form, so deserialization validates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BlockSpec {
    pub blocks: Vec<Vec<usize>>,
}

impl BlockSpec {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidBlockSpec(
                "at least one block is required".into(),
            ));
        }
        let d = blocks[0].len();
        if d == 0 {
            return Err(Error::InvalidBlockSpec(
                "blocks must have at least one mode".into(),
            ));
        }
        if blocks.iter().any(|b| b.len() != d) {
            return Err(Error::InvalidBlockSpec(
                "blocks have different orders".into(),
            ));
        }
        if blocks.iter().flatten().any(|&r| r == 0) {
            return Err(Error::InvalidBlockSpec(
                "multilinear ranks must be at least 1".into(),
            ));
        }
        Ok(Self { blocks })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn check_shape(&self, shape: &[usize]) -> Result<()> {
        for b in &self.blocks {
            if b.len() != shape.len() {
                return Err(Error::InvalidBlockSpec(format!(
                    "block {b:?} does not match order {}",
                    shape.len()
                )));
            }
            if b.iter().zip(shape).any(|(&r, &n)| r > n) {
                return Err(Error::InvalidBlockSpec(format!(
                    "block {b:?} exceeds shape {shape:?}"
                )));
            }
        }
        Ok(())
    }
}

/// `"2,2,2;1,3,3"`: blocks separated by `;`, ranks by `,`.
impl FromStr for BlockSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = s
            .split(';')
            .map(|block| {
                block
                    .split(',')
                    .map(|r| {
                        r.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::InvalidBlockSpec(format!("{:?}: {e}", r.trim())))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks)
    }
}

impl TryFrom<String> for BlockSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BlockSpec> for String {
    fn from(spec: BlockSpec) -> String {
        spec.to_string()
    }
}

impl fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        f.write_str(&parts.join(";"))
    }
}

#[derive(Debug, Clone)]
pub struct BlockTermResult<S: Scalar> {
    pub blocks: Vec<Tensor<S>>,
    pub report: SolveReport,
}

/// One block: its Tucker form, when known, and the full tensor.
#[derive(Clone)]
struct Block<S: Scalar> {
    tucker: Option<Tucker<S>>,
    tensor: Tensor<S>,
}

/// `core ×_0 bases[0] ×_1 ⋯` with orthonormal `bases[j]` (`n_j × r_j`).
#[derive(Clone)]
struct Tucker<S: Scalar> {
    core: Tensor<S>,
    bases: Vec<DMatrix<S>>,
}

impl<S: Scalar> Tucker<S> {
    fn expand(&self) -> Result<Tensor<S>> {
        let mut t = self.core.clone();
        for (j, u) in self.bases.iter().enumerate() {
            t = t.mode_product(u, j)?;
        }
        Ok(t)
    }
}

/// Restart 0 starts from zero blocks; later restarts start from random
/// blocks of the prescribed multilinear ranks scaled to `‖A‖ / k`. The
/// restart with the lowest final objective is returned.
pub fn block_term_solve<S: Scalar>(
    a: &Tensor<S>,
    spec: &BlockSpec,
    opts: &SolveOptions,
) -> Result<BlockTermResult<S>> {
    let runs = block_term_restarts(a, spec, opts)?;
    Ok(runs
        .into_iter()
        .reduce(|best, next| {
            if next.report.final_residual() < best.report.final_residual() {
                next
            } else {
                best
            }
        })
        .expect("at least one restart"))
}

/// Every restart of [`block_term_solve`], in restart order.
pub fn block_term_restarts<S: Scalar>(
    a: &Tensor<S>,
    spec: &BlockSpec,
    opts: &SolveOptions,
) -> Result<Vec<BlockTermResult<S>>> {
    spec.check_shape(a.shape())?;
    if opts.init == InitStrategy::Given {
        return Err(Error::InvalidOption(
            "block_term_solve draws its own initialization".into(),
        ));
    }
    let norm_a = a.norm();
    let scale = if norm_a > 0.0 { norm_a } else { 1.0 };

    let runs = each_restart(opts, |restart, rng| {
        let blocks = spec
            .blocks
            .iter()
            .map(|ranks| {
                if restart == 0 {
                    Ok(Block {
                        tucker: None,
                        tensor: Tensor::zeros(a.shape())?,
                    })
                } else {
                    random_block(a.shape(), ranks, norm_a / spec.len() as f64, rng)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        // the running sum is updated in place so that every objective value
        // is computed from the same tensor the acceptance test saw
        let mut state = (sum_blocks(a.shape(), &blocks)?, blocks);
        let trace = drive(&mut state, opts, |(total, blocks)| {
            let previous = blocks.clone();
            let mut current = a.sub(total)?.norm();
            for (i, ranks) in spec.blocks.iter().enumerate() {
                let mut others = total.clone();
                others.axpy(-S::one(), &blocks[i].tensor)?;
                let warm = blocks[i].tucker.as_ref().map(|t| t.bases.as_slice());
                let cand = truncate(&a.sub(&others)?, ranks, warm)?;
                others.axpy(S::one(), &cand.tensor)?;
                let obj = a.sub(&others)?.norm();
                if obj <= current {
                    current = obj;
                    *total = others;
                    blocks[i] = cand;
                }
            }
            if let Some((t, b, obj)) = extrapolate(a, &previous, blocks)? {
                if obj < current {
                    current = obj;
                    *total = t;
                    *blocks = b;
                }
            }
            let per_block: f64 = blocks.iter().map(|b| b.tensor.norm()).sum();
            let nt = total.norm();
            let kappa = if nt > 0.0 {
                per_block / nt
            } else {
                f64::INFINITY
            };
            Ok(StepOutcome {
                objective: current / scale,
                kappa,
            })
        })?;
        let blocks = state.1;
        Ok((blocks, trace, Vec::new()))
    })?;
    Ok(runs
        .into_iter()
        .map(|(blocks, report)| BlockTermResult {
            blocks: blocks.into_iter().map(|b| b.tensor).collect(),
            report,
        })
        .collect())
}

fn sum_blocks<S: Scalar>(shape: &[usize], blocks: &[Block<S>]) -> Result<Tensor<S>> {
    let mut total = Tensor::zeros(shape)?;
    for b in blocks {
        total.axpy(S::one(), &b.tensor)?;
    }
    Ok(total)
}

fn random_block<S: Scalar, R: Rng + ?Sized>(
    shape: &[usize],
    ranks: &[usize],
    norm: f64,
    rng: &mut R,
) -> Result<Block<S>> {
    let core = Tensor::gaussian(ranks, rng)?;
    let bases: Vec<DMatrix<S>> = shape
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| DMatrix::from_fn(n, r, |_, _| S::gaussian(rng)).qr().q())
        .collect();
    let mut tucker = Tucker { core, bases };
    let nt = tucker.expand()?.norm();
    if nt > 0.0 && norm > 0.0 {
        tucker.core = tucker.core.scale(S::from_real(norm / nt));
    }
    Ok(Block {
        tensor: tucker.expand()?,
        tucker: Some(tucker),
    })
}

/// Exact line search along the cycle's displacement in Tucker
/// coordinates. The new bases are first rotated onto the old ones
/// (orthogonal Procrustes) so that the displacement measures a change of
/// subspace rather than of basis. Cores and bases then move linearly in
/// `s`, which keeps every multilinear rank within its bound, and the
/// objective is a polynomial in `s`. Returns the extrapolated sum, blocks
/// and objective; `None` when some block has no Tucker form yet.
#[allow(clippy::type_complexity)]
fn extrapolate<S: Scalar>(
    a: &Tensor<S>,
    old: &[Block<S>],
    new: &[Block<S>],
) -> Result<Option<(Tensor<S>, Vec<Block<S>>, f64)>> {
    let d = a.order();
    let mut pairs = Vec::with_capacity(old.len());
    for (o, n) in old.iter().zip(new) {
        let (Some(o), Some(n)) = (&o.tucker, &n.tucker) else {
            return Ok(None);
        };
        let mut core = n.core.clone();
        let mut bases = Vec::with_capacity(d);
        for j in 0..d {
            let svd = (n.bases[j].adjoint() * &o.bases[j]).svd(true, true);
            let (Some(w), Some(vt)) = (svd.u, svd.v_t) else {
                return Ok(None);
            };
            let rot = w * vt;
            core = core.mode_product(&rot.adjoint(), j)?;
            bases.push(&n.bases[j] * rot);
        }
        let steps = Tucker {
            core: core.sub(&o.core)?,
            bases: bases.iter().zip(&o.bases).map(|(b, u)| b - u).collect(),
        };
        pairs.push((o, steps));
    }

    // coefficients of Σ_i B_i(s) − A as a polynomial in s
    let mut e = vec![vec![S::zero(); a.len()]; d + 2];
    for (o, step) in &pairs {
        let mut poly = vec![o.core.clone(), step.core.clone()];
        for j in 0..d {
            let mut next = Vec::with_capacity(poly.len() + 1);
            for k in 0..=poly.len() {
                let mut term: Option<Tensor<S>> = None;
                if k < poly.len() {
                    term = Some(poly[k].mode_product(&o.bases[j], j)?);
                }
                if k > 0 {
                    let t = poly[k - 1].mode_product(&step.bases[j], j)?;
                    term = Some(match term {
                        Some(mut acc) => {
                            acc.axpy(S::one(), &t)?;
                            acc
                        }
                        None => t,
                    });
                }
                next.push(term.expect("k is in range"));
            }
            poly = next;
        }
        for (acc, c) in e.iter_mut().zip(&poly) {
            acc.iter_mut().zip(c.data()).for_each(|(x, &y)| *x += y);
        }
    }
    e[0].iter_mut().zip(a.data()).for_each(|(x, &y)| *x -= y);
    let Some(s) = best_step(&e, None) else {
        return Ok(None);
    };

    let mut blocks = Vec::with_capacity(pairs.len());
    for (o, step) in &pairs {
        let mut core = o.core.clone();
        core.axpy(S::from_real(s), &step.core)?;
        let mut bases = Vec::with_capacity(d);
        for j in 0..d {
            let qr = (&o.bases[j] + &step.bases[j] * S::from_real(s)).qr();
            core = core.mode_product(&qr.r(), j)?;
            bases.push(qr.q());
        }
        let tucker = Tucker { core, bases };
        blocks.push(Block {
            tensor: tucker.expand()?,
            tucker: Some(tucker),
        });
    }
    let total = sum_blocks(a.shape(), &blocks)?;
    let obj = a.sub(&total)?.norm();
    Ok(obj.is_finite().then_some((total, blocks, obj)))
}

/// Leading `r` left singular vectors, from the eigenvectors of `M Mᴴ`
/// sorted by eigenvalue. The eigenbasis is complete, so rank-deficient
/// input still yields `r` orthonormal columns.
fn leading_vectors<S: Scalar>(m: DMatrix<S>, r: usize) -> DMatrix<S> {
    let gram = &m * m.adjoint();
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    DMatrix::from_fn(m.nrows(), r, |row, c| eig.eigenvectors[(row, order[c])])
}

/// Projects `t` onto the bases of every mode except `skip`.
fn project_except<S: Scalar>(
    t: &Tensor<S>,
    bases: &[DMatrix<S>],
    skip: usize,
) -> Result<Tensor<S>> {
    let mut out = t.clone();
    for (j, u) in bases.iter().enumerate() {
        if j != skip {
            out = out.mode_product(&u.adjoint(), j)?;
        }
    }
    Ok(out)
}

fn hooi<S: Scalar>(t: &Tensor<S>, ranks: &[usize], mut bases: Vec<DMatrix<S>>) -> Result<Block<S>> {
    for _ in 0..TUCKER_SWEEPS {
        for j in 0..t.order() {
            let p = project_except(t, &bases, j)?;
            bases[j] = leading_vectors(p.unfold(j)?, ranks[j]);
        }
    }
    let mut core = t.clone();
    for (j, u) in bases.iter().enumerate() {
        core = core.mode_product(&u.adjoint(), j)?;
    }
    let tucker = Tucker { core, bases };
    Ok(Block {
        tensor: tucker.expand()?,
        tucker: Some(tucker),
    })
}

/// Best of HOSVD+HOOI and warm-started HOOI.
fn truncate<S: Scalar>(
    t: &Tensor<S>,
    ranks: &[usize],
    warm: Option<&[DMatrix<S>]>,
) -> Result<Block<S>> {
    let hosvd = (0..t.order())
        .map(|j| Ok(leading_vectors(t.unfold(j)?, ranks[j])))
        .collect::<Result<Vec<_>>>()?;
    let cold = hooi(t, ranks, hosvd)?;
    let Some(warm) = warm else { return Ok(cold) };
    let warm = hooi(t, ranks, warm.to_vec())?;
    // the projection of t is orthogonal, so the larger block norm is the better fit
    Ok(if warm.tensor.norm() > cold.tensor.norm() {
        warm
    } else {
        cold
    })
}
