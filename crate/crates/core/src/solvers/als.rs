//! Shared ALS machinery: Khatri–Rao rows, Gram solves, factor sweeps.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use super::decomposition::CpDecomposition;
use super::{SolveFlag, GRAM_CONDITION_LIMIT, TIKHONOV};
use crate::error::Result;
use crate::mask::Mask;
use crate::scalar::Scalar;
use crate::tensor::{next_index, Tensor};

/// Target of a (possibly masked) least-squares fit, pre-unfolded.
pub(crate) struct Target<S: Scalar> {
    pub tensor: Tensor<S>,
    unfoldings: Vec<DMatrix<S>>,
    /// `observed[mode][row]`: observed unfolding columns, `None` = all.
    observed: Option<Vec<Vec<Vec<usize>>>>,
    mask: Option<Mask>,
}

impl<S: Scalar> Target<S> {
    pub fn dense(tensor: Tensor<S>) -> Result<Self> {
        let unfoldings = (0..tensor.order())
            .map(|k| tensor.unfold(k))
            .collect::<Result<_>>()?;
        Ok(Self {
            tensor,
            unfoldings,
            observed: None,
            mask: None,
        })
    }

    pub fn masked(tensor: Tensor<S>, mask: &Mask) -> Result<Self> {
        let mut t = Self::dense(tensor)?;
        let shape = t.tensor.shape().to_vec();
        let mut observed: Vec<Vec<Vec<usize>>> =
            shape.iter().map(|&n| vec![Vec::new(); n]).collect();
        let mut idx = vec![0; shape.len()];
        let mut flat = 0;
        loop {
            if mask.contains_flat(flat) {
                for (mode, rows) in observed.iter_mut().enumerate() {
                    rows[idx[mode]].push(unfold_column(&idx, &shape, mode));
                }
            }
            flat += 1;
            if !next_index(&mut idx, &shape) {
                break;
            }
        }
        for rows in observed.iter_mut() {
            for cols in rows.iter_mut() {
                cols.sort_unstable();
            }
        }
        t.observed = Some(observed);
        t.mask = Some(mask.clone());
        Ok(t)
    }

    pub fn has_unobserved_rows(&self) -> bool {
        self.observed
            .as_ref()
            .is_some_and(|o| o.iter().any(|rows| rows.iter().any(|c| c.is_empty())))
    }

    /// `‖P(A − B)‖` and `‖P(A)‖` with `P` the mask projection (or identity).
    pub fn residual_norms(&self, b: &Tensor<S>) -> (f64, f64) {
        let mut res = 0.0;
        let mut base = 0.0;
        for (flat, (&a, &bb)) in self.tensor.data().iter().zip(b.data()).enumerate() {
            if self.mask.as_ref().is_none_or(|m| m.contains_flat(flat)) {
                res += (a - bb).abs2();
                base += a.abs2();
            }
        }
        (res.sqrt(), base.sqrt())
    }

    pub fn relative_residual(&self, b: &Tensor<S>) -> f64 {
        let (res, base) = self.residual_norms(b);
        if base > 0.0 {
            res / base
        } else {
            res
        }
    }
}

/// Column of the mode-`mode` unfolding holding multi-index `idx`.
fn unfold_column(idx: &[usize], shape: &[usize], mode: usize) -> usize {
    idx.iter()
        .zip(shape)
        .enumerate()
        .filter(|&(k, _)| k != mode)
        .fold(0, |acc, (_, (&i, &n))| acc * n + i)
}

pub(crate) fn random_model<S: Scalar, R: Rng + ?Sized>(
    shape: &[usize],
    r: usize,
    rng: &mut R,
) -> CpDecomposition<S> {
    let factors: Vec<DMatrix<S>> = shape
        .iter()
        .map(|&n| DMatrix::from_fn(n, r, |_, _| S::gaussian(rng)))
        .collect();
    CpDecomposition::from_unnormalized(vec![S::one(); r], factors)
        .expect("gaussian factors are finite")
}

/// Multiplies the weights by `⟨B, A⟩ / ‖B‖²` over the observed entries,
/// the best scalar multiple of `B`. The factor is linear in `A`, so random
/// starts rescaled this way make the accelerated iteration equivariant
/// under `A ↦ αA`; without it the first extrapolation direction would not
/// scale with `A`.
pub(crate) fn fit_scale<S: Scalar>(model: &mut CpDecomposition<S>, target: &Target<S>) {
    let b = model.reconstruct();
    let (mut num, mut den) = (S::zero(), 0.0);
    for (p, (&x, &a)) in b.data().iter().zip(target.tensor.data()).enumerate() {
        if target.mask.as_ref().is_none_or(|m| m.contains_flat(p)) {
            num += x.conjugate() * a;
            den += x.modulus() * x.modulus();
        }
    }
    if den > 0.0 && num.modulus() > 0.0 {
        let c = num.scale(1.0 / den);
        model.weights.iter_mut().for_each(|w| *w *= c);
    }
}

/// `K[p, i] = Π_{l≠mode} U_l[idx_l, i]`, rows in unfolding-column order.
pub(crate) fn khatri_rao<S: Scalar>(factors: &[DMatrix<S>], mode: usize) -> DMatrix<S> {
    let r = factors[0].ncols();
    let others: Vec<&DMatrix<S>> = factors
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != mode)
        .map(|(_, f)| f)
        .collect();
    let rows: usize = others.iter().map(|f| f.nrows()).product();
    let mut k = DMatrix::from_element(rows, r, S::one());
    if others.is_empty() {
        return k;
    }
    let shape: Vec<usize> = others.iter().map(|f| f.nrows()).collect();
    let mut idx = vec![0; shape.len()];
    let mut p = 0;
    loop {
        for i in 0..r {
            k[(p, i)] = others
                .iter()
                .zip(&idx)
                .fold(S::one(), |acc, (f, &row)| acc * f[(row, i)]);
        }
        p += 1;
        if !next_index(&mut idx, &shape) {
            break;
        }
    }
    k
}

/// `G[i,k] = Σ_{p∈cols} conj(K[p,i]) K[p,k]`.
fn gram<S: Scalar>(k: &DMatrix<S>, cols: Option<&[usize]>) -> DMatrix<S> {
    let r = k.ncols();
    let mut g = DMatrix::zeros(r, r);
    let mut add = |p: usize| {
        for i in 0..r {
            let ci = k[(p, i)].conjugate();
            for j in 0..r {
                g[(i, j)] += ci * k[(p, j)];
            }
        }
    };
    match cols {
        Some(cs) => cs.iter().for_each(|&p| add(p)),
        None => (0..k.nrows()).for_each(add),
    }
    g
}

/// Solves `G x = rhs` for Hermitian PSD `G`, adding a Tikhonov term when
/// the condition number exceeds [`GRAM_CONDITION_LIMIT`].
pub(crate) fn solve_gram<S: Scalar>(
    g: &DMatrix<S>,
    rhs: &DMatrix<S>,
    flags: &mut Vec<SolveFlag>,
) -> DMatrix<S> {
    let eig = SymmetricEigen::new(g.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let mut sys = g.clone();
    if min.is_nan() || min <= 0.0 || max / min > GRAM_CONDITION_LIMIT {
        let mu = TIKHONOV * if max > 0.0 { max } else { 1.0 };
        for i in 0..sys.nrows() {
            sys[(i, i)] += S::from_real(mu);
        }
        if !flags.contains(&SolveFlag::Regularized) {
            flags.push(SolveFlag::Regularized);
        }
    }
    match cholesky_solve(&sys, rhs) {
        Some(x) => x,
        None => {
            // numerically indefinite after regularization: pseudo-inverse
            let pinv = sys.pseudo_inverse(TIKHONOV).expect("nonnegative epsilon");
            pinv * rhs
        }
    }
}

/// Solves `G X = rhs` through `G = L Lᴴ`, or `None` if a pivot is not
/// positive. The diagonal of `L` is real and every division is by it, so a
/// complex system with real entries goes through exactly the floating-point
/// operations of the real one; a promoted real problem then follows the
/// real trajectory bit for bit.
fn cholesky_solve<S: Scalar>(g: &DMatrix<S>, rhs: &DMatrix<S>) -> Option<DMatrix<S>> {
    let n = g.nrows();
    let mut l = DMatrix::<S>::zeros(n, n);
    let mut diag = vec![0.0; n];
    for j in 0..n {
        let mut d = g[(j, j)].real();
        for k in 0..j {
            d -= l[(j, k)].modulus_squared();
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        diag[j] = d.sqrt();
        l[(j, j)] = S::from_real(diag[j]);
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conjugate();
            }
            l[(i, j)] = s.unscale(diag[j]);
        }
    }
    let mut x = rhs.clone();
    for c in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s.unscale(diag[i]);
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)].conjugate() * x[(k, c)];
            }
            x[(i, c)] = s.unscale(diag[i]);
        }
    }
    Some(x)
}

/// Exact least-squares update of one mode's factor block, followed by
/// column normalization into the weights.
pub(crate) fn update_mode<S: Scalar>(
    model: &mut CpDecomposition<S>,
    mode: usize,
    target: &Target<S>,
    flags: &mut Vec<SolveFlag>,
) {
    let k = khatri_rao(&model.factors, mode);
    let a = &target.unfoldings[mode];
    let (n, p_all) = (a.nrows(), a.ncols());
    let r = k.ncols();
    let mut shared: Option<DMatrix<S>> = None;
    let mut solution = DMatrix::zeros(n, r);

    for row in 0..n {
        let cols = target.observed.as_ref().map(|o| o[mode][row].as_slice());
        let full = cols.is_none_or(|c| c.len() == p_all);
        let mut rhs = DMatrix::zeros(r, 1);
        let mut add_rhs = |p: usize| {
            for i in 0..r {
                rhs[(i, 0)] += k[(p, i)].conjugate() * a[(row, p)];
            }
        };
        if full {
            (0..p_all).for_each(&mut add_rhs);
        } else {
            cols.unwrap().iter().for_each(|&p| add_rhs(p));
        }
        let x = if full {
            let g = shared.get_or_insert_with(|| gram(&k, None));
            solve_gram(g, &rhs, flags)
        } else {
            solve_gram(&gram(&k, cols), &rhs, flags)
        };
        for i in 0..r {
            solution[(row, i)] = x[(i, 0)];
        }
    }

    for (i, mut col) in solution.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
            model.weights[i] = S::from_real(norm);
        } else {
            col[0] = S::one();
            model.weights[i] = S::zero();
        }
    }
    model.factors[mode] = solution;
}

pub(crate) fn sweep<S: Scalar>(
    model: &mut CpDecomposition<S>,
    target: &Target<S>,
    flags: &mut Vec<SolveFlag>,
) {
    for mode in 0..model.order() {
        update_mode(model, mode, target, flags);
    }
}

/// One ALS sweep followed by an exact line search along the sweep's
/// displacement: with `X` the factors before and `X'` after the sweep,
/// `B(s)` built from `X + s(X' − X)` is a degree-`d` polynomial in `s`,
/// so the objective is a polynomial in real `s` minimized exactly via the
/// roots of its derivative. The minimizer replaces the sweep result only
/// if its true residual is strictly lower, so the objective stays
/// nonincreasing. Returns the reconstruction of the accepted model.
pub(crate) fn accelerated_sweep<S: Scalar>(
    model: &mut CpDecomposition<S>,
    target: &Target<S>,
    flags: &mut Vec<SolveFlag>,
) -> Tensor<S> {
    let before = absorbed(model);
    sweep(model, target, flags);
    let b = model.reconstruct();
    let delta: Vec<DMatrix<S>> = before
        .iter()
        .zip(&absorbed(model))
        .map(|(x, y)| y - x)
        .collect();
    let Some(step) = line_search(&before, &delta, target) else {
        return b;
    };
    let trial: Vec<DMatrix<S>> = before
        .iter()
        .zip(&delta)
        .map(|(x, dx)| x + dx.scale(step))
        .collect();
    let Ok(candidate) = CpDecomposition::from_unnormalized(vec![S::one(); model.rank()], trial)
    else {
        return b;
    };
    let tb = candidate.reconstruct();
    if target.residual_norms(&tb).0 < target.residual_norms(&b).0 {
        *model = candidate;
        tb
    } else {
        b
    }
}

/// Real minimizer of `‖P(A − B(s))‖²`, `None` when the polynomial is
/// degenerate. A real step is used over both fields.
fn line_search<S: Scalar>(x: &[DMatrix<S>], dx: &[DMatrix<S>], target: &Target<S>) -> Option<f64> {
    let mut e = step_coefficients(x, dx);
    for (c, &a) in e[0].iter_mut().zip(target.tensor.data()) {
        *c -= a;
    }
    best_step(&e, target.mask.as_ref())
}

/// Real `t` minimizing `‖P(E_0 + t E_1 + ⋯ + t^n E_n)‖²`, with `P` the
/// projection onto `mask` (identity when absent).
pub(super) fn best_step<S: Scalar>(e: &[Vec<S>], mask: Option<&Mask>) -> Option<f64> {
    // m[k][l] = ⟨E_k, E_l⟩ over observed entries
    let d = e.len();
    let mut m = vec![vec![S::zero(); d]; d];
    for k in 0..d {
        for l in k..d {
            let mut acc = S::zero();
            for (p, (&u, &v)) in e[k].iter().zip(&e[l]).enumerate() {
                if mask.is_none_or(|mask| mask.contains_flat(p)) {
                    acc += u.conjugate() * v;
                }
            }
            m[k][l] = acc;
            m[l][k] = acc.conjugate();
        }
    }
    // f(t) = Σ_{k,l} t^{k+l} Re m[k][l]
    let mut coeffs = vec![0.0; 2 * d - 1];
    for k in 0..d {
        for l in 0..d {
            coeffs[k + l] += m[k][l].real();
        }
    }
    let mut best: Option<(f64, f64)> = None;
    for t in stationary_points(&coeffs) {
        let f = horner(&coeffs, t);
        if f.is_finite() && best.is_none_or(|(bf, _)| f < bf) {
            best = Some((f, t));
        }
    }
    best.map(|(_, t)| t)
}

/// Real critical points of the polynomial with ascending coefficients
/// `c`, from the companion matrix of its derivative.
fn stationary_points(c: &[f64]) -> Vec<f64> {
    let mut deriv: Vec<f64> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| k as f64 * ck)
        .collect();
    let scale = deriv.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return Vec::new();
    }
    while deriv.last().is_some_and(|&v| v.abs() <= 1e-14 * scale) {
        deriv.pop();
    }
    let n = deriv.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = deriv[n];
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -deriv[n - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .filter(|t| t.is_finite())
        .collect()
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

/// Row-major coefficient tensors `T_0, …, T_d` of
/// `Σ_i ⊗_j (x_j + s·dx_j)[:, i]`, expanded mode by mode.
fn step_coefficients<S: Scalar>(x: &[DMatrix<S>], dx: &[DMatrix<S>]) -> Vec<Vec<S>> {
    let d = x.len();
    let len: usize = x.iter().map(|f| f.nrows()).product();
    let mut total = vec![vec![S::zero(); len]; d + 1];
    for i in 0..x[0].ncols() {
        let mut coeffs: Vec<Vec<S>> = vec![vec![S::one()]];
        for (xm, dm) in x.iter().zip(dx) {
            let (xc, dc) = (xm.column(i), dm.column(i));
            let n = xc.len();
            let size = coeffs[0].len() * n;
            let mut next = vec![vec![S::zero(); size]; coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                for (p, &a) in c.iter().enumerate() {
                    for q in 0..n {
                        next[k][p * n + q] += a * xc[q];
                        next[k + 1][p * n + q] += a * dc[q];
                    }
                }
            }
            coeffs = next;
        }
        for (acc, c) in total.iter_mut().zip(&coeffs) {
            for (t, &v) in acc.iter_mut().zip(c) {
                *t += v;
            }
        }
    }
    total
}

/// Factors with the weights folded into mode 0. The sweep solves mode 0
/// first, so a scaling `A ↦ αA` lands there too and the extrapolation line
/// scales with `A`.
fn absorbed<S: Scalar>(model: &CpDecomposition<S>) -> Vec<DMatrix<S>> {
    let mut f = model.factors.clone();
    for (i, mut col) in f[0].column_iter_mut().enumerate() {
        col *= model.weights[i];
    }
    f
}

/// `Σ|λ_i| / ‖B‖`, `+∞` for a vanishing reconstruction.
pub(crate) fn kappa<S: Scalar>(weights: &[S], b: &Tensor<S>) -> f64 {
    let total: f64 = weights.iter().map(|w| w.modulus()).sum();
    let nb = b.norm();
    if nb > 0.0 {
        total / nb
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn khatri_rao_matches_unfolding_of_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model: CpDecomposition<f64> = random_model(&[2, 3, 4], 2, &mut rng);
        let b = model.reconstruct();
        for mode in 0..3 {
            let k = khatri_rao(&model.factors, mode);
            let scaled = DMatrix::from_fn(model.shape[mode], 2, |r, c| {
                model.factors[mode][(r, c)] * model.weights[c]
            });
            let unf = &scaled * k.transpose();
            assert!((unf - b.unfold(mode).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn single_update_is_exact_for_rank_one_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let truth: CpDecomposition<crate::scalar::C64> = random_model(&[3, 3, 3], 1, &mut rng);
        let target = Target::dense(truth.reconstruct()).unwrap();
        let mut model = truth.clone();
        let mut flags = Vec::new();
        update_mode(&mut model, 0, &target, &mut flags);
        assert!(target.relative_residual(&model.reconstruct()) < 1e-13);
        assert!(flags.is_empty());
    }

    #[test]
    fn singular_gram_is_regularized_and_flagged() {
        let g = DMatrix::<f64>::zeros(2, 2);
        let rhs = DMatrix::<f64>::zeros(2, 1);
        let mut flags = Vec::new();
        let x = solve_gram(&g, &rhs, &mut flags);
        assert_eq!(x, DMatrix::zeros(2, 1));
        assert_eq!(flags, vec![SolveFlag::Regularized]);
    }
}
