//! Shared fixtures and the structural invariant checks.
//!
//! Each check derives every random quantity from a single `u64` seed, so
//! proptest can drive it (and shrink the seed) and the acceptance harness
//! can replay it with a fixed case count.
#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensor_attain::varieties::{
    difference_quotient, structured_point, structured_tangent, sufficient_condition,
    StructuredSpec, TangentWitness,
};
use tensor_attain::witness::{classify_2x2x2, hyperdeterminant, DeltaSign};
use tensor_attain::{Permutation, Scalar, Tensor, C64};

pub fn stream(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn gaussian_vec<S: Scalar>(n: usize, rng: &mut ChaCha8Rng) -> Vec<S> {
    (0..n).map(|_| S::gaussian(rng)).collect()
}

/// Sum of `r` rank-one terms with Gaussian factors.
pub fn planted_cp<S: Scalar>(shape: &[usize], r: usize, rng: &mut ChaCha8Rng) -> Tensor<S> {
    let mut acc = Tensor::zeros(shape).unwrap();
    for _ in 0..r {
        let vs: Vec<Vec<S>> = shape.iter().map(|&n| gaussian_vec(n, rng)).collect();
        let refs: Vec<&[S]> = vs.iter().map(|v| v.as_slice()).collect();
        acc.axpy(S::one(), &Tensor::outer_vectors(&refs).unwrap())
            .unwrap();
    }
    acc
}

/// Gaussian core of shape `ranks` multiplied by Gaussian factor matrices.
pub fn planted_block<S: Scalar>(
    shape: &[usize],
    ranks: &[usize],
    rng: &mut ChaCha8Rng,
) -> Tensor<S> {
    let mut t = Tensor::gaussian(ranks, rng).unwrap();
    for (j, (&n, &r)) in shape.iter().zip(ranks).enumerate() {
        let u = DMatrix::from_fn(n, r, |_, _| S::gaussian(rng));
        t = t.mode_product(&u, j).unwrap();
    }
    t
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: &Tensor<C64>, b: &Tensor<C64>, rel: f64) -> bool {
    let scale = a.norm().max(b.norm()).max(1e-300);
    a.sub(b).unwrap().norm() <= rel * scale
}

fn within(a: &Tensor<C64>, b: &Tensor<C64>, abs: f64) -> bool {
    a.sub(b).unwrap().norm() <= abs
}

fn random_shape(rng: &mut ChaCha8Rng, max_order: usize, max_dim: usize) -> Vec<usize> {
    let d = rng.random_range(1..=max_order);
    (0..d).map(|_| rng.random_range(1..=max_dim)).collect()
}

fn random_permutation(rng: &mut ChaCha8Rng, d: usize) -> Permutation {
    let mut images: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        images.swap(i, rng.random_range(0..=i));
    }
    Permutation::new(images).unwrap()
}

pub fn outer_norm_is_multiplicative(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let shape = random_shape(&mut rng, 4, 4);
    let vs: Vec<Vec<C64>> = shape.iter().map(|&n| gaussian_vec(n, &mut rng)).collect();
    let refs: Vec<&[C64]> = vs.iter().map(|v| v.as_slice()).collect();
    let t = Tensor::outer_vectors(&refs).unwrap();
    let want: f64 = vs
        .iter()
        .map(|v| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .product();
    ensure((t.norm() - want).abs() <= 1e-12 * want, || {
        format!("‖outer‖ = {} vs Π‖v‖ = {want}", t.norm())
    })
}

pub fn projectors_are_linear_idempotent(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let d = rng.random_range(1..=4);
    let n = rng.random_range(1..=3);
    let shape = vec![n; d];
    let a: Tensor<C64> = Tensor::gaussian(&shape, &mut rng).unwrap();
    let b: Tensor<C64> = Tensor::gaussian(&shape, &mut rng).unwrap();
    let alpha = C64::gaussian(&mut rng);
    let mut combo = a.clone();
    combo.axpy(alpha, &b).unwrap();
    for (name, p) in [
        ("symmetrize", Tensor::symmetrize as fn(&Tensor<C64>) -> _),
        ("alternate", Tensor::alternate),
    ] {
        let pa = p(&a).unwrap();
        let mut lin = pa.clone();
        lin.axpy(alpha, &p(&b).unwrap()).unwrap();
        // roundoff is relative to the inputs: the images may vanish
        let input_scale = a.norm() + alpha.norm() * b.norm();
        ensure(
            within(&p(&combo).unwrap(), &lin, 1e-12 * input_scale),
            || format!("{name} is not linear"),
        )?;
        ensure(within(&p(&pa).unwrap(), &pa, 1e-12 * a.norm()), || {
            format!("{name} is not idempotent")
        })?;
    }
    if d == 2 {
        let ip = a
            .symmetrize()
            .unwrap()
            .inner(&b.alternate().unwrap())
            .unwrap();
        ensure(ip.norm() <= 1e-12 * a.norm() * b.norm(), || {
            format!("S²/Λ² images not orthogonal: {ip}")
        })?;
    }
    Ok(())
}

pub fn permute_preserves_norm_and_composes(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let shape = random_shape(&mut rng, 5, 3);
    let d = shape.len();
    let a: Tensor<C64> = Tensor::gaussian(&shape, &mut rng).unwrap();
    let tau = random_permutation(&mut rng, d);
    let rho = random_permutation(&mut rng, d);
    let pa = a.permute(&tau).unwrap();
    ensure((pa.norm() - a.norm()).abs() <= 1e-12 * a.norm(), || {
        "permute changed the norm".into()
    })?;
    let twice = pa.permute(&rho).unwrap();
    let once = a.permute(&tau.compose(&rho).unwrap()).unwrap();
    ensure(twice == once, || {
        format!(
            "permute does not compose for τ={:?}, ρ={:?}",
            tau.images(),
            rho.images()
        )
    })
}

pub fn mrank_of_generic_sums(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let d = rng.random_range(2..=4);
    let shape: Vec<usize> = (0..d).map(|_| rng.random_range(1..=4)).collect();
    let r = rng.random_range(1..=*shape.iter().min().unwrap());
    let t: Tensor<f64> = planted_cp(&shape, r, &mut rng);
    let got = t.mrank(1e-9).unwrap().ranks;
    let want: Vec<usize> = shape.iter().map(|&n| n.min(r)).collect();
    ensure(got == want, || {
        format!("shape {shape:?}, r={r}: mrank {got:?}, expected {want:?}")
    })
}

pub fn inner_is_conjugate_symmetric(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let shape = random_shape(&mut rng, 4, 4);
    let a: Tensor<C64> = Tensor::gaussian(&shape, &mut rng).unwrap();
    let b: Tensor<C64> = Tensor::gaussian(&shape, &mut rng).unwrap();
    let ab = a.inner(&b).unwrap();
    let ba = b.inner(&a).unwrap();
    ensure(
        (ab - ba.conj()).norm() <= 1e-12 * a.norm() * b.norm(),
        || format!("{ab} vs conj({ba})"),
    )
}

fn random_group_vectors(spec: &StructuredSpec, rng: &mut ChaCha8Rng) -> Vec<Vec<Vec<C64>>> {
    spec.groups
        .iter()
        .map(|g| {
            (0..g.arity)
                .map(|_| gaussian_vec(spec.ambient_dim, rng))
                .collect()
        })
        .collect()
}

/// A random spec of every flavour the engine supports, small enough to stay fast.
fn random_spec(rng: &mut ChaCha8Rng) -> StructuredSpec {
    let n = rng.random_range(2..=3);
    match rng.random_range(0..11) {
        0 => StructuredSpec::segre(n, rng.random_range(2..=4)),
        1 => StructuredSpec::veronese(n, rng.random_range(2..=4)),
        2 => StructuredSpec::chow(n, rng.random_range(2..=4)),
        3 => StructuredSpec::grassmann(3, rng.random_range(2..=3)),
        4 => StructuredSpec::segre_veronese(n, &[2, 1]),
        5 => StructuredSpec::segre_chow(n, &[2, 1, 1]),
        6 => StructuredSpec::segre_grassmann(3, &[2, 1]),
        7 => StructuredSpec::veronese_chow(n, 2, 2),
        8 => StructuredSpec::veronese_grassmann(3, 2, 2),
        9 => StructuredSpec::segre_veronese_chow(n, &[(2, 1), (1, 2)]),
        _ => StructuredSpec::segre_veronese_grassmann(3, &[(2, 1), (1, 2)]),
    }
    .unwrap()
}

pub fn group_symmetry_of_points(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let n = 3;
    let k = rng.random_range(2..=3);
    for (spec, sign) in [
        (StructuredSpec::segre_chow(n, &[k, 1]).unwrap(), 1.0),
        (StructuredSpec::segre_grassmann(n, &[k, 1]).unwrap(), -1.0),
    ] {
        let base = random_group_vectors(&spec, &mut rng);
        let p = structured_point(&spec, &base).unwrap();
        let mut swapped = base.clone();
        swapped[0].swap(0, 1);
        let q = structured_point(&spec, &swapped).unwrap();
        ensure(close(&q, &p.scale(C64::new(sign, 0.0)), 1e-12), || {
            format!(
                "transposing inputs of {:?} did not multiply the point by {sign}",
                spec.kind()
            )
        })?;
        // a full random permutation acts by its sign (alt) or trivially (sym)
        let perm = random_permutation(&mut rng, k);
        let mut shuffled = base.clone();
        shuffled[0] = perm.images().iter().map(|&i| base[0][i].clone()).collect();
        let factor = if sign < 0.0 { perm.sign() as f64 } else { 1.0 };
        let q = structured_point(&spec, &shuffled).unwrap();
        ensure(close(&q, &p.scale(C64::new(factor, 0.0)), 1e-12), || {
            "permutation action mismatch".into()
        })?;
    }
    Ok(())
}

pub fn tangent_is_linear_in_perturbation(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let spec = random_spec(&mut rng);
    let base = random_group_vectors(&spec, &mut rng);
    let w1 = random_group_vectors(&spec, &mut rng);
    let w2 = random_group_vectors(&spec, &mut rng);
    let (a, b) = (C64::gaussian(&mut rng), C64::gaussian(&mut rng));
    let mix: Vec<Vec<Vec<C64>>> = w1
        .iter()
        .zip(&w2)
        .map(|(g1, g2)| {
            g1.iter()
                .zip(g2)
                .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect())
                .collect()
        })
        .collect();
    let tan = |w: Vec<Vec<Vec<C64>>>| {
        structured_tangent(&TangentWitness::new(spec.clone(), base.clone(), w).unwrap()).unwrap()
    };
    let lhs = tan(mix);
    let mut rhs = tan(w1).scale(a);
    rhs.axpy(b, &tan(w2)).unwrap();
    ensure(close(&lhs, &rhs, 1e-12), || {
        format!("tangent of {:?} is not linear", spec.kind())
    })
}

pub fn difference_quotient_converges_linearly(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let spec = random_spec(&mut rng);
    let w = TangentWitness::new(
        spec.clone(),
        random_group_vectors(&spec, &mut rng),
        random_group_vectors(&spec, &mut rng),
    )
    .unwrap();
    let tangent = structured_tangent(&w).unwrap();
    let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&t| {
            difference_quotient(&w, t)
                .unwrap()
                .sub(&tangent)
                .unwrap()
                .norm()
                / tangent.norm()
        })
        .collect();
    for pair in errs.windows(2) {
        let ratio = pair[0] / pair[1] / 10.0;
        ensure((0.5..=2.0).contains(&ratio), || {
            format!("{:?}: errors {errs:?} not linear in t", spec.kind())
        })?;
    }
    Ok(())
}

pub fn witnesses_have_full_mrank_and_zero_delta(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    for spec in [
        StructuredSpec::segre(2, 3).unwrap(),
        StructuredSpec::veronese(2, 3).unwrap(),
    ] {
        let w = TangentWitness::new(
            spec.clone(),
            random_group_vectors(&spec, &mut rng),
            random_group_vectors(&spec, &mut rng),
        )
        .unwrap();
        if !sufficient_condition(&w).holds {
            continue;
        }
        let t = structured_tangent(&w).unwrap();
        let mrank = t.mrank(1e-9).unwrap().ranks;
        ensure(mrank == vec![2, 2, 2], || {
            format!("{:?} witness has mrank {mrank:?}", spec.kind())
        })?;
        let cert = classify_2x2x2(&t).unwrap();
        ensure(cert.delta_sign == DeltaSign::Zero, || {
            format!("{:?} witness has Δ = {:?}", spec.kind(), cert.delta)
        })?;
    }
    Ok(())
}

pub fn hyperdeterminant_is_permutation_invariant(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let a: Tensor<f64> = Tensor::gaussian(&[2, 2, 2], &mut rng).unwrap();
    let delta = hyperdeterminant(&a).unwrap();
    for p in Permutation::all(3) {
        let dp = hyperdeterminant(&a.permute(&p).unwrap()).unwrap();
        ensure((dp - delta).abs() <= 1e-12 * a.norm().powi(4), || {
            format!("Δ changed under {:?}", p.images())
        })?;
    }
    Ok(())
}

pub fn hyperdeterminant_is_quartic(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let a: Tensor<C64> = Tensor::gaussian(&[2, 2, 2], &mut rng).unwrap();
    let lambda = C64::gaussian(&mut rng);
    let lhs = hyperdeterminant(&a.scale(lambda)).unwrap();
    let rhs = hyperdeterminant(&a).unwrap() * lambda.powi(4);
    let scale = (a.norm() * lambda.norm()).powi(4);
    ensure((lhs - rhs).norm() <= 1e-12 * scale, || {
        format!("Δ(λA) = {lhs}, λ⁴Δ(A) = {rhs}")
    })
}

pub fn classifier_is_stable(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let a = loop {
        let a: Tensor<f64> = Tensor::gaussian(&[2, 2, 2], &mut rng).unwrap();
        if hyperdeterminant(&a).unwrap().abs() >= 1e-3 * a.norm().powi(4) {
            break a;
        }
    };
    let noise: Tensor<f64> = Tensor::gaussian(&[2, 2, 2], &mut rng).unwrap();
    let b = a.add(&noise.scale(1e-9 / noise.norm())).unwrap();
    let (ca, cb) = (classify_2x2x2(&a).unwrap(), classify_2x2x2(&b).unwrap());
    ensure(
        (
            ca.delta_sign,
            ca.real_rank,
            ca.complex_rank,
            ca.border_rank,
            &ca.mrank.ranks,
        ) == (
            cb.delta_sign,
            cb.real_rank,
            cb.complex_rank,
            cb.border_rank,
            &cb.mrank.ranks,
        ),
        || format!("certificate changed under 1e-9 noise: {ca:?} vs {cb:?}"),
    )
}

pub fn classifier_matches_construction(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, 0);
    let rank = rng.random_range(1..=2usize);
    let real: Tensor<f64> = planted_cp(&[2, 2, 2], rank, &mut rng);
    let c = classify_2x2x2(&real).unwrap();
    let r = rank as u8;
    ensure(
        (c.real_rank, c.complex_rank, c.border_rank) == (Some(r), r, r),
        || format!("real rank {rank}: {c:?}"),
    )?;
    let complex: Tensor<C64> = planted_cp(&[2, 2, 2], rank, &mut rng);
    let c = classify_2x2x2(&complex).unwrap();
    ensure(
        (c.real_rank, c.complex_rank, c.border_rank) == (None, r, r),
        || format!("complex rank {rank}: {c:?}"),
    )
}

pub type Check = fn(u64) -> Result<(), String>;

pub const INVARIANTS: &[(&str, Check)] = &[
    ("outer_norm_is_multiplicative", outer_norm_is_multiplicative),
    (
        "projectors_are_linear_idempotent",
        projectors_are_linear_idempotent,
    ),
    (
        "permute_preserves_norm_and_composes",
        permute_preserves_norm_and_composes,
    ),
    ("mrank_of_generic_sums", mrank_of_generic_sums),
    ("inner_is_conjugate_symmetric", inner_is_conjugate_symmetric),
    ("group_symmetry_of_points", group_symmetry_of_points),
    (
        "tangent_is_linear_in_perturbation",
        tangent_is_linear_in_perturbation,
    ),
    (
        "difference_quotient_converges_linearly",
        difference_quotient_converges_linearly,
    ),
    (
        "witnesses_have_full_mrank_and_zero_delta",
        witnesses_have_full_mrank_and_zero_delta,
    ),
    (
        "hyperdeterminant_is_permutation_invariant",
        hyperdeterminant_is_permutation_invariant,
    ),
    ("hyperdeterminant_is_quartic", hyperdeterminant_is_quartic),
    ("classifier_is_stable", classifier_is_stable),
    (
        "classifier_matches_construction",
        classifier_matches_construction,
    ),
];

pub const INVARIANT_COUNT: usize = INVARIANTS.len();

/// Runs one check under proptest with `cases` random seeds.
pub fn run_check(check: Check, cases: u32) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&any::<u64>(), |seed| {
            check(seed).map_err(TestCaseError::fail)
        })
        .map_err(|e| e.to_string())
}

/// Names and messages of the invariants that failed.
pub fn run_invariant_suite(cases: u32) -> Vec<String> {
    INVARIANTS
        .iter()
        .filter_map(|(name, check)| {
            run_check(*check, cases)
                .err()
                .map(|e| format!("{name}: {e}"))
        })
        .collect()
}
