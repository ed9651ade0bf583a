#![no_main]

use libfuzzer_sys::fuzz_target;
use tensor_attain::solvers::{diagnose, CpDecomposition};
use tensor_attain::C64;

const MAX_ENTRIES: usize = 100_000;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    if let Ok(d) = CpDecomposition::<f64>::from_json(value.clone()) {
        check(&d);
    }
    if let Ok(d) = CpDecomposition::<C64>::from_json(value) {
        check(&d);
    }
});

fn check<S: tensor_attain::Scalar>(d: &CpDecomposition<S>) {
    let back = CpDecomposition::<S>::from_json(d.to_json()).expect("round trip");
    assert_eq!(back.rank(), d.rank());
    let small = d
        .shape()
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .is_some_and(|n| n <= MAX_ENTRIES);
    if small {
        let _ = diagnose(d, None);
    }
}
