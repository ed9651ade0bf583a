#![no_main]

use libfuzzer_sys::fuzz_target;
use tensor_attain::varieties::{parse_witness, AnyWitness};

/// Tangent tensors larger than this are not built.
const MAX_ENTRIES: f64 = 1e5;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(w) = parse_witness(text) else { return };
    let _ = w.condition();
    let spec = match &w {
        AnyWitness::Real(w) => &w.spec,
        AnyWitness::Complex(w) => &w.spec,
    };
    if (spec.ambient_dim as f64).powi(spec.order().min(64) as i32) > MAX_ENTRIES {
        return;
    }
    if let Ok(t) = w.tangent() {
        assert_eq!(t.shape(), &spec.shape()[..]);
    }
    let _ = w.point();
});
