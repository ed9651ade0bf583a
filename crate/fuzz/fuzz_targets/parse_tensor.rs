#![no_main]

use libfuzzer_sys::fuzz_target;
use tensor_attain::io::{hypermatrix_to_json, parse_tensor, parse_tensor_value};
use tensor_attain::witness::classify_hypermatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(t) = parse_tensor(text) else { return };
    // a parsed tensor holds finite entries and survives a round trip
    assert!(t.norm().is_finite());
    let back = parse_tensor_value(hypermatrix_to_json(&t)).expect("round trip");
    assert_eq!(back, t);
    if t.shape() == [2, 2, 2] {
        let _ = classify_hypermatrix(&t);
    }
});
