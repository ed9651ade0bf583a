#![no_main]

use libfuzzer_sys::fuzz_target;
use tensor_attain::solvers::BlockSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = text.parse::<BlockSpec>() else {
        return;
    };
    assert!(!spec.is_empty());
    let again: BlockSpec = spec.to_string().parse().expect("display parses");
    assert_eq!(again, spec);
    let shape: Vec<usize> = spec.blocks[0].iter().map(|&r| r.max(1)).collect();
    let _ = spec.check_shape(&shape);
});
