#![no_main]

use libfuzzer_sys::fuzz_target;
use tensor_attain::io::{mask_to_json, parse_mask};

fuzz_target!(|data: &[u8]| {
    // first byte picks a small shape, the rest is the mask document
    let Some((&sel, rest)) = data.split_first() else {
        return;
    };
    let shape: Vec<usize> = (0..1 + sel as usize % 4)
        .map(|k| 1 + (sel as usize >> k) % 4)
        .collect();
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let Ok(mask) = parse_mask(text, &shape) else {
        return;
    };
    assert_eq!(mask.shape(), &shape[..]);
    let again = parse_mask(&mask_to_json(&mask).to_string(), &shape).expect("round trip");
    assert_eq!(again, mask);
    assert_eq!(
        mask.complement().len() + mask.len(),
        shape.iter().product::<usize>()
    );
});
