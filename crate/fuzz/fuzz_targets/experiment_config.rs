#![no_main]

use libfuzzer_sys::fuzz_target;
use tensor_attain::experiment::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = ExperimentConfig::from_json(text) else {
        return;
    };
    // a valid config serializes back to an equal valid config
    let again =
        ExperimentConfig::from_json(&serde_json::to_string(&config).unwrap()).expect("round trip");
    assert_eq!(again, config);
});
