//! The checked-in fuzz seeds stay valid inputs, so fuzzing starts from
//! accepted documents rather than rejected ones.

use std::fs;
use std::path::PathBuf;

use tensor_attain::experiment::ExperimentConfig;
use tensor_attain::io::{parse_mask, parse_tensor};
use tensor_attain::solvers::{BlockSpec, CpDecomposition};
use tensor_attain::varieties::parse_witness;
use tensor_attain::C64;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.display().to_string(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn tensor_seeds_parse() {
    for (name, data) in seeds("parse_tensor") {
        parse_tensor(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn mask_seeds_parse() {
    for (name, data) in seeds("parse_mask") {
        // same shape derivation as the fuzz target
        let sel = data[0] as usize;
        let shape: Vec<usize> = (0..1 + sel % 4).map(|k| 1 + (sel >> k) % 4).collect();
        parse_mask(text(&data[1..]), &shape).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn witness_seeds_parse() {
    for (name, data) in seeds("parse_witness") {
        parse_witness(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn decomposition_seeds_parse_in_their_field() {
    for (name, data) in seeds("decomposition_json") {
        let value: serde_json::Value = serde_json::from_slice(&data).unwrap();
        let real = CpDecomposition::<f64>::from_json(value.clone()).is_ok();
        let complex = CpDecomposition::<C64>::from_json(value).is_ok();
        assert!(real ^ complex, "{name}");
    }
}

#[test]
fn experiment_seeds_parse() {
    for (name, data) in seeds("experiment_config") {
        ExperimentConfig::from_json(text(&data)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn block_spec_seeds_parse() {
    for (name, data) in seeds("block_spec") {
        text(&data)
            .parse::<BlockSpec>()
            .unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
