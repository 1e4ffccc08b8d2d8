#![no_main]
use std::path::Path;

use bergman_lab_cli::{resolve, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        // file operators must fail cleanly from a missing directory
        let _ = resolve(&cfg, Path::new("/nonexistent/fuzz"));
    }
});
