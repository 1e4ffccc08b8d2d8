#![no_main]
use bergman_lab::quadrature::{parse_kernel_file, schur_test};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(k) = parse_kernel_file(text) {
        if let Ok(b) = schur_test(&k, 2.0) {
            assert!(b.bound >= 0.0 || b.bound.is_nan());
        }
    }
});
