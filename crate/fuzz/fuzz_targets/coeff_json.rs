#![no_main]
use bergman_lab::coeff::CoeffFunction;
use bergman_lab::io::ComplexArray;
use bergman_lab::operator::OperatorMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(a) = serde_json::from_str::<ComplexArray>(text) else { return };
    if let Ok(f) = CoeffFunction::from_json(&a) {
        assert_eq!(f.coeffs().len(), f.space().dim());
    }
    if let Ok(t) = OperatorMatrix::from_json(&a) {
        let _ = t.norm();
    }
});
