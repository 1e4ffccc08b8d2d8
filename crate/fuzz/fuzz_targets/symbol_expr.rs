#![no_main]
use bergman_lab::symbol::parse_scalar;
use bergman_lab::{DomainPoint, C64};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(src) = std::str::from_utf8(rest) else { return };
    let n_vars = 1 + (sel & 1) as usize;
    if let Ok(s) = parse_scalar(src, n_vars) {
        let factors = match n_vars {
            1 => bergman_lab::SpaceSpec::bergman_disc(0.0, 4, 1).unwrap().factors(),
            _ => bergman_lab::SpaceSpec::bidisc([0.0, 0.0], 4, 1).unwrap().factors(),
        };
        let w = match n_vars {
            1 => DomainPoint::Single(C64::new(0.3, -0.2)),
            _ => DomainPoint::Pair([C64::new(0.3, -0.2), C64::new(-0.1, 0.4)]),
        };
        let _ = s.eval(&factors, &w);
    }
});
