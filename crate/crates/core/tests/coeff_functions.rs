mod common;

use approx::assert_abs_diff_eq;
use bergman_lab::coeff::{basis_normalizer, kernel_as_coeffs, project_grid_function, unit_kernel_coeffs, CoeffFunction};
use bergman_lab::quadrature::build_rule;
use bergman_lab::space::kernel_eval;
use bergman_lab::{DomainPoint, SpaceSpec, C64};
use proptest::prelude::*;

fn disc(d: usize) -> SpaceSpec {
    SpaceSpec::bergman_disc(0.0, 32, d).unwrap()
}

fn p(re: f64, im: f64) -> DomainPoint {
    DomainPoint::Single(C64::new(re, im))
}

#[test]
fn normalizers_against_moment_oracle() {
    // ‖z^m‖² = ∫ |w|^{2m} dσ, computed by the independent area rule
    let s = disc(1);
    for m in [0u32, 1, 3, 7] {
        let moment = common::disc_sigma(|w| C64::new(w.norm().powi(2 * m as i32), 0.0)).re;
        assert_abs_diff_eq!(basis_normalizer(&s, m as usize).unwrap(), 1.0 / moment.sqrt(), epsilon = 1e-9);
    }
    assert_abs_diff_eq!(basis_normalizer(&s, 1).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
    let f = SpaceSpec::fock(8, 1).unwrap();
    let moment = common::fock_sigma(|w| C64::new(w.norm().powi(4), 0.0)).re;
    assert_abs_diff_eq!(basis_normalizer(&f, 2).unwrap(), 1.0 / moment.sqrt(), epsilon = 1e-9);
    assert_abs_diff_eq!(basis_normalizer(&f, 2).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
    assert!(basis_normalizer(&s, 32).is_err());
}

#[test]
fn evaluation_examples() {
    let s = disc(4);
    let f = CoeffFunction::basis(&s, 0, 1).unwrap();
    for z in [p(0.0, 0.0), p(0.7, -0.2)] {
        let v = f.eval(&z).unwrap();
        assert_eq!(v, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
    }
    let g = CoeffFunction::basis(&s, 1, 0).unwrap();
    assert_abs_diff_eq!(g.eval(&p(0.5, 0.0)).unwrap()[0].re, 2f64.sqrt() * 0.5, epsilon = 1e-15);
}

#[test]
fn truncated_kernel_matches_closed_form() {
    let s = disc(2);
    for z in [p(0.0, 0.0), p(0.4, 0.3), p(0.0, -0.6)] {
        let kz = kernel_as_coeffs(&s, &z, 1).unwrap();
        for w in [p(0.1, 0.1), p(-0.5, 0.2)] {
            let closed = kernel_eval(&s, &z, &w).unwrap();
            assert!((kz.eval(&w).unwrap()[1] - closed).norm() < 1e-8);
        }
    }
    // K_0 ≡ 1
    assert_eq!(kernel_as_coeffs(&s, &p(0.0, 0.0), 0).unwrap(), CoeffFunction::basis(&s, 0, 0).unwrap());
    let k = kernel_as_coeffs(&s, &p(0.5, 0.0), 0).unwrap();
    assert_abs_diff_eq!(k.norm().powi(2), 16.0 / 9.0, epsilon = 1e-6);
    assert!(kernel_as_coeffs(&s, &p(0.95, 0.0), 0).is_err());
}

#[test]
fn truncated_unit_kernel_norm_against_tail() {
    let s = disc(1);
    for r in [0.3, 0.6, 0.75] {
        let k = kernel_as_coeffs(&s, &p(r, 0.0), 0).unwrap();
        // ‖k_z‖ → 1 once the geometric tail Σ_{m≥32} (m+1)|z|^{2m} is negligible
        assert!((k.norm() / kernel_eval(&s, &p(r, 0.0), &p(r, 0.0)).unwrap().re.sqrt() - 1.0).abs() < 1e-6, "r = {r}");
    }
    // at |z| = 0.8 the captured fraction is 1 − x^32 (1 + 32(1 − x)), x = |z|²
    let x: f64 = 0.64;
    let expected = (1.0 - x.powi(32) * (1.0 + 32.0 * (1.0 - x))).sqrt();
    let k = kernel_as_coeffs(&s, &p(0.8, 0.0), 0).unwrap();
    assert_abs_diff_eq!(k.norm() * (1.0 - x), expected, epsilon = 1e-12);
    assert_abs_diff_eq!(unit_kernel_coeffs(&s, &p(0.8, 0.0), 0).unwrap().norm(), 1.0, epsilon = 1e-14);
}

#[test]
fn projection_examples() {
    let s = disc(2);
    let rule = build_rule(&s, 40, 64).unwrap();
    let mut f = CoeffFunction::zeros(&s);
    f.set(0, 0, C64::new(1.0, 2.0));
    f.set(5, 1, C64::new(-0.5, 0.0));
    f.set(31, 0, C64::new(0.0, 0.25));
    let samples = f.eval_on_rule(&rule).unwrap();
    let back = project_grid_function(&rule, &samples).unwrap();
    for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
        assert!((a - b).norm() < 1e-10);
    }
    let again = project_grid_function(&rule, &back.eval_on_rule(&rule).unwrap()).unwrap();
    for (a, b) in again.coeffs().iter().zip(back.coeffs()) {
        assert!((a - b).norm() < 1e-10);
    }
    // conj(w) has zero mean, and is orthogonal to every analytic monomial
    let conj: Vec<C64> = rule.nodes().iter().flat_map(|w| [w.coords()[0].conj(); 2]).collect();
    assert!(project_grid_function(&rule, &conj).unwrap().norm() < 1e-10);
    assert!(project_grid_function(&rule, &conj[1..]).is_err());
}

#[test]
fn json_round_trip_and_mismatch() {
    let s = disc(2);
    let f = CoeffFunction::basis(&s, 3, 1).unwrap();
    let text = serde_json::to_string(&f.to_json()).unwrap();
    let back = CoeffFunction::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, f);
    let other = CoeffFunction::zeros(&disc(3));
    assert!(f.inner(&other).is_err());
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b)), len)
}

proptest! {
    #[test]
    fn parseval_on_the_rule(c in coeffs(8 * 2)) {
        let s = SpaceSpec::bergman_disc(0.0, 8, 2).unwrap();
        let rule = build_rule(&s, 12, 24).unwrap();
        let f = CoeffFunction::new(&s, c).unwrap();
        let v = f.eval_on_rule(&rule).unwrap();
        let quad: f64 = rule.sigma_weights().iter().enumerate().map(|(i, w)| w * (v[2 * i].norm_sqr() + v[2 * i + 1].norm_sqr())).sum();
        prop_assert!((quad - f.norm().powi(2)).abs() < 1e-9 * (1.0 + quad));
    }

    #[test]
    fn cauchy_schwarz(a in coeffs(12), b in coeffs(12)) {
        let s = SpaceSpec::bergman_disc(0.5, 6, 2).unwrap();
        let f = CoeffFunction::new(&s, a).unwrap();
        let g = CoeffFunction::new(&s, b).unwrap();
        prop_assert!(f.inner(&g).unwrap().norm() <= f.norm() * g.norm() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn kernel_reproduces_polynomials(c in coeffs(8), r in 0.0..0.8f64, t in 0.0..6.3f64) {
        let s = SpaceSpec::bergman_disc(0.0, 8, 1).unwrap();
        let f = CoeffFunction::new(&s, c).unwrap();
        let z = DomainPoint::Single(C64::from_polar(r, t));
        let k = kernel_as_coeffs(&s, &z, 0).unwrap();
        prop_assert!((f.inner(&k).unwrap() - f.eval(&z).unwrap()[0]).norm() < 1e-8);
    }
}
