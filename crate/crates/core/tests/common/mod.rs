#![allow(dead_code)]

use bergman_lab::C64;
use std::f64::consts::PI;

/// `∫_{|w|<r_max} f(w) dA(w)` by composite Simpson in the radius and the
/// trapezoid rule in the angle. Independent of the library's Gauss rules.
pub fn area_integral(f: impl Fn(C64) -> C64, r_max: f64, n_r: usize, n_theta: usize) -> C64 {
    let n_r = n_r + n_r % 2;
    let h = r_max / n_r as f64;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..=n_r {
        let r = h * i as f64;
        let wr = if i == 0 || i == n_r { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let mut ring = C64::new(0.0, 0.0);
        for j in 0..n_theta {
            ring += f(C64::from_polar(r, 2.0 * PI * j as f64 / n_theta as f64));
        }
        acc += ring * (wr * r * h / 3.0 * 2.0 * PI / n_theta as f64);
    }
    acc
}

/// Disc, weight α = 0: `dσ = dA/π`.
pub fn disc_sigma(f: impl Fn(C64) -> C64) -> C64 {
    area_integral(f, 1.0, 4000, 96) / PI
}

/// Fock: `dσ = e^{−|w|²} dA/π`, truncated at |w| = 9.
pub fn fock_sigma(f: impl Fn(C64) -> C64) -> C64 {
    area_integral(|w| f(w) * (-w.norm_sqr()).exp(), 9.0, 3000, 128) / PI
}
