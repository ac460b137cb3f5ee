//! Reference implementations shared by the integration tests. They follow
//! the textbook definitions directly and avoid the library's code paths.

#![allow(dead_code)]

use geozeta::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(1 - u) exp(u + u²/2 + ... + u^k/k)` with the exponent summed term by term.
pub fn elementary_factor_oracle(u: Complex64, k: u32) -> Complex64 {
    let mut exponent = c(0.0, 0.0);
    for j in 1..=k {
        exponent += u.powu(j) / f64::from(j);
    }
    (c(1.0, 0.0) - u) * exponent.exp()
}

/// `e_p(a)` by summing the products over all `p`-subsets.
pub fn elementary_symmetric_oracle(a: &[Complex64]) -> Vec<Complex64> {
    let d = a.len();
    let mut e = vec![c(0.0, 0.0); d + 1];
    for mask in 0u32..(1u32 << d) {
        let prod: Complex64 = (0..d)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| a[i])
            .product();
        e[mask.count_ones() as usize] += prod;
    }
    e
}

/// `Π (1 - a_j)` in the given order.
pub fn det_one_minus_oracle(a: &[Complex64]) -> Complex64 {
    a.iter().fold(c(1.0, 0.0), |acc, x| acc * (c(1.0, 0.0) - x))
}

/// Direct `W(s) = Π E(s/z, p)^m`.
pub fn direct_product(zeros: &[(Complex64, u32)], p: u32, s: Complex64) -> Complex64 {
    zeros
        .iter()
        .map(|&(z, m)| elementary_factor_oracle(s / z, p).powu(m))
        .product()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the disk `|z| ≤ radius`.
pub fn in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.random_range(0.0f64..1.0).sqrt();
    Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}
