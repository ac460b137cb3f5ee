mod common;

use std::f64::consts::{PI, TAU};

use geozeta::euler::{log_zeta, EvalRequest, SigmaCharacter, ZetaKind};
use geozeta::hadamard::{
    canonical_product, elementary_factor, evaluate_factorization, fit_g, genus_of,
    one_minus_elementary_factor, FactorComponent, FactorValue, Factorization, ProductValue,
    ZeroSet, ZeroTail,
};
use geozeta::spectra::{Dimension, LengthSpectrum, PrimeGeodesic, SpectrumOrigin};
use geozeta::{Complex64, Error};
use proptest::prelude::*;

use common::{c, direct_product, elementary_factor_oracle};

fn dim3() -> Dimension {
    Dimension::new(3).unwrap()
}

/// One closed geodesic of length `l` and holonomy angle `theta` in a
/// 3-manifold with `ρ = 1`. Its Selberg zeta function vanishes exactly at
/// `-ρ - k + i((2a - k)θ + 2πj)/l`, `0 ≤ a ≤ k`, `j ∈ ℤ`.
struct SingleGeodesic {
    l: f64,
    theta: f64,
}

impl SingleGeodesic {
    const RHO: f64 = 1.0;

    fn spectrum(&self) -> LengthSpectrum {
        LengthSpectrum::new(
            dim3(),
            Self::RHO,
            40.0,
            SpectrumOrigin::Ingested,
            vec![PrimeGeodesic::untwisted(self.l, vec![self.theta])],
        )
        .unwrap()
    }

    fn zeros_within(&self, radius: f64) -> Vec<(Complex64, u32)> {
        let mut out = Vec::new();
        let mut k = 0u32;
        while Self::RHO + f64::from(k) <= radius {
            let re = -Self::RHO - f64::from(k);
            let height = (radius * radius - re * re).sqrt();
            for a in 0..=k {
                let shift = (2.0 * f64::from(a) - f64::from(k)) * self.theta;
                let j_lo = ((-height * self.l - shift) / TAU).ceil() as i64;
                let j_hi = ((height * self.l - shift) / TAU).floor() as i64;
                for j in j_lo..=j_hi {
                    let z = c(re, (shift + TAU * j as f64) / self.l);
                    if z.norm() <= radius {
                        out.push((z, 1));
                    }
                }
            }
            k += 1;
        }
        out
    }

    /// `n(r) ≤ (r(r+1)/2)(r l/π + 1) ≤ A r^3` for `r ≥ radius`.
    fn tail(&self, radius: f64) -> ZeroTail {
        ZeroTail::Density {
            coefficient: (1.0 + 1.0 / radius) / 2.0 * (self.l / PI + 1.0 / radius),
            exponent: 3.0,
            radius,
        }
    }
}

#[test]
fn single_geodesic_zero_count_respects_declared_density() {
    let g = SingleGeodesic { l: 2.0, theta: 1.0 };
    let ZeroTail::Density { coefficient, .. } = g.tail(20.0) else { unreachable!() };
    for r in [20.0, 25.0, 30.0] {
        let n = g.zeros_within(r).len() as f64;
        assert!(n <= coefficient * r * r * r, "{n} at {r}");
    }
}

struct RoundTrip {
    /// Largest relative error over the held-out points.
    worst: f64,
    /// Largest log-space bound reported by the factorization there.
    worst_bound: f64,
}

/// Fits `g` to Euler-product samples on the circle `|s - 3| = 1.2` and
/// compares the factorization with the Euler product at interior points.
fn round_trip(g: &SingleGeodesic, radius: f64, tail_tol: f64) -> RoundTrip {
    let spectrum = g.spectrum();
    let zeros = ZeroSet::new(g.zeros_within(radius), dim3())
        .unwrap()
        .with_tail(g.tail(radius))
        .unwrap();
    let genus = genus_of(&zeros).unwrap();
    assert_eq!(genus.genus, 3);
    let z1 = FactorComponent::new(zeros, genus.genus).unwrap();
    let z2 = FactorComponent::new(ZeroSet::new(vec![], dim3()).unwrap(), 0).unwrap();

    let sigma = SigmaCharacter::trivial(dim3());
    let eval = |s: Complex64| {
        log_zeta(&spectrum, &EvalRequest::new(s, ZetaKind::Selberg, sigma.clone())).unwrap()
    };
    let samples: Vec<(Complex64, Complex64)> = (0..40)
        .map(|j| {
            let s = c(3.0, 0.0) + Complex64::from_polar(1.2, TAU * j as f64 / 40.0);
            (s, eval(s).log_value)
        })
        .collect();
    let fit = fit_g(&samples, 0, &z1, &z2, 3, tail_tol).unwrap();
    let fact = Factorization::new(0, fit.coefficients.clone(), z1, z2).unwrap();

    let mut out = RoundTrip {
        worst: 0.0,
        worst_bound: 0.0,
    };
    for j in 0..10 {
        let s = c(3.0, 0.0) + Complex64::from_polar(0.3 + 0.08 * j as f64, 0.9 * j as f64);
        assert!(s.re > SingleGeodesic::RHO);
        let e = eval(s);
        let want = e.log_value.exp();
        let v = evaluate_factorization(&fact, s, tail_tol).unwrap();
        let FactorValue::Finite {
            bound,
            tail_conditional,
            ..
        } = v
        else {
            panic!("{v:?}")
        };
        assert!(tail_conditional);
        let rel = (v.value() - want).norm() / want.norm();

        // Omitted zeros, the fit and the Euler product, each bounded on its own.
        let combined = (2.0 * bound + fit.max_residual + e.finite_spectrum_bound()).exp_m1();
        assert!(rel <= combined, "{rel} > {combined} at {s}");
        // The log-error is analytic inside the sampling circle, so it is
        // controlled by its size on the circle.
        let interior = (2.0 * fit.max_residual + e.finite_spectrum_bound()).exp_m1();
        assert!(rel <= interior, "{rel} > {interior} at {s}");

        out.worst = out.worst.max(rel);
        out.worst_bound = out.worst_bound.max(bound);
    }
    out
}

#[test]
fn euler_product_round_trip() {
    let g = SingleGeodesic { l: 2.0, theta: 1.0 };
    let r = round_trip(&g, 40.0, 10.0);
    assert!(r.worst < 1e-3, "{}", r.worst);
}

#[test]
fn round_trip_improves_with_more_zeros() {
    let g = SingleGeodesic { l: 2.0, theta: 0.7 };
    let runs: Vec<RoundTrip> = [15.0, 25.0, 40.0]
        .iter()
        .map(|&radius| round_trip(&g, radius, 100.0))
        .collect();
    for w in runs.windows(2) {
        assert!(w[1].worst_bound < w[0].worst_bound);
        assert!(w[1].worst < w[0].worst, "{} then {}", w[0].worst, w[1].worst);
    }
}

#[test]
fn tail_bound_over_tolerance_is_refused() {
    let g = SingleGeodesic { l: 2.0, theta: 1.0 };
    let zeros = ZeroSet::new(g.zeros_within(15.0), dim3())
        .unwrap()
        .with_tail(g.tail(15.0))
        .unwrap();
    let r = canonical_product(&zeros, 3, c(3.0, 1.0), 1e-6);
    assert!(matches!(r, Err(Error::TailUnachievable { .. })));
}

#[test]
fn cube_root_zeros_match_direct_product() {
    let zeros: Vec<(Complex64, u32)> = (1..=100_000u32).map(|k| (c(f64::from(k).cbrt(), 0.0), 1)).collect();
    let s = c(0.0, 2.0);
    let direct = direct_product(&zeros, 3, s);
    let set = ZeroSet::new(zeros, dim3()).unwrap();
    let v = canonical_product(&set, 3, s, 1e-12).unwrap().value();
    assert!((v - direct).norm() <= 1e-10 * direct.norm(), "{v} vs {direct}");
}

#[test]
fn exact_zero_and_tiny_examples() {
    let one = ZeroSet::new(vec![(c(1.0, 0.0), 1)], dim3()).unwrap();
    for p in 0..=3 {
        assert_eq!(
            canonical_product(&one, p, c(1.0, 0.0), 1e-12).unwrap(),
            ProductValue::Zero { multiplicity: 1 }
        );
    }
    let two = ZeroSet::new(vec![(c(2.0, 0.0), 1)], dim3()).unwrap();
    assert!((canonical_product(&two, 0, c(1.0, 0.0), 1e-12).unwrap().value() - c(0.5, 0.0)).norm() < 1e-15);
    assert!((elementary_factor(c(0.5, 0.0), 2).re - 0.934_122_98).abs() < 1e-8);
}

fn synthetic_log_f(
    m0: i64,
    q: &[Complex64],
    zeros: &[(Complex64, u32)],
    p1: u32,
    poles: &[(Complex64, u32)],
    p2: u32,
    s: Complex64,
) -> Complex64 {
    let mut v = q.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * s + a) + s.ln() * m0 as f64;
    for &(z, m) in zeros {
        v += elementary_factor_oracle(s / z, p1).ln() * f64::from(m);
    }
    for &(w, m) in poles {
        v -= elementary_factor_oracle(s / w, p2).ln() * f64::from(m);
    }
    v
}

#[test]
fn fit_recovers_polynomial_with_positive_genus() {
    let zeros: Vec<(Complex64, u32)> = (0..30)
        .map(|k| (Complex64::from_polar(2.0 + 0.25 * f64::from(k), 1.3 * f64::from(k)), 1 + k as u32 % 3))
        .collect();
    let poles: Vec<(Complex64, u32)> = (0..20)
        .map(|k| (Complex64::from_polar(2.5 + 0.3 * f64::from(k), 0.7 + 2.1 * f64::from(k)), 1))
        .collect();
    let q = [c(-0.4, 1.0), c(0.5, -0.5), c(0.1, 0.3), c(-0.2, 0.05)];
    let z1 = FactorComponent::new(ZeroSet::new(zeros.clone(), dim3()).unwrap(), 2).unwrap();
    let z2 = FactorComponent::new(ZeroSet::new(poles.clone(), dim3()).unwrap(), 1).unwrap();
    let samples: Vec<_> = (0..60)
        .map(|j| {
            let s = Complex64::from_polar(1.4, TAU * j as f64 / 60.0);
            (s, synthetic_log_f(2, &q, &zeros, 2, &poles, 1, s))
        })
        .collect();
    let fit = fit_g(&samples, 2, &z1, &z2, 3, 1e-12).unwrap();
    for (a, b) in fit.coefficients.iter().zip(&q) {
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }
    assert!(fit.max_residual < 1e-10);
}

#[test]
fn winding_numbers_match_divisor() {
    let zeros: Vec<(Complex64, u32)> = (0..25)
        .map(|k| (Complex64::from_polar(1.0 + 0.2 * f64::from(k), 2.4 * f64::from(k)), 1 + k as u32 % 3))
        .collect();
    let poles: Vec<(Complex64, u32)> = (0..15)
        .map(|k| (Complex64::from_polar(1.1 + 0.3 * f64::from(k), 0.5 + 1.7 * f64::from(k)), 1 + k as u32 % 2))
        .collect();
    let fact = Factorization::new(
        1,
        vec![c(0.2, 0.1), c(-0.3, 0.4)],
        FactorComponent::with_estimated_genus(ZeroSet::new(zeros.clone(), dim3()).unwrap()).unwrap(),
        FactorComponent::with_estimated_genus(ZeroSet::new(poles.clone(), dim3()).unwrap()).unwrap(),
    )
    .unwrap();
    let all: Vec<Complex64> = zeros.iter().chain(&poles).map(|p| p.0).chain([c(0.0, 0.0)]).collect();
    let winding = |center: Complex64| {
        let nearest = all
            .iter()
            .filter(|z| **z != center)
            .map(|z| (z - center).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = nearest / 3.0;
        let steps = 256;
        let mut total = 0.0;
        let mut prev = None;
        for j in 0..=steps {
            let s = center + Complex64::from_polar(radius, TAU * j as f64 / steps as f64);
            let FactorValue::Finite { log_value, .. } = evaluate_factorization(&fact, s, 1e-12).unwrap() else {
                panic!("hit a zero")
            };
            if let Some(p) = prev {
                let d: f64 = log_value.im - p;
                total += d - TAU * (d / TAU).round();
            }
            prev = Some(log_value.im);
        }
        (total / TAU).round() as i64
    };
    for &(z, m) in &zeros {
        assert_eq!(winding(z), i64::from(m), "zero at {z}");
    }
    for &(w, m) in &poles {
        assert_eq!(winding(w), -i64::from(m), "pole at {w}");
    }
    assert_eq!(winding(c(0.0, 0.0)), 1);
}

proptest! {
    #[test]
    fn elementary_bound_in_unit_disk(r in 0.0f64..=1.0, theta in 0.0f64..TAU, k in 0u32..=5) {
        let u = Complex64::from_polar(r, theta);
        prop_assert!(one_minus_elementary_factor(u, k).norm() <= u.norm().powi(k as i32 + 1));
    }

    #[test]
    fn elementary_factor_matches_definition(re in -3.0f64..3.0, im in -3.0f64..3.0, k in 0u32..8) {
        let u = c(re, im);
        let want = elementary_factor_oracle(u, k);
        prop_assume!(want.is_finite());
        // Rounding in the exponent scales with the sum of its term moduli.
        let exponent_mass: f64 = (1..=k).map(|j| u.norm().powi(j as i32) / f64::from(j)).sum();
        let rel = 1e-14 + 16.0 * f64::EPSILON * exponent_mass;
        prop_assert!((elementary_factor(u, k) - want).norm() <= rel * want.norm().max(1e-300));
        if want.norm() > 1e-300 {
            let via_log = geozeta::hadamard::log_elementary_factor(u, k).exp();
            prop_assert!((via_log - want).norm() <= rel * want.norm());
        }
    }

    #[test]
    fn canonical_product_matches_direct(
        zeros in proptest::collection::vec((1.0f64..20.0, 0.0f64..TAU, 1u32..4), 1..40),
        p in 0u32..=3,
        s_r in 0.0f64..3.0,
        s_t in 0.0f64..TAU,
    ) {
        let zeros: Vec<(Complex64, u32)> = zeros.into_iter().map(|(r, t, m)| (Complex64::from_polar(r, t), m)).collect();
        let s = Complex64::from_polar(s_r, s_t);
        let want = direct_product(&zeros, p, s);
        let got = canonical_product(&ZeroSet::new(zeros, dim3()).unwrap(), p, s, 1e-12).unwrap().value();
        prop_assert!((got - want).norm() <= 1e-10 * want.norm().max(1e-300));
    }

    #[test]
    fn conjugation_symmetric_sets_are_real_on_reals(
        zeros in proptest::collection::vec((1.0f64..20.0, 0.0f64..PI, 1u32..3), 1..30),
        p in 0u32..=3,
        s_re in -4.0f64..4.0,
        s_im in -4.0f64..4.0,
    ) {
        let set: Vec<(Complex64, u32)> = zeros
            .iter()
            .flat_map(|&(r, t, m)| {
                let z = Complex64::from_polar(r, t);
                [(z, m), (z.conj(), m)]
            })
            .collect();
        let set = ZeroSet::new(set, dim3()).unwrap();
        let s = c(s_re, s_im);
        let a = canonical_product(&set, p, s, 1e-12).unwrap().value();
        let b = canonical_product(&set, p, s.conj(), 1e-12).unwrap().value();
        prop_assert!((b - a.conj()).norm() <= 1e-11 * a.norm().max(1e-300));
    }
}
