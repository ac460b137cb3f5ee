mod common;

use std::collections::BTreeMap;

use geozeta::divisor::{
    combine_sqrt_check, divisor_case_a, divisor_selberg_case_b, divisor_super, divisor_symmetrized,
    Divisor,
};
use geozeta::spectra::{generate_spectral_input, CaseTag, Dimension, SpectralInput, SpectralLevel};
use geozeta::{Complex64, Error};
use proptest::prelude::*;
use rand::seq::SliceRandom;

use common::{c, rng};

/// Orders summed per exact location, zero totals removed.
fn order_table(points: &[(Complex64, i64)]) -> BTreeMap<(u64, u64), i64> {
    let mut table = BTreeMap::new();
    for &(z, m) in points {
        let key = ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits());
        *table.entry(key).or_insert(0) += m;
    }
    table.retain(|_, m| *m != 0);
    table
}

fn table_of(d: &Divisor) -> BTreeMap<(u64, u64), i64> {
    order_table(&d.points().iter().map(|p| (p.location, p.order)).collect::<Vec<_>>())
}

fn assert_canonical(d: &Divisor) {
    for p in d.points() {
        assert_ne!(p.order, 0);
    }
    for w in d.points().windows(2) {
        let (a, b) = (w[0].location, w[1].location);
        assert_ne!(a, b);
        assert!(a.norm() < b.norm() || (a.norm() == b.norm() && a.arg() <= b.arg()), "{a} before {b}");
    }
}

/// Divisor points of `Z_S` on case (a) data, written out entry by entry.
fn case_a_oracle(input: &SpectralInput) -> Vec<(Complex64, i64)> {
    let mut out = Vec::new();
    for l in input.laplace() {
        if l.eigenvalue == 0.0 {
            out.push((c(0.0, 0.0), 2 * l.multiplicity));
        } else {
            out.push((c(0.0, l.eigenvalue), l.multiplicity));
            out.push((c(0.0, -l.eigenvalue), l.multiplicity));
        }
    }
    out
}

fn virtual_input(levels: &[(f64, i64)]) -> SpectralInput {
    SpectralInput::new(
        CaseTag::A,
        Dimension::new(3).unwrap(),
        1e6,
        levels.iter().copied().map(SpectralLevel::from).collect(),
        vec![],
    )
    .unwrap()
}

#[test]
fn case_a_matches_entrywise_oracle_and_is_symmetric() {
    for seed in 0..100 {
        let input = generate_spectral_input(3, 1.5, 8.0, CaseTag::A, seed).unwrap();
        let d = divisor_case_a(&input).unwrap();
        assert_canonical(&d);
        assert_eq!(table_of(&d), order_table(&case_a_oracle(&input)));
        assert!(d.is_negation_symmetric());
        for p in d.points() {
            assert_eq!(d.order_at(-p.location), p.order);
        }
    }
}

#[test]
fn virtual_multiplicities_give_poles() {
    let input = virtual_input(&[(0.0, -1), (1.0, -2), (2.5, 3)]);
    let d = divisor_case_a(&input).unwrap();
    assert_eq!(d.order_at(c(0.0, 0.0)), -2);
    assert_eq!(d.order_at(c(0.0, 1.0)), -2);
    assert_eq!(d.order_at(c(0.0, -1.0)), -2);
    assert_eq!(d.order_at(c(0.0, 2.5)), 3);
    assert_eq!(d.zeros().count(), 2);
    assert_eq!(d.poles().count(), 3);
    assert!(d.is_negation_symmetric());
}

#[test]
fn case_b_square_root_holds_for_generated_inputs() {
    let mut checked = 0;
    for seed in 0..150 {
        let input = generate_spectral_input(3, 2.0, 5.0, CaseTag::B, seed).unwrap();
        let sym = divisor_symmetrized(&input).unwrap();
        let sup = divisor_super(&input).unwrap();
        let sel = divisor_selberg_case_b(&input).unwrap();
        for d in [&sym, &sup, &sel] {
            assert_canonical(d);
        }
        let check = combine_sqrt_check(&sym, &sup, &sel);
        assert!(check.holds(), "seed {seed}: {:?}", check.mismatches);
        assert!(check.locations_checked >= sym.len());
        for p in sel.points() {
            assert_eq!(2 * p.order, sym.order_at(p.location) + sup.order_at(p.location));
        }
        checked += 1;
    }
    assert!(checked >= 100);
}

#[test]
fn perturbed_order_is_reported() {
    let input = generate_spectral_input(3, 2.0, 5.0, CaseTag::B, 9).unwrap();
    let sym = divisor_symmetrized(&input).unwrap();
    let sup = divisor_super(&input).unwrap();
    let sel = divisor_selberg_case_b(&input).unwrap();
    let target = sel.points()[sel.len() / 2].location;
    let bumped = Divisor::from_points(
        sel.points()
            .iter()
            .map(|p| (p.location, p.order))
            .chain([(target, 1)]),
    );
    let check = combine_sqrt_check(&sym, &sup, &bumped);
    assert!(!check.holds());
    assert_eq!(check.mismatches.len(), 1);
    assert_eq!(check.mismatches[0].location, target);
    assert!(combine_sqrt_check(&Divisor::default(), &Divisor::default(), &Divisor::default()).holds());
}

#[test]
fn independent_plus_minus_reading_fails_square_root() {
    let mut failures = 0;
    for seed in 0..20 {
        let input = generate_spectral_input(3, 2.0, 5.0, CaseTag::B, seed).unwrap();
        let sym = divisor_symmetrized(&input).unwrap();
        let sup = divisor_super(&input).unwrap();
        let mirrored = Divisor::from_points(input.dirac().iter().flat_map(|d| {
            [(c(0.0, d.eigenvalue), d.multiplicity), (c(0.0, -d.eigenvalue), d.multiplicity)]
        }));
        let sel = divisor_selberg_case_b(&input).unwrap();
        if !combine_sqrt_check(&sym, &mirrored, &sel).holds() {
            failures += 1;
        }
        assert!(combine_sqrt_check(&sym, &sup, &sel).holds());
    }
    assert!(failures > 0);
}

#[test]
fn case_mismatch_and_parity_errors() {
    let a = generate_spectral_input(3, 1.0, 4.0, CaseTag::A, 1).unwrap();
    let b = generate_spectral_input(3, 1.0, 4.0, CaseTag::B, 1).unwrap();
    assert!(matches!(divisor_case_a(&b), Err(Error::CaseMismatch { .. })));
    assert!(matches!(divisor_super(&a), Err(Error::CaseMismatch { .. })));
    assert!(matches!(divisor_selberg_case_b(&a), Err(Error::CaseMismatch { .. })));
    assert!(matches!(divisor_symmetrized(&a), Err(Error::CaseMismatch { .. })));
}

#[test]
fn csv_layout() {
    let d = Divisor::from_points([(c(0.0, 2.0), 3), (c(0.0, -2.0), 3), (c(0.0, 0.0), -1)]);
    let mut out = Vec::new();
    d.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im,order"));
    assert_eq!(lines.count(), 3);
    assert!(Divisor::read_csv("re,im,order\n1,2\n".as_bytes()).is_err());
}

fn grid_point() -> impl Strategy<Value = (Complex64, i64)> {
    (-3i32..=3, -3i32..=3, -3i64..=3).prop_map(|(a, b, m)| (c(0.5 * f64::from(a), 0.5 * f64::from(b)), m))
}

proptest! {
    #[test]
    fn merge_is_order_independent(points in proptest::collection::vec(grid_point(), 0..60), seed in any::<u64>()) {
        let d = Divisor::from_points(points.clone());
        let mut shuffled = points.clone();
        shuffled.shuffle(&mut rng(seed));
        prop_assert_eq!(&Divisor::from_points(shuffled), &d);
        prop_assert_eq!(table_of(&d), order_table(&points));
        assert_canonical(&d);
    }

    #[test]
    fn merge_is_associative(
        a in proptest::collection::vec(grid_point(), 0..20),
        b in proptest::collection::vec(grid_point(), 0..20),
        cs in proptest::collection::vec(grid_point(), 0..20),
    ) {
        let flat = |d: Divisor| d.points().iter().map(|p| (p.location, p.order)).collect::<Vec<_>>();
        let ab = flat(Divisor::from_points(a.iter().chain(&b).copied()));
        let bc = flat(Divisor::from_points(b.iter().chain(&cs).copied()));
        let left = Divisor::from_points(ab.into_iter().chain(cs.iter().copied()));
        let right = Divisor::from_points(a.iter().copied().chain(bc));
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left, Divisor::from_points(a.iter().chain(&b).chain(&cs).copied()));
    }

    #[test]
    fn permuted_input_gives_identical_divisor(
        levels in proptest::collection::btree_map(1u32..400, prop_oneof![-3i64..=-1, 1i64..=3], 1..30),
        seed in any::<u64>(),
    ) {
        let levels: Vec<(f64, i64)> = levels.into_iter().map(|(k, m)| (f64::from(k) / 16.0, m)).collect();
        let d = divisor_case_a(&virtual_input(&levels)).unwrap();
        let mut pts = case_a_oracle(&virtual_input(&levels));
        pts.shuffle(&mut rng(seed));
        prop_assert_eq!(&Divisor::from_points(pts), &d);
        prop_assert!(d.is_negation_symmetric());
    }

    #[test]
    fn csv_round_trip(points in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3, -5i64..=5), 0..40)) {
        let d = Divisor::from_points(points.into_iter().map(|(re, im, m)| (c(re, im), m)));
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        prop_assert_eq!(Divisor::read_csv(buf.as_slice()).unwrap(), d);
    }
}
