//! Zero/pole divisors of the continued zeta functions, read off from
//! operator spectra.
//!
//! Orders are signed: positive for zeros, negative for poles. Negative
//! multiplicities arise because the bundle is built from a virtual
//! representation.

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::canonical_zero;
use crate::spectra::{CaseTag, SpectralInput};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivisorPoint {
    pub location: Complex64,
    pub order: i64,
}

/// Finite divisor, sorted by modulus then argument, without duplicate
/// locations or zero orders.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Divisor {
    points: Vec<DivisorPoint>,
}

fn cmp_location(a: &Complex64, b: &Complex64) -> Ordering {
    a.norm()
        .total_cmp(&b.norm())
        .then_with(|| a.arg().total_cmp(&b.arg()))
        .then_with(|| a.re.total_cmp(&b.re))
        .then_with(|| a.im.total_cmp(&b.im))
}

fn on_imaginary_axis(s: f64) -> Complex64 {
    Complex64::new(0.0, canonical_zero(s))
}

impl Divisor {
    pub fn from_points<I>(points: I) -> Self
    where
        I: IntoIterator<Item = (Complex64, i64)>,
    {
        let mut raw: Vec<DivisorPoint> = points
            .into_iter()
            .map(|(z, order)| DivisorPoint {
                location: Complex64::new(canonical_zero(z.re), canonical_zero(z.im)),
                order,
            })
            .collect();
        raw.sort_by(|a, b| cmp_location(&a.location, &b.location));
        let mut points: Vec<DivisorPoint> = Vec::with_capacity(raw.len());
        for p in raw {
            match points.last_mut() {
                Some(last) if last.location == p.location => last.order += p.order,
                _ => points.push(p),
            }
        }
        points.retain(|p| p.order != 0);
        Divisor { points }
    }

    pub fn points(&self) -> &[DivisorPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn order_at(&self, z: Complex64) -> i64 {
        let z = Complex64::new(canonical_zero(z.re), canonical_zero(z.im));
        self.points
            .binary_search_by(|p| cmp_location(&p.location, &z))
            .map(|i| self.points[i].order)
            .unwrap_or(0)
    }

    /// Points with positive order.
    pub fn zeros(&self) -> impl Iterator<Item = &DivisorPoint> {
        self.points.iter().filter(|p| p.order > 0)
    }

    /// Points with negative order.
    pub fn poles(&self) -> impl Iterator<Item = &DivisorPoint> {
        self.points.iter().filter(|p| p.order < 0)
    }

    /// Whether `z ↦ -z` maps the divisor onto itself, orders included.
    pub fn is_negation_symmetric(&self) -> bool {
        self.points.iter().all(|p| self.order_at(-p.location) == p.order)
    }

    /// `re,im,order` with one row per point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im,order")?;
        for p in &self.points {
            writeln!(w, "{:?},{:?},{}", p.location.re, p.location.im, p.order)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim() == "re,im,order" => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "expected header re,im,order".into(),
                })
            }
        }
        let mut pts = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Parse {
                line: idx + 1,
                message: m.to_string(),
            };
            let mut cols = line.split(',');
            let re: f64 = cols.next().and_then(|c| c.trim().parse().ok()).ok_or_else(|| bad("bad re"))?;
            let im: f64 = cols.next().and_then(|c| c.trim().parse().ok()).ok_or_else(|| bad("bad im"))?;
            let order: i64 = cols
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| bad("bad order"))?;
            if cols.next().is_some() {
                return Err(bad("too many columns"));
            }
            pts.push((Complex64::new(re, im), order));
        }
        Ok(Divisor::from_points(pts))
    }
}

fn require_case(input: &SpectralInput, expected: CaseTag) -> Result<()> {
    if input.case_tag() != expected {
        return Err(Error::CaseMismatch {
            expected: expected.letter(),
            found: input.case_tag().letter(),
        });
    }
    Ok(())
}

/// Points `±is` of order `m` for each Laplace level `(s, m)`, `s ≠ 0`, and
/// `0` of order `2m` for a zero eigenvalue.
///
/// Used for `Z_S` in case (a) and, on case (b) data, for the symmetrized
/// `S = Z_S(·,σ) Z_S(·,wσ)`; see [`divisor_symmetrized`].
pub fn divisor_case_a(input: &SpectralInput) -> Result<Divisor> {
    require_case(input, CaseTag::A)?;
    Ok(laplace_divisor(input))
}

/// Divisor of `S(s, σ)` from case (b) data; same rule as case (a).
pub fn divisor_symmetrized(input: &SpectralInput) -> Result<Divisor> {
    require_case(input, CaseTag::B)?;
    Ok(laplace_divisor(input))
}

fn laplace_divisor(input: &SpectralInput) -> Divisor {
    Divisor::from_points(input.laplace().iter().flat_map(|l| {
        if l.eigenvalue == 0.0 {
            vec![(Complex64::new(0.0, 0.0), 2 * l.multiplicity)]
        } else {
            vec![
                (on_imaginary_axis(l.eigenvalue), l.multiplicity),
                (on_imaginary_axis(-l.eigenvalue), l.multiplicity),
            ]
        }
    }))
}

/// Divisor of the super zeta function: `is` of order `m_s` for each Dirac
/// level `(s, m_s)`.
pub fn divisor_super(input: &SpectralInput) -> Result<Divisor> {
    require_case(input, CaseTag::B)?;
    Ok(Divisor::from_points(
        input
            .dirac()
            .iter()
            .map(|d| (on_imaginary_axis(d.eigenvalue), d.multiplicity)),
    ))
}

/// Divisor of `Z_S(s, σ)` in case (b): at `it` for `t = ±s`, `s ≠ 0` a
/// Laplace level, order `(m(s) + m_s(t)) / 2`; at 0, order `m(0)`.
///
/// A Dirac level absent from the input counts as multiplicity 0. An odd
/// `m + m_s` is rejected.
pub fn divisor_selberg_case_b(input: &SpectralInput) -> Result<Divisor> {
    require_case(input, CaseTag::B)?;
    let mut pts = Vec::with_capacity(2 * input.laplace().len());
    for l in input.laplace() {
        if l.eigenvalue == 0.0 {
            pts.push((Complex64::new(0.0, 0.0), l.multiplicity));
            continue;
        }
        for t in [l.eigenvalue, -l.eigenvalue] {
            let ms = input.dirac_multiplicity(t);
            let twice = l.multiplicity + ms;
            if twice % 2 != 0 {
                return Err(Error::Parity {
                    eigenvalue: t,
                    laplace: l.multiplicity,
                    dirac: ms,
                });
            }
            pts.push((on_imaginary_axis(t), twice / 2));
        }
    }
    Ok(Divisor::from_points(pts))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqrtMismatch {
    pub location: Complex64,
    pub symmetrized: i64,
    pub super_order: i64,
    pub selberg: i64,
}

/// Outcome of comparing `2·ord(Z_S) = ord(S) + ord(S^s)` pointwise.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SqrtCheck {
    pub locations_checked: usize,
    pub mismatches: Vec<SqrtMismatch>,
}

impl SqrtCheck {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks `Z_S = √(S · S^s)` at the level of divisors.
pub fn combine_sqrt_check(
    symmetrized: &Divisor,
    super_zeta: &Divisor,
    selberg_b: &Divisor,
) -> SqrtCheck {
    let mut locations: Vec<Complex64> = symmetrized
        .points()
        .iter()
        .chain(super_zeta.points())
        .chain(selberg_b.points())
        .map(|p| p.location)
        .collect();
    locations.sort_by(cmp_location);
    locations.dedup();

    let mismatches = locations
        .iter()
        .filter_map(|&z| {
            let (a, b, c) = (
                symmetrized.order_at(z),
                super_zeta.order_at(z),
                selberg_b.order_at(z),
            );
            (2 * c != a + b).then_some(SqrtMismatch {
                location: z,
                symmetrized: a,
                super_order: b,
                selberg: c,
            })
        })
        .collect();
    SqrtCheck {
        locations_checked: locations.len(),
        mismatches,
    }
}
