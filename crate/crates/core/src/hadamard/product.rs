use num_complex::Complex64;
use rayon::prelude::*;

use super::elementary::log_elementary_factor;
use super::zeros::{ZeroSet, ZeroTail};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

const CHUNK: usize = 4096;

/// `log W(s)` as a sum of `multiplicity · log E(s/z, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogProduct {
    pub log_value: Complex64,
    /// Bound on the contribution of the omitted zeros.
    pub tail_bound: f64,
    pub rounding_bound: f64,
    /// Set when the tail bound rests on a declared rather than exact density.
    pub tail_conditional: bool,
}

impl LogProduct {
    pub fn total_bound(&self) -> f64 {
        self.tail_bound + self.rounding_bound
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProductValue {
    Finite(LogProduct),
    /// `s` is a stored zero of the given multiplicity.
    Zero { multiplicity: u32 },
}

impl ProductValue {
    pub fn value(&self) -> Complex64 {
        match self {
            ProductValue::Finite(p) => p.log_value.exp(),
            ProductValue::Zero { .. } => Complex64::new(0.0, 0.0),
        }
    }

    pub fn finite(&self) -> Option<&LogProduct> {
        match self {
            ProductValue::Finite(p) => Some(p),
            ProductValue::Zero { .. } => None,
        }
    }
}

/// Bound on `Σ_{|z| > R} |log E(s/z, p)|` under the declared density.
fn tail_bound(tail: ZeroTail, genus: u32, s: Complex64) -> f64 {
    match tail {
        ZeroTail::Complete => 0.0,
        ZeroTail::Density {
            coefficient,
            exponent,
            radius,
        } => {
            let q = f64::from(genus) + 1.0;
            let ratio = s.norm() / radius;
            if ratio >= 1.0 || q <= exponent {
                return f64::INFINITY;
            }
            if coefficient == 0.0 || ratio == 0.0 {
                return 0.0;
            }
            coefficient * radius.powf(exponent) * ratio.powf(q) / ((1.0 - ratio) * (q - exponent))
        }
    }
}

/// Canonical product `W(s) = Π E(s/z, p)` over the zero set, in log space.
pub fn canonical_product(
    zeros: &ZeroSet,
    genus: u32,
    s: Complex64,
    tail_tolerance: f64,
) -> Result<ProductValue> {
    if !(tail_tolerance.is_finite() && tail_tolerance > 0.0) {
        return Err(Error::validation(format!(
            "tail tolerance must be positive, got {tail_tolerance}"
        )));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::validation(format!("evaluation point {s} is not finite")));
    }
    let hit = zeros.multiplicity_at(s);
    if hit > 0 {
        return Ok(ProductValue::Zero { multiplicity: hit });
    }
    let tail = tail_bound(zeros.tail(), genus, s);
    if tail > tail_tolerance {
        return Err(Error::TailUnachievable {
            bound: tail,
            tolerance: tail_tolerance,
        });
    }

    let partials: Vec<CompensatedSum> = zeros
        .zeros()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = CompensatedSum::new();
            for &(z, m) in chunk {
                acc.add(log_elementary_factor(s / z, genus) * f64::from(m));
            }
            acc
        })
        .collect();
    let mut total = CompensatedSum::new();
    for p in &partials {
        total.merge(p);
    }
    let log_value = total.value();
    if !(log_value.re.is_finite() && log_value.im.is_finite()) {
        return Err(Error::Overflow(format!("canonical product at {s}")));
    }
    let per_term = (f64::from(genus) + 8.0) * f64::EPSILON;
    Ok(ProductValue::Finite(LogProduct {
        log_value,
        tail_bound: tail,
        rounding_bound: total.rounding_bound() + per_term * total.abs_sum(),
        tail_conditional: !zeros.tail().is_complete(),
    }))
}
