use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::growth::{genus_of, MIN_ZEROS};
use super::product::{canonical_product, LogProduct, ProductValue};
use super::zeros::{ZeroSet, ZeroTail};
use crate::error::{Error, Result};
use crate::spectra::Dimension;

/// Largest singular-value ratio accepted by [`fit_g`].
pub const MAX_CONDITION: f64 = 1e12;

/// A zero set together with the genus used for its canonical product.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorComponent {
    pub genus: u32,
    pub zeros: ZeroSet,
}

impl FactorComponent {
    pub fn new(zeros: ZeroSet, genus: u32) -> Result<Self> {
        let n = zeros.dimension().get();
        if genus > n {
            return Err(Error::validation(format!("genus {genus} exceeds the dimension {n}")));
        }
        Ok(FactorComponent { genus, zeros })
    }

    /// Genus from [`genus_of`]. With fewer than [`MIN_ZEROS`] zeros a
    /// complete set is finite and gets genus 0, and a truncated one gets the
    /// dimension, the largest genus the growth bound allows.
    pub fn with_estimated_genus(zeros: ZeroSet) -> Result<Self> {
        let genus = if zeros.total_multiplicity() >= MIN_ZEROS {
            genus_of(&zeros)?.genus
        } else if zeros.tail().is_complete() {
            0
        } else {
            zeros.dimension().get()
        };
        Ok(FactorComponent { genus, zeros })
    }

    fn log_product(&self, s: Complex64, tolerance: f64) -> Result<ProductValue> {
        canonical_product(&self.zeros, self.genus, s, tolerance)
    }
}

/// `f(s) = s^{m0} e^{g(s)} W1(s) / W2(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    dimension: Dimension,
    /// Order at the origin; negative for a pole.
    pub m0: i64,
    /// Coefficients of `g`, constant term first.
    pub g: Vec<Complex64>,
    pub z1: FactorComponent,
    pub z2: FactorComponent,
}

impl Factorization {
    pub fn new(m0: i64, g: Vec<Complex64>, z1: FactorComponent, z2: FactorComponent) -> Result<Self> {
        let dimension = z1.zeros.dimension();
        if z2.zeros.dimension() != dimension {
            return Err(Error::validation("zero and pole sets disagree on the dimension"));
        }
        let n = dimension.get() as usize;
        if g.len() > n + 1 {
            return Err(Error::validation(format!(
                "g has degree {} but at most {n} is allowed",
                g.len() - 1
            )));
        }
        if g.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::validation("g has a non-finite coefficient"));
        }
        Ok(Factorization {
            dimension,
            m0,
            g,
            z1,
            z2,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// The persisted document `{"dimension", "m0", "g", "z1", "z2"}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let component = |c: &FactorComponent| ComponentDoc {
            genus: c.genus,
            zeros: c.zeros.zeros().iter().map(|(z, m)| (z.re, z.im, *m)).collect(),
            tail: c.zeros.tail(),
        };
        let doc = FactorizationDoc {
            dimension: Some(self.dimension.get()),
            m0: self.m0,
            g: self.g.iter().map(|c| [c.re, c.im]).collect(),
            z1: component(&self.z1),
            z2: component(&self.z2),
        };
        serde_json::to_value(doc).expect("factorization document serializes")
    }

    pub fn save_json<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, &self.to_json_value())?;
        writeln!(writer)?;
        Ok(())
    }

    /// Reads a document written by [`Factorization::save_json`]; keys other
    /// than the five persisted ones are ignored.
    pub fn load_json<R: Read>(reader: R) -> Result<Self> {
        let doc: FactorizationDoc = serde_json::from_reader(reader)?;
        let degree = doc.g.len().saturating_sub(1) as u32;
        let n = match doc.dimension {
            Some(n) => n,
            None => {
                let needed = degree.max(doc.z1.genus).max(doc.z2.genus).max(3);
                needed + 1 - needed % 2
            }
        };
        let dimension = Dimension::new(n)?;
        let component = |c: ComponentDoc| -> Result<FactorComponent> {
            let zeros = ZeroSet::new(
                c.zeros.into_iter().map(|(re, im, m)| (Complex64::new(re, im), m)).collect(),
                dimension,
            )?
            .with_tail(c.tail)?;
            FactorComponent::new(zeros, c.genus)
        };
        Factorization::new(
            doc.m0,
            doc.g.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
            component(doc.z1)?,
            component(doc.z2)?,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct FactorizationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<u32>,
    m0: i64,
    g: Vec<[f64; 2]>,
    z1: ComponentDoc,
    z2: ComponentDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    genus: u32,
    zeros: Vec<(f64, f64, u32)>,
    #[serde(default = "complete", skip_serializing_if = "ZeroTail::is_complete")]
    tail: ZeroTail,
}

fn complete() -> ZeroTail {
    ZeroTail::Complete
}

/// Least-squares polynomial `g` with its fit diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct GFit {
    pub coefficients: Vec<Complex64>,
    pub max_residual: f64,
    pub rms_residual: f64,
    pub condition_number: f64,
    /// Largest tail-plus-rounding bound of the canonical products over the
    /// samples.
    pub product_bound: f64,
}

fn finite_log(v: ProductValue, s: Complex64) -> Result<LogProduct> {
    match v {
        ProductValue::Finite(p) => Ok(p),
        ProductValue::Zero { .. } => Err(Error::validation(format!(
            "sample point {s} is a zero or pole of the factorization"
        ))),
    }
}

fn principal_im(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Fits `g(s) = log f(s) - m0 log s - log W1(s) + log W2(s)` by a polynomial
/// of the given degree.
///
/// `samples` are `(s, log f(s))` ordered along a path; the imaginary part is
/// unwound so that consecutive samples differ by at most `π`. The constant
/// term is returned with imaginary part in `(-π, π]`.
pub fn fit_g(
    samples: &[(Complex64, Complex64)],
    m0: i64,
    z1: &FactorComponent,
    z2: &FactorComponent,
    degree: usize,
    tail_tolerance: f64,
) -> Result<GFit> {
    let n = z1.zeros.dimension().get() as usize;
    if degree > n {
        return Err(Error::validation(format!(
            "degree {degree} of g exceeds the dimension {n}"
        )));
    }
    let needed = 2 * (degree + 1);
    if samples.len() < needed {
        return Err(Error::validation(format!(
            "need at least {needed} samples for degree {degree}, got {}",
            samples.len()
        )));
    }

    let mut h = Vec::with_capacity(samples.len());
    let mut product_bound: f64 = 0.0;
    for &(s, log_f) in samples {
        if !(log_f.re.is_finite() && log_f.im.is_finite()) {
            return Err(Error::validation(format!("log f({s}) is not finite")));
        }
        if m0 != 0 && s == Complex64::new(0.0, 0.0) {
            return Err(Error::validation("sample at the origin with m0 ≠ 0"));
        }
        let w1 = finite_log(z1.log_product(s, tail_tolerance / 2.0)?, s)?;
        let w2 = finite_log(z2.log_product(s, tail_tolerance / 2.0)?, s)?;
        product_bound = product_bound.max(w1.total_bound() + w2.total_bound());
        let log_s = if m0 == 0 { Complex64::new(0.0, 0.0) } else { s.ln() * m0 as f64 };
        h.push(log_f - log_s - w1.log_value + w2.log_value);
    }
    for j in 1..h.len() {
        let jump = ((h[j].im - h[j - 1].im) / TAU).round();
        h[j].im -= TAU * jump;
    }

    let scale = samples.iter().map(|(s, _)| s.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::IllConditioned("all samples at the origin".into()));
    }
    let t: Vec<Complex64> = samples.iter().map(|(s, _)| s / scale).collect();
    let a = DMatrix::from_fn(samples.len(), degree + 1, |i, k| t[i].powu(k as u32));
    let b = DMatrix::from_fn(samples.len(), 1, |i, _| h[i]);
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition_number > MAX_CONDITION {
        return Err(Error::IllConditioned(format!(
            "condition number {condition_number:.3e} of the sample matrix"
        )));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;

    let mut max_residual: f64 = 0.0;
    let mut sq = 0.0;
    for (ti, hi) in t.iter().zip(&h) {
        let fitted = (0..=degree).rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * ti + x[k]);
        let r = (hi - fitted).norm();
        max_residual = max_residual.max(r);
        sq += r * r;
    }
    let mut coefficients: Vec<Complex64> = (0..=degree)
        .map(|k| x[k] / scale.powi(k as i32))
        .collect();
    coefficients[0].im = principal_im(coefficients[0].im);

    Ok(GFit {
        coefficients,
        max_residual,
        rms_residual: (sq / samples.len() as f64).sqrt(),
        condition_number,
        product_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FactorValue {
    Finite {
        log_value: Complex64,
        /// Bound on the error of `log_value` from omitted zeros and rounding.
        bound: f64,
        tail_conditional: bool,
    },
    /// `s` is a zero of the given order.
    Zero { order: u32 },
}

impl FactorValue {
    pub fn value(&self) -> Complex64 {
        match self {
            FactorValue::Finite { log_value, .. } => log_value.exp(),
            FactorValue::Zero { .. } => Complex64::new(0.0, 0.0),
        }
    }

    /// Bound on `|f̃ - f| / |f|` implied by the log-space bound.
    pub fn relative_bound(&self) -> f64 {
        match self {
            FactorValue::Finite { bound, .. } => bound.exp_m1(),
            FactorValue::Zero { .. } => 0.0,
        }
    }
}

fn horner(coefficients: &[Complex64], s: Complex64) -> Complex64 {
    coefficients
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
}

/// `s^{m0} e^{g(s)} W1(s) / W2(s)` in log space.
pub fn evaluate_factorization(
    fact: &Factorization,
    s: Complex64,
    tail_tolerance: f64,
) -> Result<FactorValue> {
    let pole = |order: u32| Error::Pole {
        re: s.re,
        im: s.im,
        order,
    };
    if s == Complex64::new(0.0, 0.0) && fact.m0 != 0 {
        let order = u32::try_from(fact.m0.unsigned_abs())
            .map_err(|_| Error::validation("m0 is too large"))?;
        return if fact.m0 > 0 {
            Ok(FactorValue::Zero { order })
        } else {
            Err(pole(order))
        };
    }
    let w1 = fact.z1.log_product(s, tail_tolerance / 2.0)?;
    let w2 = fact.z2.log_product(s, tail_tolerance / 2.0)?;
    let (w1, w2) = match (w1, w2) {
        (ProductValue::Finite(a), ProductValue::Finite(b)) => (a, b),
        (ProductValue::Zero { multiplicity }, ProductValue::Finite(_)) => {
            return Ok(FactorValue::Zero { order: multiplicity })
        }
        (ProductValue::Finite(_), ProductValue::Zero { multiplicity }) => {
            return Err(pole(multiplicity))
        }
        (ProductValue::Zero { .. }, ProductValue::Zero { .. }) => {
            return Err(Error::validation(format!("{s} is both a zero and a pole")))
        }
    };
    let log_s = if fact.m0 == 0 { Complex64::new(0.0, 0.0) } else { s.ln() * fact.m0 as f64 };
    let g = horner(&fact.g, s);
    let log_value = log_s + g + w1.log_value - w2.log_value;
    if !(log_value.re.is_finite() && log_value.im.is_finite()) {
        return Err(Error::Overflow(format!("factorization at {s}")));
    }
    let g_rounding: f64 = 4.0
        * f64::EPSILON
        * fact
            .g
            .iter()
            .enumerate()
            .map(|(k, c)| (k as f64 + 1.0) * c.norm() * s.norm().powi(k as i32))
            .sum::<f64>();
    Ok(FactorValue::Finite {
        log_value,
        bound: w1.total_bound() + w2.total_bound() + g_rounding + 4.0 * f64::EPSILON * log_s.norm(),
        tail_conditional: w1.tail_conditional || w2.tail_conditional,
    })
}
