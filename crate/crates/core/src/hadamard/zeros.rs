use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::spectra::Dimension;

/// What is known about the zeros that are not stored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroTail {
    /// Every zero is stored.
    Complete,
    /// All stored zeros have `|z| ≤ radius`, every omitted one has
    /// `|z| > radius`, and the omitted counting function satisfies
    /// `n(r) - n(radius) ≤ coefficient · r^exponent` for `r ≥ radius`.
    Density {
        coefficient: f64,
        exponent: f64,
        radius: f64,
    },
}

impl ZeroTail {
    pub fn is_complete(&self) -> bool {
        matches!(self, ZeroTail::Complete)
    }
}

/// Nonzero points with multiplicities `≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    zeros: Vec<(Complex64, u32)>,
    dimension: Dimension,
    tail: ZeroTail,
}

impl ZeroSet {
    pub fn new(zeros: Vec<(Complex64, u32)>, dimension: Dimension) -> Result<Self> {
        for (i, (z, m)) in zeros.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::validation(format!("zero {i} is not finite")));
            }
            if *z == Complex64::new(0.0, 0.0) {
                return Err(Error::validation(format!(
                    "zero {i} is at the origin; use m0 for that order"
                )));
            }
            if *m == 0 {
                return Err(Error::validation(format!("zero {i} has multiplicity 0")));
            }
        }
        Ok(ZeroSet {
            zeros,
            dimension,
            tail: ZeroTail::Complete,
        })
    }

    /// Declares the omitted zeros; the stored ones must lie in `|z| ≤ radius`.
    pub fn with_tail(mut self, tail: ZeroTail) -> Result<Self> {
        if let ZeroTail::Density {
            coefficient,
            exponent,
            radius,
        } = tail
        {
            let ok = coefficient.is_finite()
                && coefficient >= 0.0
                && exponent.is_finite()
                && exponent >= 0.0
                && radius.is_finite()
                && radius > 0.0;
            if !ok {
                return Err(Error::validation(format!("invalid zero density {tail:?}")));
            }
            if let Some((z, _)) = self.zeros.iter().find(|(z, _)| z.norm() > radius) {
                return Err(Error::validation(format!(
                    "stored zero {z} lies beyond the declared radius {radius}"
                )));
            }
        }
        self.tail = tail;
        Ok(self)
    }

    pub fn zeros(&self) -> &[(Complex64, u32)] {
        &self.zeros
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn tail(&self) -> ZeroTail {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Number of zeros counted with multiplicity.
    pub fn total_multiplicity(&self) -> u64 {
        self.zeros.iter().map(|(_, m)| u64::from(*m)).sum()
    }

    /// Multiplicity of the stored zero exactly at `s`, or 0.
    pub fn multiplicity_at(&self, s: Complex64) -> u32 {
        self.zeros
            .iter()
            .filter(|(z, _)| *z == s)
            .map(|(_, m)| m)
            .sum()
    }
}

/// A divisor split as `m0` at the origin, zeros `z1` and poles `z2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitDivisor {
    /// Order at the origin; negative for a pole.
    pub m0: i64,
    pub z1: ZeroSet,
    pub z2: ZeroSet,
}

pub fn split_divisor(divisor: &Divisor, dimension: Dimension) -> Result<SplitDivisor> {
    let mut m0 = 0;
    let mut zeros = Vec::new();
    let mut poles = Vec::new();
    for p in divisor.points() {
        if p.location == Complex64::new(0.0, 0.0) {
            m0 = p.order;
            continue;
        }
        let mult = u32::try_from(p.order.unsigned_abs())
            .map_err(|_| Error::validation(format!("order {} is too large", p.order)))?;
        if p.order > 0 {
            zeros.push((p.location, mult));
        } else {
            poles.push((p.location, mult));
        }
    }
    Ok(SplitDivisor {
        m0,
        z1: ZeroSet::new(zeros, dimension)?,
        z2: ZeroSet::new(poles, dimension)?,
    })
}
