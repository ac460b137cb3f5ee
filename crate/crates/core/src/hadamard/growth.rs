use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::zeros::ZeroSet;
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, log_space};

/// Fewest zeros (with multiplicity) for the exponent and genus estimators.
pub const MIN_ZEROS: u64 = 100;
/// Fewest circles accepted by [`estimate_order`].
pub const MIN_RADII: usize = 5;
/// Fewest angular samples per circle.
pub const MIN_ANGLES: usize = 64;

const EXPONENT_RADII: usize = 64;
const GENUS_BINS: usize = 16;
const MIN_FILLED_BINS: usize = 4;
/// A partial-sum bin slope below `-GENUS_SLOPE_MARGIN` counts as convergent.
const GENUS_SLOPE_MARGIN: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentEstimate {
    pub exponent: f64,
    pub fit_rms: f64,
    /// The moduli span less than a factor 2, so the set is treated as finite.
    pub bounded: bool,
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenusEstimate {
    pub genus: u32,
    /// The tail test did not converge for any `p ≤ n`.
    pub clamped: bool,
    pub bounded: bool,
    /// Bin slope of `Σ|z|^{-(p+1)}` for each tested `p`.
    pub slopes: Vec<f64>,
}

/// Moduli sorted ascending with cumulative multiplicities.
fn sorted_moduli(zeros: &ZeroSet) -> Result<(Vec<f64>, Vec<u64>)> {
    let total = zeros.total_multiplicity();
    if total < MIN_ZEROS {
        return Err(Error::TooFewZeros {
            needed: MIN_ZEROS as usize,
            got: total as usize,
        });
    }
    let mut pairs: Vec<(f64, u32)> = zeros.zeros().iter().map(|(z, m)| (z.norm(), *m)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cumulative = Vec::with_capacity(pairs.len());
    let mut acc = 0u64;
    for (_, m) in &pairs {
        acc += u64::from(*m);
        cumulative.push(acc);
    }
    Ok((pairs.into_iter().map(|p| p.0).collect(), cumulative))
}

fn is_bounded(moduli: &[f64]) -> bool {
    let (lo, hi) = (moduli[0], moduli[moduli.len() - 1]);
    (hi / lo).ln() < std::f64::consts::LN_2
}

/// Slope of `log n(r)` against `log r` over the outer half of the log-radius
/// range, `n` counting zeros with multiplicity.
pub fn convergence_exponent(zeros: &ZeroSet) -> Result<ExponentEstimate> {
    let (moduli, cumulative) = sorted_moduli(zeros)?;
    let (lo, hi) = (moduli[0], moduli[moduli.len() - 1]);
    if is_bounded(&moduli) {
        return Ok(ExponentEstimate {
            exponent: 0.0,
            fit_rms: 0.0,
            bounded: true,
            window: (lo, hi),
        });
    }
    let mid = (lo * hi).sqrt();
    let (xs, ys): (Vec<f64>, Vec<f64>) = log_space(mid, hi, EXPONENT_RADII)
        .into_iter()
        .map(|r| {
            let idx = moduli.partition_point(|&m| m <= r);
            (r.ln(), (cumulative[idx - 1] as f64).ln())
        })
        .unzip();
    let (_, slope, rms) = linear_fit(&xs, &ys);
    Ok(ExponentEstimate {
        exponent: slope.max(0.0),
        fit_rms: rms,
        bounded: false,
        window: (mid, hi),
    })
}

/// Smallest `p` for which the tail of `Σ |z|^{-(p+1)}` decays, judged by the
/// slope of per-bin partial sums over the outer half of the log-radius range.
pub fn genus_of(zeros: &ZeroSet) -> Result<GenusEstimate> {
    let (moduli, _) = sorted_moduli(zeros)?;
    if is_bounded(&moduli) {
        return Ok(GenusEstimate {
            genus: 0,
            clamped: false,
            bounded: true,
            slopes: Vec::new(),
        });
    }
    let (lo, hi) = (moduli[0], moduli[moduli.len() - 1]);
    let (a, b) = ((lo * hi).sqrt().ln(), hi.ln());
    let width = (b - a) / GENUS_BINS as f64;
    let max_p = zeros.dimension().get();

    let mut bins = vec![Vec::<(f64, u32)>::new(); GENUS_BINS];
    for (z, m) in zeros.zeros() {
        let r = z.norm();
        let x = r.ln();
        if x < a {
            continue;
        }
        let i = (((x - a) / width) as usize).min(GENUS_BINS - 1);
        bins[i].push((r, *m));
    }
    let centers: Vec<f64> = (0..GENUS_BINS).map(|i| a + (i as f64 + 0.5) * width).collect();

    let mut slopes = Vec::new();
    for p in 0..=max_p {
        let q = f64::from(p) + 1.0;
        let (xs, ys): (Vec<f64>, Vec<f64>) = bins
            .iter()
            .zip(&centers)
            .filter(|(bin, _)| !bin.is_empty())
            .map(|(bin, &c)| {
                let s: f64 = bin.iter().map(|(r, m)| f64::from(*m) * r.powf(-q)).sum();
                (c, s.ln())
            })
            .unzip();
        if xs.len() < MIN_FILLED_BINS {
            return Ok(GenusEstimate {
                genus: 0,
                clamped: false,
                bounded: true,
                slopes,
            });
        }
        let (_, slope, _) = linear_fit(&xs, &ys);
        slopes.push(slope);
        if slope < -GENUS_SLOPE_MARGIN {
            return Ok(GenusEstimate {
                genus: p,
                clamped: false,
                bounded: false,
                slopes,
            });
        }
    }
    Ok(GenusEstimate {
        genus: max_p,
        clamped: true,
        bounded: false,
        slopes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderPoint {
    pub radius: f64,
    /// `log M(r)`.
    pub log_max_modulus: f64,
    /// `log log M(r)` when `M(r) > 1`.
    pub log_log: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate {
    /// Slope of `log κ(r)` against `log r`, `κ = d log M / d log r`, over the
    /// outer half of the circles; clamped at 0.
    pub order: f64,
    pub fit_rms: f64,
    /// Plain slope of `log log M` against `log r` over the same circles.
    pub loglog_slope: Option<f64>,
    /// `κ` stayed positive over the fit window.
    pub increasing: bool,
    pub points: Vec<OrderPoint>,
}

/// Estimates the order of an entire function from its log-modulus sampled on
/// `angles` equally spaced points of each circle `|s| = r`.
pub fn estimate_order<F>(log_modulus: F, radii: &[f64], angles: usize) -> Result<OrderEstimate>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    if radii.len() < MIN_RADII {
        return Err(Error::validation(format!(
            "need at least {MIN_RADII} radii, got {}",
            radii.len()
        )));
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("radii must be positive and strictly increasing"));
    }
    if angles < MIN_ANGLES {
        return Err(Error::validation(format!(
            "need at least {MIN_ANGLES} angles per circle, got {angles}"
        )));
    }

    let mut points = Vec::with_capacity(radii.len());
    for &r in radii {
        let samples: Vec<f64> = (0..angles)
            .into_par_iter()
            .map(|j| {
                let theta = TAU * (j as f64 + 0.5) / angles as f64;
                log_modulus(Complex64::from_polar(r, theta))
            })
            .collect::<Result<_>>()?;
        if samples.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::Overflow(format!("maximum modulus on the circle r = {r}")));
        }
        let m = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Err(Error::validation(format!("function vanishes on the circle r = {r}")));
        }
        points.push(OrderPoint {
            radius: r,
            log_max_modulus: m,
            log_log: (m > 0.0).then(|| m.ln()),
        });
    }

    let kappa: Vec<(f64, f64)> = points
        .windows(2)
        .map(|w| {
            let (x0, x1) = (w[0].radius.ln(), w[1].radius.ln());
            ((x0 + x1) / 2.0, (w[1].log_max_modulus - w[0].log_max_modulus) / (x1 - x0))
        })
        .collect();
    let start = kappa.len() / 2;
    let window = &kappa[start.min(kappa.len() - 2)..];
    let increasing = window.iter().all(|(_, k)| *k > 0.0);
    let (order, fit_rms) = if increasing {
        let xs: Vec<f64> = window.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = window.iter().map(|p| p.1.ln()).collect();
        let (_, slope, rms) = linear_fit(&xs, &ys);
        (slope.max(0.0), rms)
    } else {
        (0.0, f64::NAN)
    };

    let outer = &points[points.len() - window.len() - 1..];
    let loglog_slope = outer.iter().all(|p| p.log_log.is_some()).then(|| {
        let xs: Vec<f64> = outer.iter().map(|p| p.radius.ln()).collect();
        let ys: Vec<f64> = outer.iter().filter_map(|p| p.log_log).collect();
        linear_fit(&xs, &ys).1
    });

    Ok(OrderEstimate {
        order,
        fit_rms,
        loglog_slope,
        increasing,
        points,
    })
}

/// [`estimate_order`] for an evaluator returning function values.
pub fn estimate_order_of_values<F>(f: F, radii: &[f64], angles: usize) -> Result<OrderEstimate>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    estimate_order(
        |s| {
            let v = f(s);
            let m = v.norm();
            if m.is_finite() {
                Ok(m.ln())
            } else {
                Err(Error::Overflow(format!("|f({s})| is not finite (r = {})", s.norm())))
            }
        },
        radii,
        angles,
    )
}
