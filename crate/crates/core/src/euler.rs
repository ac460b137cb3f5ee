//! Euler-product evaluation of the Selberg, Ruelle, symmetrized and super
//! zeta functions from a truncated length spectrum.
//!
//! Every local factor is a determinant `det(1 - A)` with spectral radius of
//! `A` below one, and its logarithm is taken through the trace expansion
//! `log det(1 - A) = -Σ_{m≥1} tr(A^m)/m`. That fixes the branch without any
//! winding bookkeeping. For the Selberg factor the product over symmetric
//! powers is summed in closed form inside the trace:
//! `Σ_k tr S^k(P^m) = 1/det(1 - P^m)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::spectra::{Dimension, LengthSpectrum, PrimeGeodesic, SpectrumOrigin};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Hard cap on trace-expansion terms per factor.
const MAX_TRACE_TERMS: usize = 200_000;

/// Geodesics per work unit; fixed so the summation order never depends on
/// the thread count.
const CHUNK: usize = 4096;

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// A character of the maximal torus of `M`, given by its weights against the
/// holonomy angles. For `n = 3` this is a single integer `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SigmaCharacter {
    weights: Vec<i64>,
    label: String,
}

impl SigmaCharacter {
    pub fn new(weights: Vec<i64>, label: impl Into<String>) -> Self {
        SigmaCharacter {
            weights,
            label: label.into(),
        }
    }

    pub fn trivial(dimension: Dimension) -> Self {
        SigmaCharacter::new(vec![0; dimension.rank()], "trivial")
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn validate(&self, dimension: Dimension) -> Result<()> {
        if self.weights.len() != dimension.rank() {
            return Err(Error::validation(format!(
                "sigma needs {} weights in dimension {dimension}, got {}",
                dimension.rank(),
                self.weights.len()
            )));
        }
        Ok(())
    }

    /// `wσ` for the nontrivial Weyl element: the last weight changes sign.
    pub fn weyl_reflection(&self) -> SigmaCharacter {
        let mut weights = self.weights.clone();
        if let Some(last) = weights.last_mut() {
            *last = -*last;
        }
        SigmaCharacter::new(weights, format!("w·{}", self.label))
    }

    pub fn is_weyl_invariant(&self) -> bool {
        self.weights.last().is_none_or(|&w| w == 0)
    }
}

impl fmt::Display for SigmaCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self.weights.iter().map(i64::to_string).collect();
        write!(f, "{}[{}]", self.label, ws.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ZetaKind {
    Selberg,
    Ruelle,
    /// `S(s, σ) = Z_S(s, σ) · Z_S(s, wσ)`.
    SymmetrizedS,
    /// `S^s(s, σ) = Z_S(s, σ) / Z_S(s, wσ)`.
    SuperS,
}

impl ZetaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ZetaKind::Selberg => "selberg",
            ZetaKind::Ruelle => "ruelle",
            ZetaKind::SymmetrizedS => "sym",
            ZetaKind::SuperS => "super",
        }
    }

    /// Abscissa of absolute convergence in units of `ρ`.
    fn abscissa(self, rho: f64) -> f64 {
        match self {
            ZetaKind::Ruelle => 2.0 * rho,
            _ => rho,
        }
    }
}

impl FromStr for ZetaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "selberg" => Ok(ZetaKind::Selberg),
            "ruelle" => Ok(ZetaKind::Ruelle),
            "sym" => Ok(ZetaKind::SymmetrizedS),
            "super" => Ok(ZetaKind::SuperS),
            other => Err(Error::validation(format!(
                "unknown zeta kind {other:?} (expected selberg|ruelle|sym|super)"
            ))),
        }
    }
}

impl fmt::Display for ZetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRequest {
    pub s: Complex64,
    pub kind: ZetaKind,
    pub sigma: SigmaCharacter,
    /// Budget for the truncated trace expansions, summed over the spectrum.
    pub tail_tolerance: f64,
    /// Distance required beyond the convergence abscissa.
    pub margin: f64,
}

impl EvalRequest {
    pub fn new(s: Complex64, kind: ZetaKind, sigma: SigmaCharacter) -> Self {
        EvalRequest {
            s,
            kind,
            sigma,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = tol;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }
}

/// Logarithm of a zeta function together with a bound on its error.
///
/// `truncation_bound = series_bound + cutoff_bound + rounding_bound`:
/// the omitted trace-expansion terms, the geodesics longer than the cutoff
/// (estimated from the prime-geodesic growth `e^{2ρL}/(2ρL)`), and
/// floating-point accumulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub log_value: Complex64,
    pub truncation_bound: f64,
    pub series_bound: f64,
    pub cutoff_bound: f64,
    pub rounding_bound: f64,
    pub terms_used: u64,
    /// True when the cutoff bound rests on an assumed geodesic density
    /// rather than on data we generated ourselves.
    pub tail_conditional: bool,
}

impl EvalResult {
    /// Error bound for comparisons between evaluations over the same finite
    /// spectrum, where the missing-geodesic tail is common to both sides.
    pub fn finite_spectrum_bound(&self) -> f64 {
        self.series_bound + self.rounding_bound
    }
}

/// Logarithm of one local factor with its truncation bound.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocalLog {
    pub value: Complex64,
    pub bound: f64,
    pub terms: usize,
    /// Sum of the moduli of the terms that were added.
    pub abs_terms: f64,
}

/// Eigenvalues of the stable monodromy `P_c^s`: `e^{-l} e^{±iθ_j}`.
pub fn stable_eigenvalues(c: &PrimeGeodesic, dimension: Dimension) -> Result<Vec<Complex64>> {
    if c.holonomy_angles.len() != dimension.rank() {
        return Err(Error::validation(format!(
            "dimension {dimension} needs {} holonomy angles, got {}",
            dimension.rank(),
            c.holonomy_angles.len()
        )));
    }
    let r = (-c.length).exp();
    Ok(c.holonomy_angles
        .iter()
        .flat_map(|&theta| {
            let z = Complex64::from_polar(r, theta);
            [z, z.conj()]
        })
        .collect())
}

/// Eigenvalues of `μ_{χ,σ}(c) = χ(γ) ⊗ σ(m_c)` for a torus weight.
pub fn monodromy_eigenvalues(c: &PrimeGeodesic, weights: &[i64]) -> Vec<Complex64> {
    let phase = Complex64::from_polar(1.0, weight_angle(c, weights));
    c.twist_eigenvalues.iter().map(|chi| chi * phase).collect()
}

fn weight_angle(c: &PrimeGeodesic, weights: &[i64]) -> f64 {
    weights
        .iter()
        .zip(&c.holonomy_angles)
        .map(|(&w, &theta)| w as f64 * theta)
        .sum()
}

/// `log det(1 - A)` from the eigenvalues of `A` via `-Σ tr(A^m)/m`,
/// truncated once the geometric tail is below `eps`.
pub fn log_det_one_minus(eigenvalues: &[Complex64], eps: f64) -> Result<LocalLog> {
    let radius = eigenvalues.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if eigenvalues.is_empty() || radius == 0.0 {
        return Ok(LocalLog::default());
    }
    if radius >= 1.0 {
        return Err(Error::SeriesDivergence(format!(
            "spectral radius {radius} is not below 1"
        )));
    }
    let d = eigenvalues.len() as f64;
    let mut powers = eigenvalues.to_vec();
    let mut out = LocalLog::default();
    let mut radius_pow = radius;
    for m in 1..=MAX_TRACE_TERMS {
        let trace: Complex64 = powers.iter().sum();
        let term = trace / m as f64;
        out.value -= term;
        out.abs_terms += term.norm();
        radius_pow *= radius;
        let tail = d * radius_pow / ((m + 1) as f64 * (1.0 - radius));
        if tail <= eps {
            out.bound = tail;
            out.terms = m;
            return Ok(out);
        }
        for (p, a) in powers.iter_mut().zip(eigenvalues) {
            *p *= a;
        }
    }
    Err(Error::SeriesDivergence(format!(
        "trace expansion needs more than {MAX_TRACE_TERMS} terms"
    )))
}

/// Log of the local Ruelle factor `det(1 - μ e^{-s l})^{(-1)^{n-1}}`.
pub fn log_ruelle_local(
    c: &PrimeGeodesic,
    s: Complex64,
    sigma: &SigmaCharacter,
    dimension: Dimension,
    eps: f64,
) -> Result<LocalLog> {
    let y = (-s * c.length).exp();
    let eigs: Vec<Complex64> = monodromy_eigenvalues(c, sigma.weights())
        .into_iter()
        .map(|mu| mu * y)
        .collect();
    let mult = f64::from(c.multiplicity);
    let local = log_det_one_minus(&eigs, eps / mult)?;
    let sign = if dimension.stable_dim().is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(LocalLog {
        value: local.value * (sign * mult),
        bound: local.bound * mult,
        terms: local.terms,
        abs_terms: local.abs_terms * mult,
    })
}

/// Log of the local Selberg factor `Π_k det(1 - μ ⊗ S^k(P^s) e^{-(s+ρ)l})`,
/// with multiplicity applied.
pub fn log_selberg_local(
    c: &PrimeGeodesic,
    s: Complex64,
    sigma: &SigmaCharacter,
    rho: f64,
    dimension: Dimension,
    eps: f64,
) -> Result<LocalLog> {
    if s.re <= rho {
        return Err(Error::Convergence {
            re_s: s.re,
            abscissa: rho,
        });
    }
    let weights = [(sigma.weights().to_vec(), 1.0)];
    selberg_local_weighted(c, s, &weights, rho, dimension, eps)
}

/// `Σ_w coeff_w · log Z_S,c(s, w)` for a list of torus weights, sharing one
/// pass over the trace expansion. Assumes `Re(s) + ρ > 0`.
fn selberg_local_weighted(
    c: &PrimeGeodesic,
    s: Complex64,
    weights: &[(Vec<i64>, f64)],
    rho: f64,
    dimension: Dimension,
    eps: f64,
) -> Result<LocalLog> {
    let d = c.twist_eigenvalues.len();
    if d == 0 || weights.is_empty() {
        return Ok(LocalLog::default());
    }
    let mult = f64::from(c.multiplicity);
    let eps = eps / mult;
    let x = (-(s + rho) * c.length).exp();
    let x_abs = x.norm();
    let stable = stable_eigenvalues(c, dimension)?;
    let stable_floor = (1.0 - (-c.length).exp()).powi(dimension.stable_dim() as i32);
    let coeff_abs: f64 = weights.iter().map(|(_, w)| w.abs()).sum();
    let scale = coeff_abs * d as f64 / ((1.0 - x_abs) * stable_floor);

    let phases: Vec<Complex64> = weights
        .iter()
        .map(|(w, _)| Complex64::from_polar(1.0, weight_angle(c, w)))
        .collect();
    let mut phase_pow = phases.clone();
    let mut chi_pow = c.twist_eigenvalues.clone();
    let mut stable_pow = stable.clone();
    let mut x_pow = x;
    let mut x_abs_pow = x_abs;

    let mut out = LocalLog::default();
    for m in 1..=MAX_TRACE_TERMS {
        let chi_trace: Complex64 = chi_pow.iter().sum();
        let weighted: Complex64 = weights
            .iter()
            .zip(&phase_pow)
            .map(|((_, coeff), p)| p * *coeff)
            .sum();
        let det: Complex64 = stable_pow
            .iter()
            .map(|b| Complex64::new(1.0, 0.0) - b)
            .product();
        let term = chi_trace * weighted * x_pow / (det * m as f64);
        out.value -= term;
        out.abs_terms += term.norm();

        x_abs_pow *= x_abs;
        let tail = scale * x_abs_pow / (m + 1) as f64;
        if tail <= eps {
            out.terms = m;
            out.bound = tail * mult;
            out.value *= mult;
            out.abs_terms *= mult;
            return Ok(out);
        }
        x_pow *= x;
        for (p, b) in chi_pow.iter_mut().zip(&c.twist_eigenvalues) {
            *p *= b;
        }
        for (p, b) in phase_pow.iter_mut().zip(&phases) {
            *p *= b;
        }
        for (p, b) in stable_pow.iter_mut().zip(&stable) {
            *p *= b;
        }
    }
    Err(Error::SeriesDivergence(format!(
        "selberg trace expansion for length {} needs more than {MAX_TRACE_TERMS} terms",
        c.length
    )))
}

#[derive(Clone, Copy, Default)]
struct Accumulator {
    sum: CompensatedSum,
    series_bound: f64,
    local_rounding: f64,
    terms: u64,
}

impl Accumulator {
    fn push(&mut self, local: LocalLog) {
        self.sum.add(local.value);
        self.series_bound += local.bound;
        self.local_rounding += 8.0 * UNIT_ROUNDOFF * (local.terms as f64 + 4.0) * local.abs_terms;
        self.terms += local.terms as u64;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.sum.merge(&other.sum);
        self.series_bound += other.series_bound;
        self.local_rounding += other.local_rounding;
        self.terms += other.terms;
    }
}

fn accumulate<F>(spectrum: &LengthSpectrum, local: F) -> Result<Accumulator>
where
    F: Fn(&PrimeGeodesic) -> Result<LocalLog> + Sync,
{
    let partials: Vec<Result<Accumulator>> = spectrum
        .geodesics()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Accumulator::default();
            for g in chunk {
                acc.push(local(g)?);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accumulator::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

/// Bound on `Σ_{l(c) > L} |local log|` from the geodesic growth
/// `dN ≤ e^{2ρl}/l dl`. `weight_sum` is the total `|coeff|` of the Selberg
/// weights involved (unused for Ruelle).
fn missing_geodesic_bound(
    spectrum: &LengthSpectrum,
    kind: ZetaKind,
    re_s: f64,
    weight_sum: f64,
) -> Result<f64> {
    let rho = spectrum.rho();
    let cutoff = spectrum.cutoff();
    if 2.0 * rho * cutoff > 700.0 {
        return Err(Error::Overflow(format!(
            "e^(2ρL) with 2ρL = {} is not representable",
            2.0 * rho * cutoff
        )));
    }
    let d = spectrum.max_twist_dim() as f64;
    let bound = match kind {
        ZetaKind::Ruelle => {
            let gap = re_s - 2.0 * rho;
            d * (-gap * cutoff).exp() / (cutoff * gap * (1.0 - (-re_s * cutoff).exp()))
        }
        _ => {
            let gap = re_s - rho;
            let stable_floor =
                (1.0 - (-cutoff).exp()).powi(spectrum.dimension().stable_dim() as i32);
            weight_sum * d * (-gap * cutoff).exp()
                / (cutoff * gap * (1.0 - (-(re_s + rho) * cutoff).exp()) * stable_floor)
        }
    };
    Ok(bound)
}

fn finish(
    spectrum: &LengthSpectrum,
    acc: Accumulator,
    cutoff_bound: f64,
) -> EvalResult {
    let rounding_bound = acc.sum.rounding_bound() + acc.local_rounding;
    let series_bound = acc.series_bound;
    EvalResult {
        log_value: acc.sum.value(),
        truncation_bound: series_bound + cutoff_bound + rounding_bound,
        series_bound,
        cutoff_bound,
        rounding_bound,
        terms_used: acc.terms,
        tail_conditional: spectrum.origin() == SpectrumOrigin::Ingested,
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::validation(format!(
            "tail tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

fn check_abscissa(s: Complex64, abscissa: f64, margin: f64) -> Result<()> {
    if !(margin > 0.0) {
        return Err(Error::validation(format!("margin must be positive, got {margin}")));
    }
    if !(s.re > abscissa + margin) {
        return Err(Error::Convergence {
            re_s: s.re,
            abscissa,
        });
    }
    Ok(())
}

/// `Σ_w coeff_w · log Z_S(s, w)` over the whole spectrum.
///
/// This is the building block for the symmetrized and super zeta functions
/// and for the shifted terms of the Fried relation, where a reducible
/// `τ ⊗ σ` is expanded into its torus weights.
pub fn log_selberg_weighted(
    spectrum: &LengthSpectrum,
    s: Complex64,
    weights: &[(Vec<i64>, f64)],
    tail_tolerance: f64,
    margin: f64,
) -> Result<EvalResult> {
    check_tolerance(tail_tolerance)?;
    let dimension = spectrum.dimension();
    for (w, _) in weights {
        if w.len() != dimension.rank() {
            return Err(Error::validation(format!(
                "weight {w:?} has wrong arity for dimension {dimension}"
            )));
        }
    }
    let rho = spectrum.rho();
    check_abscissa(s, rho, margin)?;
    let per_class = tail_tolerance / spectrum.class_count().max(1) as f64;
    let acc = accumulate(spectrum, |g| {
        selberg_local_weighted(g, s, weights, rho, dimension, per_class * f64::from(g.multiplicity))
    })?;
    let weight_sum = weights.iter().map(|(_, c)| c.abs()).sum();
    let cutoff = missing_geodesic_bound(spectrum, ZetaKind::Selberg, s.re, weight_sum)?;
    Ok(finish(spectrum, acc, cutoff))
}

/// `log Z(s)` for the requested zeta function, summed over every geodesic in
/// the spectrum.
pub fn log_zeta(spectrum: &LengthSpectrum, req: &EvalRequest) -> Result<EvalResult> {
    check_tolerance(req.tail_tolerance)?;
    let dimension = spectrum.dimension();
    req.sigma.validate(dimension)?;
    let sigma = req.sigma.weights().to_vec();
    let reflected = req.sigma.weyl_reflection().weights().to_vec();
    let weights = match req.kind {
        ZetaKind::Ruelle => {
            check_abscissa(req.s, req.kind.abscissa(spectrum.rho()), req.margin)?;
            let per_class = req.tail_tolerance / spectrum.class_count().max(1) as f64;
            let acc = accumulate(spectrum, |g| {
                log_ruelle_local(
                    g,
                    req.s,
                    &req.sigma,
                    dimension,
                    per_class * f64::from(g.multiplicity),
                )
            })?;
            let cutoff = missing_geodesic_bound(spectrum, ZetaKind::Ruelle, req.s.re, 1.0)?;
            return Ok(finish(spectrum, acc, cutoff));
        }
        ZetaKind::Selberg => vec![(sigma, 1.0)],
        ZetaKind::SymmetrizedS => vec![(sigma, 1.0), (reflected, 1.0)],
        ZetaKind::SuperS => vec![(sigma, 1.0), (reflected, -1.0)],
    };
    log_selberg_weighted(spectrum, req.s, &weights, req.tail_tolerance, req.margin)
}
