//! The Fried relation: the Ruelle zeta function as an alternating product of
//! shifted Selberg zeta functions over the `MA`-types of `Λ^p n_ℂ`.
//!
//! For the real hyperbolic space `n_ℂ` is the standard representation of
//! `M = SO(n-1)` with `A`-weight 1, so `Λ^p n_ℂ` carries `A`-weight `p` and
//! its `M`-types are read off from sums of `p` distinct torus weights
//! `±e_j`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::euler::{
    log_selberg_weighted, log_zeta, EvalRequest, EvalResult, SigmaCharacter, ZetaKind,
    DEFAULT_MARGIN,
};
use crate::spectra::{Dimension, LengthSpectrum};

/// Largest `n - 1` for which subsets are enumerated.
const MAX_STABLE_DIM: usize = 24;

/// The part of `Λ^p n_ℂ` with exterior degree `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct FriedTerm {
    pub degree: usize,
    /// Torus weights of the `M`-types with their multiplicities.
    pub taus: Vec<(Vec<i64>, u64)>,
    /// `A`-weight; equals `degree`.
    pub lambda: f64,
    /// `(-1)^degree`.
    pub sign: i32,
}

impl FriedTerm {
    pub fn dimension(&self) -> u64 {
        self.taus.iter().map(|(_, m)| m).sum()
    }
}

/// Weight multisets of `Λ^p` of the standard `(n-1)`-dimensional
/// representation, `p = 0..=n-1`, by brute-force expansion over subsets.
pub fn fried_decomposition(dimension: Dimension) -> Vec<FriedTerm> {
    let rank = dimension.rank();
    let d = dimension.stable_dim();
    assert!(d <= MAX_STABLE_DIM, "dimension {dimension} too large to enumerate");
    let basis: Vec<Vec<i64>> = (0..rank)
        .flat_map(|j| {
            let mut plus = vec![0; rank];
            plus[j] = 1;
            let mut minus = vec![0; rank];
            minus[j] = -1;
            [plus, minus]
        })
        .collect();

    let mut by_degree: Vec<BTreeMap<Vec<i64>, u64>> = vec![BTreeMap::new(); d + 1];
    for mask in 0u32..(1u32 << d) {
        let mut w = vec![0i64; rank];
        for (i, b) in basis.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (acc, x) in w.iter_mut().zip(b) {
                    *acc += x;
                }
            }
        }
        *by_degree[mask.count_ones() as usize].entry(w).or_insert(0) += 1;
    }

    by_degree
        .into_iter()
        .enumerate()
        .map(|(p, taus)| FriedTerm {
            degree: p,
            taus: taus.into_iter().collect(),
            lambda: p as f64,
            sign: if p % 2 == 0 { 1 } else { -1 },
        })
        .collect()
}

/// `e_0, ..., e_d` of the given numbers.
pub fn elementary_symmetric(values: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); values.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (k, a) in values.iter().enumerate() {
        for p in (1..=k + 1).rev() {
            let prev = e[p - 1];
            e[p] += a * prev;
        }
    }
    e
}

/// `Π_j (1 - a_j)`.
pub fn det_one_minus(values: &[Complex64]) -> Complex64 {
    values
        .iter()
        .map(|a| Complex64::new(1.0, 0.0) - a)
        .product()
}

/// `Σ_p (-1)^p e_p(a)`, which equals `Π_j (1 - a_j)`.
pub fn alternating_elementary_sum(values: &[Complex64]) -> Complex64 {
    elementary_symmetric(values)
        .into_iter()
        .enumerate()
        .map(|(p, e)| if p % 2 == 0 { e } else { -e })
        .sum()
}

/// Both sides of the Fried relation at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct FriedReport {
    pub s: Complex64,
    pub ruelle: EvalResult,
    /// `(p, Σ_{τ} log Z_S(s + ρ - p, τ ⊗ σ))`, before the sign `(-1)^p`.
    pub selberg_terms: Vec<(usize, EvalResult)>,
    pub rhs: Complex64,
    pub residual: f64,
    /// Sum of the series and rounding bounds of every evaluation. Both sides
    /// run over the same finite set of geodesics, so this bounds the residual.
    pub comparison_bound: f64,
    /// Sum of the full truncation bounds (including the missing-geodesic tail).
    pub truncation_bound: f64,
}

impl FriedReport {
    pub fn within_bound(&self) -> bool {
        self.residual <= self.comparison_bound
    }
}

pub fn fried_check(
    spectrum: &LengthSpectrum,
    sigma: &SigmaCharacter,
    s: Complex64,
    eps: f64,
) -> Result<FriedReport> {
    fried_check_with_margin(spectrum, sigma, s, eps, DEFAULT_MARGIN)
}

/// `|log Z_R(s, σ) - Σ_p (-1)^p Σ_{(τ,λ) ∈ I_p} log Z_S(s + ρ - λ, τ ⊗ σ)|`.
pub fn fried_check_with_margin(
    spectrum: &LengthSpectrum,
    sigma: &SigmaCharacter,
    s: Complex64,
    eps: f64,
    margin: f64,
) -> Result<FriedReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::validation(format!("tolerance must be positive, got {eps}")));
    }
    let dimension = spectrum.dimension();
    sigma.validate(dimension)?;
    let rho = spectrum.rho();
    let side_eps = eps / 10.0;

    let ruelle = log_zeta(
        spectrum,
        &EvalRequest::new(s, ZetaKind::Ruelle, sigma.clone())
            .with_tail_tolerance(side_eps)
            .with_margin(margin),
    )?;

    let terms = fried_decomposition(dimension);
    let term_eps = side_eps / terms.len() as f64;
    let mut selberg_terms = Vec::with_capacity(terms.len());
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut comparison_bound = ruelle.finite_spectrum_bound();
    let mut truncation_bound = ruelle.truncation_bound;
    for term in &terms {
        let weights: Vec<(Vec<i64>, f64)> = term
            .taus
            .iter()
            .map(|(tau, mult)| {
                let w = tau.iter().zip(sigma.weights()).map(|(a, b)| a + b).collect();
                (w, *mult as f64)
            })
            .collect();
        let shifted = s + rho - term.lambda;
        let r = log_selberg_weighted(spectrum, shifted, &weights, term_eps, margin)?;
        rhs += r.log_value * f64::from(term.sign);
        comparison_bound += r.finite_spectrum_bound();
        truncation_bound += r.truncation_bound;
        selberg_terms.push((term.degree, r));
    }

    Ok(FriedReport {
        s,
        residual: (ruelle.log_value - rhs).norm(),
        ruelle,
        selberg_terms,
        rhs,
        comparison_bound,
        truncation_bound,
    })
}
