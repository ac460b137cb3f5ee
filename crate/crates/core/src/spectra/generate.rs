//! Seeded synthetic spectra.
//!
//! Geodesic lengths are a Poisson process whose expected counting function
//! is `e^{hL}/(hL)` with `h = 2ρ` (the prime geodesic growth rate), started
//! at the minimum of that function. Operator spectra follow the Weyl law
//! `N(r) ≈ C r^n`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{
    CaseTag, Dimension, LengthSpectrum, PrimeGeodesic, SpectralInput, SpectralLevel,
    SpectrumOrigin,
};
use crate::error::{Error, Result};

/// Refuse to materialize more geodesics than this.
pub const MAX_GENERATED_GEODESICS: f64 = 2.0e7;

/// Largest exponent `hL` accepted before `e^{hL}` is considered to overflow.
const MAX_EXPONENT: f64 = 700.0;

/// Expected geodesic counting function `N(L) = e^{hL}/(hL) - e^2/2` for
/// `L ≥ 2/h`, zero below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicDensity {
    entropy: f64,
}

impl GeodesicDensity {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::validation(format!("rho must be positive, got {rho}")));
        }
        Ok(GeodesicDensity { entropy: 2.0 * rho })
    }

    /// Exponential growth rate `h = 2ρ`.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// Shortest length carrying any mass (`hL = 2`).
    pub fn min_length(&self) -> f64 {
        2.0 / self.entropy
    }

    fn raw_counting(&self, length: f64) -> f64 {
        let x = self.entropy * length;
        x.exp() / x
    }

    /// Intensity `dN/dL`.
    pub fn intensity(&self, length: f64) -> f64 {
        if length < self.min_length() {
            return 0.0;
        }
        let x = self.entropy * length;
        x.exp() * (x - 1.0) / (x * length)
    }

    /// Expected number of classes of length at most `cutoff`.
    pub fn expected_count(&self, cutoff: f64) -> Result<f64> {
        let x = self.entropy * cutoff;
        if x > MAX_EXPONENT {
            return Err(Error::Overflow(format!(
                "e^(2ρL) with 2ρL = {x} is not representable"
            )));
        }
        if cutoff <= self.min_length() {
            return Ok(0.0);
        }
        Ok(self.raw_counting(cutoff) - self.raw_counting(self.min_length()))
    }

    /// Length `L ≥ min_length` with `e^{hL}/(hL) = target`.
    fn invert_counting(&self, target: f64) -> f64 {
        // Solve x - ln x = y on x ≥ 2; convex, so Newton from the right is monotone.
        let y = target.ln();
        let mut x = (y + y.ln() + 1.0).max(2.0);
        for _ in 0..100 {
            let step = (x - x.ln() - y) / (1.0 - 1.0 / x);
            x -= step;
            if step.abs() <= 1e-15 * x {
                break;
            }
        }
        x.max(2.0) / self.entropy
    }
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean)
        .map_err(|e| Error::validation(format!("poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

fn check_generator_params(rho: f64, cutoff: f64) -> Result<(GeodesicDensity, f64)> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::validation(format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    let density = GeodesicDensity::new(rho)?;
    let mean = density.expected_count(cutoff)?;
    Ok((density, mean))
}

/// The number of classes [`generate_length_spectrum`] would produce for these
/// parameters, without materializing them. Works beyond
/// [`MAX_GENERATED_GEODESICS`].
pub fn draw_geodesic_count(rho: f64, cutoff: f64, seed: u64) -> Result<u64> {
    let (_, mean) = check_generator_params(rho, cutoff)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    poisson_count(&mut rng, mean)
}

/// Synthetic length spectrum with prime-geodesic growth, uniform holonomy
/// angles and trivial twists.
pub fn generate_length_spectrum(
    n: u32,
    rho: f64,
    cutoff: f64,
    seed: u64,
) -> Result<LengthSpectrum> {
    let dimension = Dimension::new(n)?;
    let (density, mean) = check_generator_params(rho, cutoff)?;
    if mean > MAX_GENERATED_GEODESICS {
        return Err(Error::validation(format!(
            "cutoff {cutoff} would produce about {mean:.3e} geodesics (limit {MAX_GENERATED_GEODESICS:e})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = poisson_count(&mut rng, mean)?;
    if count == 0 {
        return Err(Error::EmptySpectrum(format!(
            "no geodesic of length ≤ {cutoff} (expected count {mean:.3}, shortest admissible length {:.3})",
            density.min_length()
        )));
    }

    let floor = density.raw_counting(density.min_length());
    let rank = dimension.rank();
    let geodesics = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let length = density
                .invert_counting(floor + u * mean)
                .clamp(density.min_length(), cutoff);
            let angles = (0..rank).map(|_| rng.random_range(0.0..TAU)).collect();
            PrimeGeodesic::untwisted(length, angles)
        })
        .collect();

    LengthSpectrum::new(
        dimension,
        rho,
        cutoff,
        SpectrumOrigin::Synthetic { seed },
        geodesics,
    )
}

/// Synthetic operator spectrum following `N(r) ≈ C r^n` up to `r_max`.
///
/// Level `k` with multiplicity `m_k` sits at `((K_{k-1} + m_k/2 + δ)/C)^{1/n}`
/// where `K` is the running weighted count and `|δ| ≤ 1/4`, so levels are
/// strictly increasing. In case B each level gets Dirac entries at `±s` with
/// multiplicities `±(d⁺ - d⁻)`, `d⁺ + d⁻ = m`, which keeps `m + m_s` even.
pub fn generate_spectral_input(
    n: u32,
    weyl_constant: f64,
    r_max: f64,
    case_tag: CaseTag,
    seed: u64,
) -> Result<SpectralInput> {
    let dimension = Dimension::new(n)?;
    if !(weyl_constant.is_finite() && weyl_constant > 0.0) {
        return Err(Error::validation(format!(
            "weyl constant must be positive, got {weyl_constant}"
        )));
    }
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::validation(format!(
            "r_max must be positive, got {r_max}"
        )));
    }
    let target = weyl_constant * r_max.powi(n as i32);
    if target > MAX_GENERATED_GEODESICS {
        return Err(Error::validation(format!(
            "C r_max^n = {target:.3e} eigenvalues is too many"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_mult: i64 = match case_tag {
        CaseTag::A => 2,
        CaseTag::B => 3,
    };
    let inv_n = 1.0 / f64::from(n);
    let mut laplace = Vec::new();
    let mut positive = Vec::new();
    let mut count = 0.0;
    loop {
        let m = rng.random_range(1..=max_mult);
        let jitter: f64 = rng.random_range(-0.25..=0.25);
        let s = ((count + m as f64 / 2.0 + jitter) / weyl_constant).powf(inv_n);
        if s > r_max {
            break;
        }
        count += m as f64;
        laplace.push(SpectralLevel::new(s, m));
        if case_tag == CaseTag::B {
            let d_plus = rng.random_range(0..=m);
            let signed = 2 * d_plus - m;
            if signed != 0 {
                positive.push(SpectralLevel::new(s, signed));
            }
        }
    }

    let dirac: Vec<SpectralLevel> = positive
        .iter()
        .rev()
        .map(|l| SpectralLevel::new(-l.eigenvalue, -l.multiplicity))
        .chain(positive.iter().copied())
        .collect();

    SpectralInput::new(case_tag, dimension, weyl_constant, laplace, dirac)
}
