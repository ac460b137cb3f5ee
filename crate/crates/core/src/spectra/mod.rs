//! Input data: geodesic length spectra and operator spectra.
//!
//! A [`LengthSpectrum`] feeds the Euler products; a [`SpectralInput`] feeds
//! the divisor and factorization machinery. Both are validated on
//! construction and immutable afterwards.

mod generate;
mod io;

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{
    draw_geodesic_count, generate_length_spectrum, generate_spectral_input, GeodesicDensity,
    MAX_GENERATED_GEODESICS,
};
pub use io::{
    load_length_spectrum, load_spectral_input, save_length_spectrum, save_spectral_input,
    LengthSpectrumFormat,
};

/// Tolerance on `|z| = 1` for twist eigenvalues.
pub const TWIST_UNIT_TOLERANCE: f64 = 1e-12;

/// Relative slack allowed above `C r^n` in the Weyl growth check.
pub const WEYL_GROWTH_TOLERANCE: f64 = 0.1;

/// The Weyl growth check only looks at levels whose weighted count is at
/// least this large.
pub const WEYL_CHECK_MIN_COUNT: f64 = 100.0;

/// Dimension of the ambient manifold; always odd and at least 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::validation(format!(
                "dimension must be odd and at least 3, got {n}"
            )));
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Number of holonomy angles, `(n - 1) / 2`.
    pub fn rank(self) -> usize {
        ((self.0 - 1) / 2) as usize
    }

    /// Dimension of the stable bundle, `n - 1`.
    pub fn stable_dim(self) -> usize {
        (self.0 - 1) as usize
    }

    /// `ρ = (n - 1) / 2` for the real hyperbolic space.
    pub fn hyperbolic_rho(self) -> f64 {
        f64::from(self.0 - 1) / 2.0
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One primitive closed geodesic (or a bundle of `multiplicity` classes
/// sharing the same data).
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeGeodesic {
    pub length: f64,
    /// Rotation angles of the holonomy in `M`, one per 2-plane.
    pub holonomy_angles: Vec<f64>,
    /// Eigenvalues of the twisting representation on the class.
    pub twist_eigenvalues: Vec<Complex64>,
    pub multiplicity: u32,
}

impl PrimeGeodesic {
    /// Geodesic with trivial one-dimensional twist and multiplicity one.
    pub fn untwisted(length: f64, holonomy_angles: Vec<f64>) -> Self {
        PrimeGeodesic {
            length,
            holonomy_angles,
            twist_eigenvalues: vec![Complex64::new(1.0, 0.0)],
            multiplicity: 1,
        }
    }

    pub fn validate(&self, dimension: Dimension) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::validation(format!(
                "geodesic length must be positive and finite, got {}",
                self.length
            )));
        }
        if self.holonomy_angles.len() != dimension.rank() {
            return Err(Error::validation(format!(
                "dimension {dimension} needs {} holonomy angles, got {}",
                dimension.rank(),
                self.holonomy_angles.len()
            )));
        }
        if let Some(a) = self
            .holonomy_angles
            .iter()
            .find(|a| !(a.is_finite() && (0.0..TAU).contains(*a)))
        {
            return Err(Error::validation(format!(
                "holonomy angle {a} outside [0, 2π)"
            )));
        }
        if let Some(z) = self
            .twist_eigenvalues
            .iter()
            .find(|z| !((z.norm() - 1.0).abs() <= TWIST_UNIT_TOLERANCE))
        {
            return Err(Error::validation(format!(
                "twist eigenvalue {z} is not of unit modulus"
            )));
        }
        if self.multiplicity == 0 {
            return Err(Error::validation("geodesic multiplicity must be positive"));
        }
        Ok(())
    }
}

/// Where a length spectrum came from. Missing-tail bounds for ingested data
/// are conditional on the geodesic density assumption.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumOrigin {
    Ingested,
    Synthetic { seed: u64 },
}

/// All primitive geodesics of length at most `cutoff`, sorted by length.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthSpectrum {
    dimension: Dimension,
    rho: f64,
    cutoff: f64,
    origin: SpectrumOrigin,
    geodesics: Vec<PrimeGeodesic>,
}

impl LengthSpectrum {
    pub fn new(
        dimension: Dimension,
        rho: f64,
        cutoff: f64,
        origin: SpectrumOrigin,
        mut geodesics: Vec<PrimeGeodesic>,
    ) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::validation(format!("rho must be positive, got {rho}")));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::validation(format!(
                "cutoff must be positive, got {cutoff}"
            )));
        }
        for g in &geodesics {
            g.validate(dimension)?;
            if g.length > cutoff {
                return Err(Error::validation(format!(
                    "geodesic of length {} exceeds cutoff {cutoff}",
                    g.length
                )));
            }
        }
        geodesics.sort_by(|a, b| a.length.total_cmp(&b.length));
        Ok(LengthSpectrum {
            dimension,
            rho,
            cutoff,
            origin,
            geodesics,
        })
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn origin(&self) -> SpectrumOrigin {
        self.origin
    }

    pub fn geodesics(&self) -> &[PrimeGeodesic] {
        &self.geodesics
    }

    pub fn is_empty(&self) -> bool {
        self.geodesics.is_empty()
    }

    /// Number of classes counted with multiplicity.
    pub fn class_count(&self) -> u64 {
        self.geodesics.iter().map(|g| u64::from(g.multiplicity)).sum()
    }

    /// Largest twist dimension present (1 for an empty spectrum).
    pub fn max_twist_dim(&self) -> usize {
        self.geodesics
            .iter()
            .map(|g| g.twist_eigenvalues.len())
            .max()
            .unwrap_or(1)
    }
}

/// Case (a): `σ` is Weyl-invariant. Case (b): it is not, and a Dirac
/// spectrum accompanies the Laplace-type one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    A,
    B,
}

impl CaseTag {
    pub fn letter(self) -> char {
        match self {
            CaseTag::A => 'A',
            CaseTag::B => 'B',
        }
    }
}

/// An eigenvalue with its signed multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, i64)", into = "(f64, i64)")]
pub struct SpectralLevel {
    pub eigenvalue: f64,
    pub multiplicity: i64,
}

impl SpectralLevel {
    pub fn new(eigenvalue: f64, multiplicity: i64) -> Self {
        SpectralLevel {
            eigenvalue,
            multiplicity,
        }
    }
}

impl From<(f64, i64)> for SpectralLevel {
    fn from((eigenvalue, multiplicity): (f64, i64)) -> Self {
        SpectralLevel {
            eigenvalue,
            multiplicity,
        }
    }
}

impl From<SpectralLevel> for (f64, i64) {
    fn from(l: SpectralLevel) -> Self {
        (l.eigenvalue, l.multiplicity)
    }
}

/// Eigenvalue data of the Laplace-type operator `A(γ, σ)` and, in case (b),
/// of the Dirac-type operator `D(σ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralInput {
    case_tag: CaseTag,
    dimension: Dimension,
    weyl_constant: f64,
    laplace: Vec<SpectralLevel>,
    dirac: Vec<SpectralLevel>,
}

impl SpectralInput {
    pub fn new(
        case_tag: CaseTag,
        dimension: Dimension,
        weyl_constant: f64,
        laplace: Vec<SpectralLevel>,
        dirac: Vec<SpectralLevel>,
    ) -> Result<Self> {
        let input = SpectralInput {
            case_tag,
            dimension,
            weyl_constant,
            laplace,
            dirac,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn case_tag(&self) -> CaseTag {
        self.case_tag
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn weyl_constant(&self) -> f64 {
        self.weyl_constant
    }

    pub fn laplace(&self) -> &[SpectralLevel] {
        &self.laplace
    }

    pub fn dirac(&self) -> &[SpectralLevel] {
        &self.dirac
    }

    /// Laplace multiplicity at `s`, zero if `s` is not an eigenvalue.
    pub fn laplace_multiplicity(&self, s: f64) -> i64 {
        self.laplace
            .binary_search_by(|l| l.eigenvalue.total_cmp(&s))
            .map(|i| self.laplace[i].multiplicity)
            .unwrap_or(0)
    }

    /// Signed Dirac multiplicity at `s`, zero if absent.
    pub fn dirac_multiplicity(&self, s: f64) -> i64 {
        self.dirac
            .binary_search_by(|l| l.eigenvalue.total_cmp(&s))
            .map(|i| self.dirac[i].multiplicity)
            .unwrap_or(0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.weyl_constant.is_finite() && self.weyl_constant > 0.0) {
            return Err(Error::validation(format!(
                "weyl constant must be positive, got {}",
                self.weyl_constant
            )));
        }
        for (i, l) in self.laplace.iter().enumerate() {
            if !(l.eigenvalue.is_finite() && l.eigenvalue >= 0.0) {
                return Err(Error::validation(format!(
                    "laplace entry {i}: eigenvalue must be finite and nonnegative, got {}",
                    l.eigenvalue
                )));
            }
            if l.multiplicity == 0 {
                return Err(Error::validation(format!(
                    "laplace entry {i}: zero multiplicity"
                )));
            }
            if i > 0 && self.laplace[i - 1].eigenvalue >= l.eigenvalue {
                return Err(Error::validation(format!(
                    "laplace entry {i}: eigenvalues must be strictly increasing"
                )));
            }
        }
        match self.case_tag {
            CaseTag::A if !self.dirac.is_empty() => {
                return Err(Error::validation("case A input carries a Dirac spectrum"));
            }
            CaseTag::A => {}
            CaseTag::B => self.validate_dirac()?,
        }
        self.check_weyl_growth()
    }

    fn validate_dirac(&self) -> Result<()> {
        for (i, d) in self.dirac.iter().enumerate() {
            if !d.eigenvalue.is_finite() {
                return Err(Error::validation(format!(
                    "dirac entry {i}: non-finite eigenvalue"
                )));
            }
            if i > 0 && self.dirac[i - 1].eigenvalue >= d.eigenvalue {
                return Err(Error::validation(format!(
                    "dirac entry {i}: eigenvalues must be strictly increasing"
                )));
            }
            if d.eigenvalue == 0.0 {
                // E({0}) - E({-0}) vanishes identically.
                if d.multiplicity != 0 {
                    return Err(Error::validation(
                        "dirac multiplicity at eigenvalue 0 must be 0",
                    ));
                }
                continue;
            }
            let m = self.laplace_multiplicity(d.eigenvalue.abs());
            if m < d.multiplicity.abs() {
                return Err(Error::validation(format!(
                    "dirac entry {i} at {}: laplace multiplicity {m} at |s| is below |m_s| = {}",
                    d.eigenvalue,
                    d.multiplicity.abs()
                )));
            }
            if (m + d.multiplicity) % 2 != 0 {
                return Err(Error::Parity {
                    eigenvalue: d.eigenvalue,
                    laplace: m,
                    dirac: d.multiplicity,
                });
            }
        }
        Ok(())
    }

    /// Weighted counting function must stay below `C r^n (1 + tol)` once the
    /// count is past [`WEYL_CHECK_MIN_COUNT`].
    fn check_weyl_growth(&self) -> Result<()> {
        let n = self.dimension.get() as i32;
        let mut count = 0.0;
        for l in &self.laplace {
            count += l.multiplicity.unsigned_abs() as f64;
            if count < WEYL_CHECK_MIN_COUNT {
                continue;
            }
            let allowed = self.weyl_constant * l.eigenvalue.powi(n) * (1.0 + WEYL_GROWTH_TOLERANCE);
            if count > allowed {
                return Err(Error::validation(format!(
                    "counting function {count} at r = {} exceeds Weyl bound {allowed}",
                    l.eigenvalue
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim3() -> Dimension {
        Dimension::new(3).unwrap()
    }

    #[test]
    fn dimension_rejects_even_and_small() {
        assert!(Dimension::new(1).is_err());
        assert!(Dimension::new(4).is_err());
        let d = Dimension::new(7).unwrap();
        assert_eq!(d.rank(), 3);
        assert_eq!(d.stable_dim(), 6);
        assert_eq!(d.hyperbolic_rho(), 3.0);
    }

    #[test]
    fn geodesic_invariants() {
        let ok = PrimeGeodesic::untwisted(1.0, vec![0.5]);
        assert!(ok.validate(dim3()).is_ok());

        let neg = PrimeGeodesic::untwisted(-1.0, vec![0.0]);
        assert!(neg.validate(dim3()).is_err());

        let arity = PrimeGeodesic::untwisted(1.0, vec![0.0, 1.0]);
        assert!(arity.validate(dim3()).is_err());

        let mut twist = PrimeGeodesic::untwisted(1.0, vec![0.0]);
        twist.twist_eigenvalues = vec![Complex64::new(1.0 + 1e-9, 0.0)];
        assert!(twist.validate(dim3()).is_err());
        twist.twist_eigenvalues = vec![Complex64::from_polar(1.0, 0.3)];
        assert!(twist.validate(dim3()).is_ok());
    }

    #[test]
    fn spectrum_sorts_geodesics() {
        let gs = vec![
            PrimeGeodesic::untwisted(3.0, vec![0.0]),
            PrimeGeodesic::untwisted(1.0, vec![0.0]),
            PrimeGeodesic::untwisted(2.0, vec![0.0]),
        ];
        let s = LengthSpectrum::new(dim3(), 1.0, 5.0, SpectrumOrigin::Ingested, gs).unwrap();
        let ls: Vec<f64> = s.geodesics().iter().map(|g| g.length).collect();
        assert_eq!(ls, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn spectrum_rejects_length_beyond_cutoff() {
        let gs = vec![PrimeGeodesic::untwisted(6.0, vec![0.0])];
        assert!(LengthSpectrum::new(dim3(), 1.0, 5.0, SpectrumOrigin::Ingested, gs).is_err());
    }

    #[test]
    fn spectral_input_parity_and_coverage() {
        let lap = vec![SpectralLevel::new(1.0, 3)];
        let ok = SpectralInput::new(
            CaseTag::B,
            dim3(),
            1.0,
            lap.clone(),
            vec![SpectralLevel::new(-1.0, -3), SpectralLevel::new(1.0, 1)],
        );
        assert!(ok.is_ok());

        let odd = SpectralInput::new(
            CaseTag::B,
            dim3(),
            1.0,
            lap.clone(),
            vec![SpectralLevel::new(1.0, 2)],
        );
        assert!(matches!(odd, Err(Error::Parity { .. })));

        let too_big = SpectralInput::new(
            CaseTag::B,
            dim3(),
            1.0,
            lap.clone(),
            vec![SpectralLevel::new(1.0, 5)],
        );
        assert!(too_big.is_err());

        let orphan = SpectralInput::new(
            CaseTag::B,
            dim3(),
            1.0,
            lap,
            vec![SpectralLevel::new(2.0, 1)],
        );
        assert!(orphan.is_err());
    }

    #[test]
    fn spectral_input_rejects_unsorted_and_case_a_dirac() {
        let unsorted = SpectralInput::new(
            CaseTag::A,
            dim3(),
            1.0,
            vec![SpectralLevel::new(2.0, 1), SpectralLevel::new(1.0, 1)],
            vec![],
        );
        assert!(unsorted.is_err());
        let with_dirac = SpectralInput::new(
            CaseTag::A,
            dim3(),
            1.0,
            vec![SpectralLevel::new(1.0, 2)],
            vec![SpectralLevel::new(1.0, 2)],
        );
        assert!(with_dirac.is_err());
    }

    #[test]
    fn zero_eigenvalue_allowed() {
        let s = SpectralInput::new(
            CaseTag::A,
            dim3(),
            1.0,
            vec![SpectralLevel::new(0.0, 1), SpectralLevel::new(2.0, 3)],
            vec![],
        )
        .unwrap();
        assert_eq!(s.laplace_multiplicity(0.0), 1);
        assert_eq!(s.laplace_multiplicity(1.0), 0);
    }

    #[test]
    fn weyl_growth_violation_detected() {
        // 200 levels crammed below r = 1 with C = 1.
        let lap: Vec<_> = (1..=200)
            .map(|k| SpectralLevel::new(k as f64 / 201.0, 1))
            .collect();
        let r = SpectralInput::new(CaseTag::A, dim3(), 1.0, lap, vec![]);
        assert!(r.is_err());
    }
}
