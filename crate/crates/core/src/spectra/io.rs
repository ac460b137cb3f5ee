//! File formats.
//!
//! Length spectra are JSON lines: a header `{"dimension", "rho", "cutoff"}`
//! (plus `"seed"` for synthetic spectra) followed by one record per geodesic.
//! Spectral inputs are a single JSON document. Floats are written in
//! shortest round-trip form, so save → load is bit-exact.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    CaseTag, Dimension, LengthSpectrum, PrimeGeodesic, SpectralInput, SpectralLevel,
    SpectrumOrigin,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LengthSpectrumFormat {
    /// Header line followed by one geodesic per line.
    JsonLines,
    /// One document with the header fields and a `"geodesics"` array.
    Json,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    dimension: u32,
    rho: f64,
    cutoff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeodesicRecord {
    length: f64,
    holonomy_angles: Vec<f64>,
    twist_eigenvalues: Vec<[f64; 2]>,
    multiplicity: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumDocument {
    dimension: u32,
    rho: f64,
    cutoff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    geodesics: Vec<GeodesicRecord>,
}

impl From<&PrimeGeodesic> for GeodesicRecord {
    fn from(g: &PrimeGeodesic) -> Self {
        GeodesicRecord {
            length: g.length,
            holonomy_angles: g.holonomy_angles.clone(),
            twist_eigenvalues: g.twist_eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            multiplicity: g.multiplicity,
        }
    }
}

impl From<GeodesicRecord> for PrimeGeodesic {
    fn from(r: GeodesicRecord) -> Self {
        PrimeGeodesic {
            length: r.length,
            holonomy_angles: r.holonomy_angles,
            twist_eigenvalues: r
                .twist_eigenvalues
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
            multiplicity: r.multiplicity,
        }
    }
}

fn origin_of(seed: Option<u64>) -> SpectrumOrigin {
    match seed {
        Some(seed) => SpectrumOrigin::Synthetic { seed },
        None => SpectrumOrigin::Ingested,
    }
}

fn seed_of(origin: SpectrumOrigin) -> Option<u64> {
    match origin {
        SpectrumOrigin::Synthetic { seed } => Some(seed),
        SpectrumOrigin::Ingested => None,
    }
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: &str, number: usize, what: &str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::Parse {
        line: number,
        message: format!("malformed {what}: {e}"),
    })
}

pub fn load_length_spectrum<R: BufRead>(
    reader: R,
    format: LengthSpectrumFormat,
) -> Result<LengthSpectrum> {
    match format {
        LengthSpectrumFormat::JsonLines => load_jsonl(reader),
        LengthSpectrumFormat::Json => {
            let doc: SpectrumDocument = serde_json::from_reader(reader).map_err(|e| Error::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
            let dimension = Dimension::new(doc.dimension)?;
            let geodesics = doc.geodesics.into_iter().map(PrimeGeodesic::from).collect();
            LengthSpectrum::new(dimension, doc.rho, doc.cutoff, origin_of(doc.seed), geodesics)
        }
    }
}

fn load_jsonl<R: BufRead>(reader: R) -> Result<LengthSpectrum> {
    let mut header: Option<(Header, Dimension)> = None;
    let mut geodesics = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let number = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match &header {
            None => {
                let h: Header = parse_line(trimmed, number, "header")?;
                let dimension = Dimension::new(h.dimension)
                    .map_err(|e| Error::validation(format!("line {number}: {e}")))?;
                header = Some((h, dimension));
            }
            Some((h, dimension)) => {
                let g = PrimeGeodesic::from(parse_line::<GeodesicRecord>(
                    trimmed, number, "geodesic record",
                )?);
                g.validate(*dimension)
                    .map_err(|e| Error::validation(format!("line {number}: {e}")))?;
                if g.length > h.cutoff {
                    return Err(Error::validation(format!(
                        "line {number}: length {} exceeds cutoff {}",
                        g.length, h.cutoff
                    )));
                }
                geodesics.push(g);
            }
        }
    }
    let (h, dimension) = header.ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing header record".into(),
    })?;
    LengthSpectrum::new(dimension, h.rho, h.cutoff, origin_of(h.seed), geodesics)
}

pub fn save_length_spectrum<W: Write>(
    spectrum: &LengthSpectrum,
    mut writer: W,
    format: LengthSpectrumFormat,
) -> Result<()> {
    match format {
        LengthSpectrumFormat::JsonLines => {
            let header = Header {
                dimension: spectrum.dimension().get(),
                rho: spectrum.rho(),
                cutoff: spectrum.cutoff(),
                seed: seed_of(spectrum.origin()),
            };
            serde_json::to_writer(&mut writer, &header)?;
            writer.write_all(b"\n")?;
            for g in spectrum.geodesics() {
                serde_json::to_writer(&mut writer, &GeodesicRecord::from(g))?;
                writer.write_all(b"\n")?;
            }
        }
        LengthSpectrumFormat::Json => {
            let doc = SpectrumDocument {
                dimension: spectrum.dimension().get(),
                rho: spectrum.rho(),
                cutoff: spectrum.cutoff(),
                seed: seed_of(spectrum.origin()),
                geodesics: spectrum.geodesics().iter().map(GeodesicRecord::from).collect(),
            };
            serde_json::to_writer(&mut writer, &doc)?;
            writer.write_all(b"\n")?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectralDocument {
    case: CaseTag,
    dimension: u32,
    weyl_constant: f64,
    laplace: Vec<SpectralLevel>,
    #[serde(default)]
    dirac: Vec<SpectralLevel>,
}

pub fn load_spectral_input<R: Read>(reader: R) -> Result<SpectralInput> {
    let doc: SpectralDocument = serde_json::from_reader(reader).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    SpectralInput::new(
        doc.case,
        Dimension::new(doc.dimension)?,
        doc.weyl_constant,
        doc.laplace,
        doc.dirac,
    )
}

pub fn save_spectral_input<W: Write>(input: &SpectralInput, mut writer: W) -> Result<()> {
    let doc = SpectralDocument {
        case: input.case_tag(),
        dimension: input.dimension().get(),
        weyl_constant: input.weyl_constant(),
        laplace: input.laplace().to_vec(),
        dirac: input.dirac().to_vec(),
    };
    serde_json::to_writer(&mut writer, &doc)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"{"dimension":3,"rho":1.0,"cutoff":2.0}
{"length":1.0,"holonomy_angles":[0.0],"twist_eigenvalues":[[1.0,0.0]],"multiplicity":1}
"#;

    #[test]
    fn single_record() {
        let s = load_length_spectrum(ONE.as_bytes(), LengthSpectrumFormat::JsonLines).unwrap();
        assert_eq!(s.geodesics().len(), 1);
        assert_eq!(s.geodesics()[0].length, 1.0);
        assert_eq!(s.origin(), SpectrumOrigin::Ingested);
    }

    #[test]
    fn out_of_order_records_sorted() {
        let text = r#"{"dimension":3,"rho":1.0,"cutoff":5.0}
{"length":3.0,"holonomy_angles":[0.0],"twist_eigenvalues":[[1.0,0.0]],"multiplicity":1}
{"length":1.5,"holonomy_angles":[1.0],"twist_eigenvalues":[[1.0,0.0]],"multiplicity":2}
"#;
        let s = load_length_spectrum(text.as_bytes(), LengthSpectrumFormat::JsonLines).unwrap();
        assert_eq!(s.geodesics()[0].length, 1.5);
        assert_eq!(s.geodesics()[1].length, 3.0);
    }

    #[test]
    fn negative_length_rejected_with_line() {
        let text = r#"{"dimension":3,"rho":1.0,"cutoff":5.0}
{"length":-1.0,"holonomy_angles":[0.0],"twist_eigenvalues":[[1.0,0.0]],"multiplicity":1}
"#;
        let err = load_length_spectrum(text.as_bytes(), LengthSpectrumFormat::JsonLines)
            .unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.starts_with("line 2")), "{err}");
    }

    #[test]
    fn malformed_record_reports_line() {
        let text = "{\"dimension\":3,\"rho\":1.0,\"cutoff\":5.0}\n\n{\"length\":1.0,\n";
        let err = load_length_spectrum(text.as_bytes(), LengthSpectrumFormat::JsonLines)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_header() {
        let err = load_length_spectrum("".as_bytes(), LengthSpectrumFormat::JsonLines).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn spectral_document_shape() {
        let text = r#"{"case":"B","dimension":3,"weyl_constant":1.0,"laplace":[[1.0,3]],"dirac":[[-1.0,-3],[1.0,1]]}"#;
        let s = load_spectral_input(text.as_bytes()).unwrap();
        assert_eq!(s.case_tag(), CaseTag::B);
        let mut out = Vec::new();
        save_spectral_input(&s, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().trim(), text);
    }
}
