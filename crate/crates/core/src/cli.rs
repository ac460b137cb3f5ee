//! The `geozeta` command line.
//!
//! Every verb parses and validates its flags, reads its inputs fully, then
//! computes and renders its artifacts into memory before anything is
//! written. Failures are reported as `{"error": {"kind", "code", "message"}}`
//! on stderr with exit code 2 (validation or I/O), 3 (outside the region of
//! convergence) or 4 (numerical failure).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::divisor::{
    combine_sqrt_check, divisor_case_a, divisor_selberg_case_b, divisor_super,
    divisor_symmetrized, Divisor,
};
use crate::error::{Error, ErrorKind, Result};
use crate::euler::{log_zeta, EvalRequest, EvalResult, SigmaCharacter, ZetaKind};
use crate::fried::{fried_check, FriedReport};
use crate::hadamard::{
    canonical_product, estimate_order, fit_g, split_divisor, FactorComponent, Factorization,
    ProductValue, ZeroSet, ZeroTail, MIN_ANGLES,
};
use crate::numeric::log_space;
use crate::spectra::{
    generate_length_spectrum, generate_spectral_input, load_length_spectrum,
    load_spectral_input, save_length_spectrum, save_spectral_input, CaseTag, Dimension,
    LengthSpectrum, LengthSpectrumFormat, SpectralInput, WEYL_GROWTH_TOLERANCE,
};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "GEOZETA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "geozeta", version, about = "Zeta functions of the geodesic flow on odd-dimensional hyperbolic manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic length spectrum.
    GenSpectrum(GenSpectrumArgs),
    /// Generate a seeded synthetic operator spectrum obeying a Weyl law.
    GenSpectral(GenSpectralArgs),
    /// Evaluate a zeta function from its Euler product.
    Eval(EvalArgs),
    /// Compare the Ruelle zeta function with its Selberg decomposition.
    FriedCheck(FriedArgs),
    /// Zeros and poles of a zeta function from operator spectra.
    Divisor(DivisorArgs),
    /// Canonical-product factorization, optionally fitting g to samples.
    Factorize(FactorizeArgs),
    /// Estimate the order of the canonical product over the zeros.
    OrderEstimate(OrderArgs),
    /// Check that the case-(b) divisors satisfy Z_S = sqrt(S * S^s).
    SqrtCheck(SqrtArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    #[value(alias = "A")]
    A,
    #[value(alias = "B")]
    B,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub re0: f64,
    pub re1: f64,
    pub imax: f64,
    pub steps: usize,
}

impl Grid {
    /// Row-major points: real part outer, imaginary part inner and ascending.
    pub fn points(&self) -> Vec<Complex64> {
        let at = |lo: f64, hi: f64, i: usize| {
            if self.steps == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (self.steps - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.steps * self.steps);
        for i in 0..self.steps {
            for j in 0..self.steps {
                out.push(Complex64::new(
                    at(self.re0, self.re1, i),
                    at(-self.imax, self.imax, j),
                ));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radii {
    pub r0: f64,
    pub r1: f64,
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Evaluation point, e.g. `3.5` or `3.5+1i`.
    #[arg(long = "s", value_parser = parse_complex, conflicts_with = "grid", required_unless_present = "grid", allow_hyphen_values = true)]
    pub s: Option<Complex64>,
    /// `re0:re1:imax:steps`, a steps × steps grid.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
}

impl PointArgs {
    fn points(&self) -> Vec<Complex64> {
        match (self.s, self.grid) {
            (Some(s), _) => vec![s],
            (None, Some(g)) => g.points(),
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenSpectrumArgs {
    #[arg(long, default_value_t = 3)]
    pub dimension: u32,
    /// Defaults to (n - 1) / 2.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GenSpectralArgs {
    #[arg(long, default_value_t = 3)]
    pub dimension: u32,
    #[arg(long, default_value_t = 1.0)]
    pub weyl_constant: f64,
    #[arg(long)]
    pub r_max: f64,
    #[arg(long, value_enum, default_value = "a")]
    pub case: CaseArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long, default_value = "selberg", value_parser = parse_zeta)]
    pub zeta: ZetaKind,
    /// Torus weights of σ, comma separated; trivial by default.
    #[arg(long, value_parser = parse_sigma, allow_hyphen_values = true)]
    pub sigma: Option<Weights>,
    #[command(flatten)]
    pub points: PointArgs,
    #[arg(long, default_value_t = 1e-12)]
    pub tail_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FriedArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long, value_parser = parse_sigma, allow_hyphen_values = true)]
    pub sigma: Option<Weights>,
    #[command(flatten)]
    pub points: PointArgs,
    #[arg(long, default_value_t = 1e-12)]
    pub tail_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DivisorArgs {
    #[arg(long)]
    pub spectral: PathBuf,
    #[arg(long, default_value = "selberg", value_parser = parse_zeta)]
    pub zeta: ZetaKind,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[arg(long)]
    pub spectral: PathBuf,
    #[arg(long, default_value = "selberg", value_parser = parse_zeta)]
    pub zeta: ZetaKind,
    /// CSV with columns `s_re,s_im,log_re,log_im` (as written by `eval
    /// --format csv`), ordered along a path.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Degree of g; defaults to the dimension.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Treat the listed spectrum as the whole divisor instead of declaring a
    /// Weyl-law tail beyond the largest eigenvalue.
    #[arg(long)]
    pub complete: bool,
    #[arg(long, default_value_t = 1e-12)]
    pub tail_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(long)]
    pub spectral: PathBuf,
    #[arg(long, default_value = "selberg", value_parser = parse_zeta)]
    pub zeta: ZetaKind,
    /// `r0:r1:count`, log-spaced circle radii.
    #[arg(long, default_value = "5:40:12", value_parser = parse_radii)]
    pub radii: Radii,
    #[arg(long, default_value_t = MIN_ANGLES)]
    pub angles: usize,
    /// Plot-point CSV `r,log_log_m`; defaults to `<out>.plot.csv`.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SqrtArgs {
    #[arg(long)]
    pub spectral: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

/// `RE`, `RE+IMi`, `RE-IMi`, `IMi`; a bare `i` stands for `1i`.
pub fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(parse_f64(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_f64(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_f64(other)?,
    };
    Ok(Complex64::new(re, im))
}

pub fn parse_grid(text: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("expected re0:re1:imax:steps, got {text:?}"));
    }
    let grid = Grid {
        re0: parse_f64(parts[0])?,
        re1: parse_f64(parts[1])?,
        imax: parse_f64(parts[2])?,
        steps: parts[3].trim().parse().map_err(|_| format!("bad step count {:?}", parts[3]))?,
    };
    if grid.steps == 0 || grid.imax < 0.0 || grid.re1 < grid.re0 {
        return Err(format!("need re0 ≤ re1, imax ≥ 0 and steps ≥ 1, got {text:?}"));
    }
    Ok(grid)
}

pub fn parse_radii(text: &str) -> std::result::Result<Radii, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected r0:r1:count, got {text:?}"));
    }
    let radii = Radii {
        r0: parse_f64(parts[0])?,
        r1: parse_f64(parts[1])?,
        count: parts[2].trim().parse().map_err(|_| format!("bad count {:?}", parts[2]))?,
    };
    if !(radii.r0 > 0.0 && radii.r1 > radii.r0) {
        return Err(format!("need 0 < r0 < r1, got {text:?}"));
    }
    Ok(radii)
}

/// Torus weights given as `K[,K...]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights(pub Vec<i64>);

pub fn parse_sigma(text: &str) -> std::result::Result<Weights, String> {
    text.split(',')
        .map(|w| w.trim().parse::<i64>().map_err(|_| format!("bad weight {w:?}")))
        .collect::<std::result::Result<_, _>>()
        .map(Weights)
}

fn parse_zeta(text: &str) -> std::result::Result<ZetaKind, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

/// Where an artifact goes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub destination: Destination,
    pub bytes: Vec<u8>,
}

/// Outcome of a verb: its artifacts and an optional failure raised after
/// they were produced (a residual over its bound, a divisor mismatch).
struct Outcome {
    artifacts: Vec<Artifact>,
    failure: Option<Error>,
}

impl Outcome {
    fn ok(artifacts: Vec<Artifact>) -> Self {
        Outcome {
            artifacts,
            failure: None,
        }
    }
}

struct Input {
    path: PathBuf,
    bytes: Vec<u8>,
}

impl Input {
    fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        Ok(Input {
            path: path.to_path_buf(),
            bytes,
        })
    }

    fn digest(&self) -> Value {
        json!({
            "path": self.path.display().to_string(),
            "sha256": hex::encode(Sha256::digest(&self.bytes)),
        })
    }

    fn length_spectrum(&self) -> Result<LengthSpectrum> {
        let format = if self.path.extension().is_some_and(|e| e == "json") {
            LengthSpectrumFormat::Json
        } else {
            LengthSpectrumFormat::JsonLines
        };
        load_length_spectrum(self.bytes.as_slice(), format)
    }

    fn spectral_input(&self) -> Result<SpectralInput> {
        load_spectral_input(self.bytes.as_slice())
    }
}

#[derive(Serialize)]
struct Provenance {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_tolerance: Option<f64>,
    parameters: Value,
}

impl Provenance {
    fn new(command: &'static str, inputs: &[&Input], parameters: Value) -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs: inputs.iter().map(|i| i.digest()).collect(),
            seed: None,
            tail_tolerance: None,
            parameters,
        }
    }
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn json_bytes(value: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("JSON values serialize");
    out.push(b'\n');
    out
}

fn destination(output: &OutputArgs) -> Destination {
    output
        .out
        .clone()
        .map_or(Destination::Stdout, Destination::File)
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("--{name} must be positive, got {v}")))
    }
}

fn sigma_for(weights: &Option<Weights>, dimension: Dimension) -> Result<SigmaCharacter> {
    let sigma = match weights {
        Some(Weights(w)) => SigmaCharacter::new(w.clone(), format!("{w:?}")),
        None => SigmaCharacter::trivial(dimension),
    };
    sigma.validate(dimension)?;
    Ok(sigma)
}

fn format_or(output: &OutputArgs, default: Format) -> Format {
    output.format.unwrap_or(default)
}

fn gen_spectrum(args: &GenSpectrumArgs) -> Result<Outcome> {
    let dimension = Dimension::new(args.dimension)?;
    if args.output.format == Some(Format::Csv) {
        return Err(Error::validation("gen-spectrum writes JSON only"));
    }
    let rho = args.rho.unwrap_or(dimension.hyperbolic_rho());
    require_positive("rho", rho)?;
    require_positive("cutoff", args.cutoff)?;
    let spectrum = generate_length_spectrum(args.dimension, rho, args.cutoff, args.seed)?;
    let format = match &args.output.out {
        Some(p) if p.extension().is_some_and(|e| e == "json") => LengthSpectrumFormat::Json,
        _ => LengthSpectrumFormat::JsonLines,
    };
    let mut bytes = Vec::new();
    save_length_spectrum(&spectrum, &mut bytes, format)?;
    Ok(Outcome::ok(vec![Artifact {
        destination: destination(&args.output),
        bytes,
    }]))
}

fn gen_spectral(args: &GenSpectralArgs) -> Result<Outcome> {
    if args.output.format == Some(Format::Csv) {
        return Err(Error::validation("gen-spectral writes JSON only"));
    }
    let case = match args.case {
        CaseArg::A => CaseTag::A,
        CaseArg::B => CaseTag::B,
    };
    let input =
        generate_spectral_input(args.dimension, args.weyl_constant, args.r_max, case, args.seed)?;
    let mut bytes = Vec::new();
    save_spectral_input(&input, &mut bytes)?;
    Ok(Outcome::ok(vec![Artifact {
        destination: destination(&args.output),
        bytes,
    }]))
}

fn eval_row(s: Complex64, r: &EvalResult) -> Value {
    json!({
        "s": pair(s),
        "log_value": pair(r.log_value),
        "value": pair(r.log_value.exp()),
        "truncation_bound": r.truncation_bound,
        "series_bound": r.series_bound,
        "cutoff_bound": r.cutoff_bound,
        "rounding_bound": r.rounding_bound,
        "terms_used": r.terms_used,
        "tail_conditional": r.tail_conditional,
    })
}

fn eval(args: &EvalArgs) -> Result<Outcome> {
    require_positive("tail-tol", args.tail_tol)?;
    let input = Input::read(&args.spectrum)?;
    let spectrum = input.length_spectrum()?;
    let sigma = sigma_for(&args.sigma, spectrum.dimension())?;
    let format = format_or(&args.output, Format::Json);

    let mut results = Vec::new();
    for s in args.points.points() {
        let req = EvalRequest::new(s, args.zeta, sigma.clone()).with_tail_tolerance(args.tail_tol);
        results.push((s, log_zeta(&spectrum, &req)?));
    }

    let bytes = match format {
        Format::Json => {
            let mut provenance = Provenance::new(
                "eval",
                &[&input],
                json!({"zeta": args.zeta.as_str(), "sigma": sigma.weights()}),
            );
            provenance.tail_tolerance = Some(args.tail_tol);
            if let crate::spectra::SpectrumOrigin::Synthetic { seed } = spectrum.origin() {
                provenance.seed = Some(seed);
            }
            json_bytes(&json!({
                "zeta": args.zeta.as_str(),
                "sigma": sigma.weights(),
                "results": results.iter().map(|(s, r)| eval_row(*s, r)).collect::<Vec<_>>(),
                "provenance": provenance,
            }))
        }
        Format::Csv => {
            let mut out = String::from(
                "s_re,s_im,log_re,log_im,value_re,value_im,truncation_bound,series_bound,cutoff_bound,rounding_bound,terms_used,tail_conditional\n",
            );
            for (s, r) in &results {
                let v = r.log_value.exp();
                let _ = writeln!(
                    out,
                    "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{}",
                    s.re,
                    s.im,
                    r.log_value.re,
                    r.log_value.im,
                    v.re,
                    v.im,
                    r.truncation_bound,
                    r.series_bound,
                    r.cutoff_bound,
                    r.rounding_bound,
                    r.terms_used,
                    r.tail_conditional
                );
            }
            out.into_bytes()
        }
    };
    Ok(Outcome::ok(vec![Artifact {
        destination: destination(&args.output),
        bytes,
    }]))
}

fn fried_row(r: &FriedReport) -> Value {
    json!({
        "s": pair(r.s),
        "ruelle_log": pair(r.ruelle.log_value),
        "selberg_side_log": pair(r.rhs),
        "residual": r.residual,
        "comparison_bound": r.comparison_bound,
        "truncation_bound": r.truncation_bound,
        "within_bound": r.within_bound(),
        "terms": r.selberg_terms.iter().map(|(p, e)| json!({
            "degree": p,
            "log_value": pair(e.log_value),
            "truncation_bound": e.truncation_bound,
        })).collect::<Vec<_>>(),
    })
}

fn fried(args: &FriedArgs) -> Result<Outcome> {
    require_positive("tail-tol", args.tail_tol)?;
    let input = Input::read(&args.spectrum)?;
    let spectrum = input.length_spectrum()?;
    let sigma = sigma_for(&args.sigma, spectrum.dimension())?;
    let format = format_or(&args.output, Format::Json);

    let reports: Vec<FriedReport> = args
        .points
        .points()
        .into_iter()
        .map(|s| fried_check(&spectrum, &sigma, s, args.tail_tol))
        .collect::<Result<_>>()?;
    let failing = reports.iter().find(|r| !r.within_bound());
    let failure = failing.map(|r| {
        Error::SeriesDivergence(format!(
            "Fried residual {:e} at s = {} exceeds the bound {:e}",
            r.residual, r.s, r.comparison_bound
        ))
    });

    let bytes = match format {
        Format::Json => {
            let mut provenance =
                Provenance::new("fried-check", &[&input], json!({"sigma": sigma.weights()}));
            provenance.tail_tolerance = Some(args.tail_tol);
            json_bytes(&json!({
                "sigma": sigma.weights(),
                "all_within_bound": failure.is_none(),
                "results": reports.iter().map(fried_row).collect::<Vec<_>>(),
                "provenance": provenance,
            }))
        }
        Format::Csv => {
            let mut out =
                String::from("s_re,s_im,residual,comparison_bound,truncation_bound,within_bound\n");
            for r in &reports {
                let _ = writeln!(
                    out,
                    "{:?},{:?},{:?},{:?},{:?},{}",
                    r.s.re,
                    r.s.im,
                    r.residual,
                    r.comparison_bound,
                    r.truncation_bound,
                    r.within_bound()
                );
            }
            out.into_bytes()
        }
    };
    Ok(Outcome {
        artifacts: vec![Artifact {
            destination: destination(&args.output),
            bytes,
        }],
        failure,
    })
}

/// Divisor of the chosen zeta function from operator spectra.
pub fn divisor_for(input: &SpectralInput, zeta: ZetaKind) -> Result<Divisor> {
    match (zeta, input.case_tag()) {
        (ZetaKind::Selberg, CaseTag::A) => divisor_case_a(input),
        (ZetaKind::Selberg, CaseTag::B) => divisor_selberg_case_b(input),
        (ZetaKind::SymmetrizedS, _) => divisor_symmetrized(input),
        (ZetaKind::SuperS, _) => divisor_super(input),
        (ZetaKind::Ruelle, _) => Err(Error::validation(
            "no spectral divisor is available for the Ruelle zeta function",
        )),
    }
}

fn divisor_json(d: &Divisor) -> Value {
    Value::Array(
        d.points()
            .iter()
            .map(|p| json!([p.location.re, p.location.im, p.order]))
            .collect(),
    )
}

fn divisor_cmd(args: &DivisorArgs) -> Result<Outcome> {
    let input = Input::read(&args.spectral)?;
    let spectral = input.spectral_input()?;
    let d = divisor_for(&spectral, args.zeta)?;
    let bytes = match format_or(&args.output, Format::Csv) {
        Format::Csv => {
            let mut out = Vec::new();
            d.write_csv(&mut out)?;
            out
        }
        Format::Json => json_bytes(&json!({
            "zeta": args.zeta.as_str(),
            "case": spectral.case_tag().letter().to_string(),
            "points": divisor_json(&d),
            "zeros": d.zeros().count(),
            "poles": d.poles().count(),
            "provenance": Provenance::new("divisor", &[&input], json!({"zeta": args.zeta.as_str()})),
        })),
    };
    Ok(Outcome::ok(vec![Artifact {
        destination: destination(&args.output),
        bytes,
    }]))
}

/// Reads `(s, log f(s))` rows from a CSV with `s_re,s_im,log_re,log_im`
/// among its columns.
pub fn read_samples(text: &str) -> Result<Vec<(Complex64, Complex64)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty samples file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let index = |name: &str| {
        cols.iter().position(|c| *c == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column {name}"),
        })
    };
    let idx = [index("s_re")?, index("s_im")?, index("log_re")?, index("log_im")?];
    lines
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let mut v = [0.0; 4];
            for (slot, &i) in v.iter_mut().zip(&idx) {
                *slot = fields
                    .get(i)
                    .and_then(|f| f.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line: n + 1,
                        message: format!("bad number in column {i}"),
                    })?;
            }
            Ok((Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])))
        })
        .collect()
}

/// Declared density of the zeros beyond the largest Laplace eigenvalue,
/// from the Weyl law `N(r) ≤ (1 + tol) C r^n` and two points `±is` per level.
fn weyl_tail(input: &SpectralInput) -> Option<ZeroTail> {
    let radius = input.laplace().last()?.eigenvalue;
    (radius > 0.0).then(|| ZeroTail::Density {
        coefficient: 2.0 * (1.0 + WEYL_GROWTH_TOLERANCE) * input.weyl_constant(),
        exponent: f64::from(input.dimension().get()),
        radius,
    })
}

fn component(zeros: ZeroSet, tail: Option<ZeroTail>) -> Result<(FactorComponent, Value)> {
    let zeros = match tail {
        Some(t) if !zeros.is_empty() => zeros.with_tail(t)?,
        _ => zeros,
    };
    let c = FactorComponent::with_estimated_genus(zeros)?;
    let diag = json!({
        "genus": c.genus,
        "zeros": c.zeros.len(),
        "total_multiplicity": c.zeros.total_multiplicity(),
        "tail_conditional": !c.zeros.tail().is_complete(),
    });
    Ok((c, diag))
}

fn factorize(args: &FactorizeArgs) -> Result<Outcome> {
    require_positive("tail-tol", args.tail_tol)?;
    if args.output.format == Some(Format::Csv) {
        return Err(Error::validation("factorize writes JSON only"));
    }
    let input = Input::read(&args.spectral)?;
    let samples_input = args.samples.as_deref().map(Input::read).transpose()?;
    let spectral = input.spectral_input()?;
    let n = spectral.dimension().get() as usize;
    let degree = args.degree.unwrap_or(n);
    if degree > n {
        return Err(Error::validation(format!("degree {degree} of g exceeds the dimension {n}")));
    }
    let samples = samples_input
        .as_ref()
        .map(|i| read_samples(&String::from_utf8_lossy(&i.bytes)))
        .transpose()?;

    let d = divisor_for(&spectral, args.zeta)?;
    let split = split_divisor(&d, spectral.dimension())?;
    let tail = if args.complete { None } else { weyl_tail(&spectral) };
    let (z1, z1_diag) = component(split.z1, tail)?;
    let (z2, z2_diag) = component(split.z2, tail)?;

    let (g, fit_diag) = match &samples {
        Some(samples) => {
            let fit = fit_g(samples, split.m0, &z1, &z2, degree, args.tail_tol)?;
            let diag = json!({
                "samples": samples.len(),
                "degree": degree,
                "max_residual": fit.max_residual,
                "rms_residual": fit.rms_residual,
                "condition_number": fit.condition_number,
                "product_bound": fit.product_bound,
            });
            (fit.coefficients, diag)
        }
        None => (Vec::new(), Value::Null),
    };
    let fact = Factorization::new(split.m0, g, z1, z2)?;

    let mut inputs = vec![&input];
    if let Some(s) = &samples_input {
        inputs.push(s);
    }
    let mut provenance = Provenance::new(
        "factorize",
        &inputs,
        json!({"zeta": args.zeta.as_str(), "degree": degree, "complete": args.complete}),
    );
    provenance.tail_tolerance = Some(args.tail_tol);

    let mut doc = fact.to_json_value();
    let obj = doc.as_object_mut().expect("factorization is a JSON object");
    obj.insert(
        "diagnostics".into(),
        json!({"z1": z1_diag, "z2": z2_diag, "fit": fit_diag}),
    );
    obj.insert("provenance".into(), serde_json::to_value(provenance)?);
    Ok(Outcome::ok(vec![Artifact {
        destination: destination(&args.output),
        bytes: json_bytes(&doc),
    }]))
}

fn order_estimate(args: &OrderArgs) -> Result<Outcome> {
    if args.output.format == Some(Format::Csv) {
        return Err(Error::validation("order-estimate writes JSON; the plot CSV goes to --plot"));
    }
    let input = Input::read(&args.spectral)?;
    let spectral = input.spectral_input()?;
    let d = divisor_for(&spectral, args.zeta)?;
    let split = split_divisor(&d, spectral.dimension())?;
    let (w1, _) = component(split.z1, None)?;
    let radii = log_space(args.radii.r0, args.radii.r1, args.radii.count);
    let estimate = estimate_order(
        |s| match canonical_product(&w1.zeros, w1.genus, s, 1.0)? {
            ProductValue::Finite(p) => Ok(p.log_value.re),
            ProductValue::Zero { .. } => Ok(f64::NEG_INFINITY),
        },
        &radii,
        args.angles,
    )?;

    let mut plot = String::from("r,log_log_m\n");
    for p in &estimate.points {
        match p.log_log {
            Some(v) => {
                let _ = writeln!(plot, "{:?},{:?}", p.radius, v);
            }
            None => {
                let _ = writeln!(plot, "{:?},", p.radius);
            }
        }
    }
    let plot_path = match (&args.plot, &args.output.out) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(out)) => {
            let mut name = out.clone().into_os_string();
            name.push(".plot.csv");
            Some(PathBuf::from(name))
        }
        (None, None) => None,
    };

    let report = json!({
        "zeta": args.zeta.as_str(),
        "genus": w1.genus,
        "zeros": w1.zeros.len(),
        "dimension": spectral.dimension().get(),
        "order": estimate.order,
        "fit_rms": estimate.fit_rms,
        "loglog_slope": estimate.loglog_slope,
        "increasing": estimate.increasing,
        "within_dimension": estimate.order <= f64::from(spectral.dimension().get()),
        "points": estimate.points.iter().map(|p| json!({
            "r": p.radius,
            "log_max_modulus": p.log_max_modulus,
            "log_log_max_modulus": p.log_log,
        })).collect::<Vec<_>>(),
        "plot": plot_path.as_ref().map(|p| p.display().to_string()),
        "provenance": Provenance::new("order-estimate", &[&input], json!({
            "zeta": args.zeta.as_str(),
            "radii": [args.radii.r0, args.radii.r1, args.radii.count],
            "angles": args.angles,
        })),
    });
    let mut artifacts = vec![Artifact {
        destination: destination(&args.output),
        bytes: json_bytes(&report),
    }];
    if let Some(p) = plot_path {
        artifacts.push(Artifact {
            destination: Destination::File(p),
            bytes: plot.into_bytes(),
        });
    }
    Ok(Outcome::ok(artifacts))
}

fn sqrt_check(args: &SqrtArgs) -> Result<Outcome> {
    if args.output.format == Some(Format::Csv) {
        return Err(Error::validation("sqrt-check writes JSON only"));
    }
    let input = Input::read(&args.spectral)?;
    let spectral = input.spectral_input()?;
    let sym = divisor_symmetrized(&spectral)?;
    let sup = divisor_super(&spectral)?;
    let selberg = divisor_selberg_case_b(&spectral)?;
    let check = combine_sqrt_check(&sym, &sup, &selberg);
    let failure = (!check.holds()).then(|| {
        Error::SeriesDivergence(format!(
            "{} of {} locations violate 2·ord Z_S = ord S + ord S^s",
            check.mismatches.len(),
            check.locations_checked
        ))
    });
    let report = json!({
        "holds": check.holds(),
        "locations_checked": check.locations_checked,
        "mismatches": check.mismatches.iter().map(|m| json!({
            "location": pair(m.location),
            "symmetrized": m.symmetrized,
            "super": m.super_order,
            "selberg": m.selberg,
        })).collect::<Vec<_>>(),
        "provenance": Provenance::new("sqrt-check", &[&input], Value::Null),
    });
    Ok(Outcome {
        artifacts: vec![Artifact {
            destination: destination(&args.output),
            bytes: json_bytes(&report),
        }],
        failure,
    })
}

fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::GenSpectrum(a) => gen_spectrum(a),
        Command::GenSpectral(a) => gen_spectral(a),
        Command::Eval(a) => eval(a),
        Command::FriedCheck(a) => fried(a),
        Command::Divisor(a) => divisor_cmd(a),
        Command::Factorize(a) => factorize(a),
        Command::OrderEstimate(a) => order_estimate(a),
        Command::SqrtCheck(a) => sqrt_check(a),
    }
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::validation(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn error_json(kind: ErrorKind, message: &str) -> Vec<u8> {
    let mut out = serde_json::to_vec(&json!({
        "error": {"kind": kind.as_str(), "code": kind.exit_code(), "message": message}
    }))
    .expect("JSON values serialize");
    out.push(b'\n');
    out
}

fn run_command(command: &Command, stdout: &mut dyn Write) -> Result<Option<Error>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::validation(format!("cannot start worker threads: {e}")))?;
    let outcome = pool.install(|| execute(command))?;
    for artifact in &outcome.artifacts {
        match &artifact.destination {
            Destination::Stdout => stdout.write_all(&artifact.bytes)?,
            Destination::File(p) => std::fs::write(p, &artifact.bytes).map_err(|e| {
                Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
            })?,
        }
    }
    stdout.flush()?;
    Ok(outcome.failure)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(stdout, "{e}");
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let message = e.render().to_string();
            let _ = stderr.write_all(&error_json(ErrorKind::Validation, message.trim()));
            return ErrorKind::Validation.exit_code();
        }
    };
    let failure = match run_command(&cli.command, stdout) {
        Ok(None) => return 0,
        Ok(Some(e)) | Err(e) => e,
    };
    let _ = stderr.write_all(&error_json(failure.kind(), &failure.to_string()));
    failure.kind().exit_code()
}
