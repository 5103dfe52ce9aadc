//! Operations shared by the command line and the HTTP service, so both
//! produce the same bytes for the same input.

use std::io::Read;

use hueshift_core::analysis::{discriminability_curves, fit_ellipse, max_discriminability, DiscriminabilityCurve};
use hueshift_core::colorspace::{srgb_decode, SRgb8, Xy};
use hueshift_core::cvd::CvdType;
use hueshift_core::ellipse::ThresholdEllipse;
use hueshift_core::image::{rotate_image, simulate_image, FileFormat, Image};
use hueshift_core::naming::{nearest_k, ColorDictionary, ColorName, Variant};
use hueshift_core::psychophysics::{make_study_config, run_study, summarize_study, EllipseSummary, SimulatedObserver};
use hueshift_core::rotation::{shift_trajectory, RotationAngle, TrajectoryPoint};
use hueshift_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parses `r,g,b` with 8-bit channels.
pub fn parse_rgb(s: &str) -> Result<SRgb8> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [r, g, b] = parts.as_slice() else {
        return Err(Error::Domain(format!("expected r,g,b, got '{s}'")));
    };
    let ch = |v: &str| v.parse::<u8>().map_err(|_| Error::Domain(format!("channel '{v}' is not an integer in 0..=255")));
    Ok(SRgb8::new(ch(r)?, ch(g)?, ch(b)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeLimit {
    pub max_width: u32,
    pub max_height: u32,
}

impl SizeLimit {
    pub const NONE: SizeLimit = SizeLimit { max_width: u32::MAX, max_height: u32::MAX };
}

fn decode(bytes: &[u8], limit: SizeLimit) -> Result<Image> {
    Image::decode_limited(bytes, limit.max_width, limit.max_height)
}

pub fn rotate_encoded(bytes: &[u8], theta_deg: f64, format: FileFormat, limit: SizeLimit) -> Result<Vec<u8>> {
    if !theta_deg.is_finite() {
        return Err(Error::Domain(format!("theta must be finite, got {theta_deg}")));
    }
    rotate_image(&decode(bytes, limit)?, RotationAngle::from_degrees(theta_deg)).encode(format)
}

pub fn simulate_encoded(bytes: &[u8], cvd: CvdType, format: FileFormat, limit: SizeLimit) -> Result<Vec<u8>> {
    simulate_image(&decode(bytes, limit)?, cvd).encode(format)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NameCandidate {
    pub name: String,
    pub variant: Variant,
    pub label: String,
    pub distance: f64,
}

impl From<ColorName> for NameCandidate {
    fn from(n: ColorName) -> Self {
        Self { label: n.label(), name: n.name, variant: n.variant, distance: n.distance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NameReport {
    pub name: String,
    pub variant: Variant,
    pub label: String,
    pub distance: f64,
    pub runner_ups: Vec<NameCandidate>,
}

/// Nearest entry plus the next `k - 1`.
pub fn name_report(dict: &ColorDictionary, c: SRgb8, k: usize) -> Result<NameReport> {
    let mut ranked = nearest_k(srgb_decode(c), dict, k)?.into_iter().map(NameCandidate::from);
    let best = ranked.next().expect("k >= 1");
    Ok(NameReport { name: best.name, variant: best.variant, label: best.label, distance: best.distance, runner_ups: ranked.collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryRow {
    pub name: String,
    pub variant: Variant,
    pub label: String,
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

pub fn dictionary_rows(dict: &ColorDictionary) -> Vec<DictionaryRow> {
    dict.entries()
        .iter()
        .map(|e| DictionaryRow {
            name: e.name.clone(),
            variant: e.variant,
            label: e.label(),
            r: e.color.r,
            g: e.color.g,
            b: e.color.b,
        })
        .collect()
}

pub const MAX_TRAJECTORY_SAMPLES: usize = 100_000;

pub fn trajectory(c: SRgb8, samples: usize) -> Result<Vec<TrajectoryPoint>> {
    if samples > MAX_TRAJECTORY_SAMPLES {
        return Err(Error::Domain(format!("at most {MAX_TRAJECTORY_SAMPLES} samples, got {samples}")));
    }
    shift_trajectory(srgb_decode(c), samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig9Params {
    pub base: SRgb8,
    pub cvd: CvdType,
    pub spacing: f64,
    pub count: usize,
    pub step_deg: f64,
}

impl Default for Fig9Params {
    fn default() -> Self {
        Self { base: SRgb8::new(136, 136, 136), cvd: CvdType::Protan, spacing: 5.0, count: 13, step_deg: 1.0 }
    }
}

pub const MAX_FIG9_COUNT: usize = 101;
pub const MIN_FIG9_STEP_DEG: f64 = 0.1;

pub fn fig9_curves(p: &Fig9Params) -> Result<Vec<DiscriminabilityCurve>> {
    if p.count > MAX_FIG9_COUNT {
        return Err(Error::Domain(format!("at most {MAX_FIG9_COUNT} colors, got {}", p.count)));
    }
    if p.step_deg < MIN_FIG9_STEP_DEG {
        return Err(Error::Domain(format!("angle step must be at least {MIN_FIG9_STEP_DEG}°, got {}", p.step_deg)));
    }
    discriminability_curves(srgb_decode(p.base), p.cvd, p.spacing, p.count, p.step_deg)
}

/// One row per (pair, angle): `pair_index,theta_deg,jnd`.
pub fn fig9_csv(curves: &[DiscriminabilityCurve]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Domain(e.to_string());
    w.write_record(["pair_index", "theta_deg", "jnd"]).map_err(io)?;
    for (i, c) in curves.iter().enumerate() {
        for s in &c.samples {
            w.write_record([i.to_string(), s.theta_deg.to_string(), s.jnd.0.to_string()]).map_err(io)?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Domain(e.to_string()))?).expect("csv is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub pair_index: usize,
    pub theta_star: f64,
    pub jnd_max: f64,
    pub jnd_at_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig9Summary {
    pub params: Fig9Params,
    pub pairs: Vec<PairSummary>,
}

pub fn fig9_summary(p: &Fig9Params, curves: &[DiscriminabilityCurve]) -> Result<Fig9Summary> {
    let pairs = curves
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (theta_star, jnd) = max_discriminability(c)?;
            let jnd_at_zero = c.samples.first().map_or(0.0, |s| s.jnd.0);
            Ok(PairSummary { pair_index: i, theta_star, jnd_max: jnd.0, jnd_at_zero })
        })
        .collect::<Result<_>>()?;
    Ok(Fig9Summary { params: *p, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig9Curve {
    pub pair_index: usize,
    pub theta_star: f64,
    pub jnd_max: f64,
    pub samples: Vec<hueshift_core::analysis::CurveSample>,
}

/// Full curves for plotting.
pub fn fig9_json_curves(curves: &[DiscriminabilityCurve]) -> Result<Vec<Fig9Curve>> {
    curves
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (theta_star, jnd) = max_discriminability(c)?;
            Ok(Fig9Curve { pair_index: i, theta_star, jnd_max: jnd.0, samples: c.samples.clone() })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipseReport {
    pub ellipse: ThresholdEllipse,
    pub area: f64,
}

#[derive(Debug, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
}

/// Fits an ellipse to a CSV of `x,y` chromaticities.
pub fn ellipse_from_csv<R: Read>(reader: R) -> Result<EllipseReport> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let points = rdr
        .deserialize::<PointRow>()
        .enumerate()
        .map(|(i, row)| {
            row.map(|r| Xy::new(r.x, r.y)).map_err(|e| Error::Domain(format!("row {}: {e}", i + 2)))
        })
        .collect::<Result<Vec<_>>>()?;
    let ellipse = fit_ellipse(&points)?;
    Ok(EllipseReport { area: ellipse.area(), ellipse })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudySummary {
    pub seed: u64,
    pub observer: SimulatedObserver,
    pub ellipses: Vec<EllipseSummary>,
}

pub struct StudyOutput {
    /// `base_name,line,direction,phase,threshold_delta_e`, in run order.
    pub csv: String,
    pub summary_json: String,
}

pub fn study(o: &SimulatedObserver, seed: u64) -> Result<StudyOutput> {
    let cfg = make_study_config(seed);
    let records = run_study(o, &cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Domain(e.to_string());
    w.write_record(["base_name", "line", "direction", "phase", "threshold_delta_e"]).map_err(io)?;
    for r in &records {
        w.write_record([
            r.base_name.clone(),
            r.line.to_string(),
            r.direction.to_string(),
            r.phase.to_string(),
            r.threshold_delta_e.to_string(),
        ])
        .map_err(io)?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| Error::Domain(e.to_string()))?).expect("csv is utf-8");
    let summary = StudySummary { seed, observer: *o, ellipses: summarize_study(&records) };
    Ok(StudyOutput { csv, summary_json: to_json(&summary) })
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
