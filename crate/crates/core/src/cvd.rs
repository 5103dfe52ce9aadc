//! Dichromat model: perceived-color simulation, copunctal points, confusion
//! lines and the spectral anchors of the perceived-color surface.
//!
//! Simulation is the two-half-plane LMS projection: the missing cone's
//! response is replaced so that the color lands on the half-plane spanned by
//! the neutral axis and one spectral anchor (575/475 nm for protans and
//! deutans, 660/485 nm for tritans). Colors the projection pushes outside
//! the sRGB cube are desaturated toward the gray of equal luminance, which
//! keeps them on the same half-plane.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::colorspace::{
    delta_e_linear, linear_to_lms, linear_to_xy, lms_to_linear, xyz_to_lms, xyz_to_xy, LinearRgb, Lms, Xy, Xyz,
    LMS_TO_XYZ, SRGB_TO_XYZ,
};
use crate::error::{Error, Result};
use crate::mat3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvdType {
    Protan,
    Deutan,
    Tritan,
}

impl CvdType {
    pub const ALL: [CvdType; 3] = [CvdType::Protan, CvdType::Deutan, CvdType::Tritan];

    /// Index of the missing cone in `(L, M, S)`.
    pub const fn missing_cone(self) -> usize {
        match self {
            CvdType::Protan => 0,
            CvdType::Deutan => 1,
            CvdType::Tritan => 2,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            CvdType::Protan => "protan",
            CvdType::Deutan => "deutan",
            CvdType::Tritan => "tritan",
        }
    }

    /// Anchor wavelengths in nm, long-wave side first.
    pub const fn anchor_wavelengths(self) -> [f64; 2] {
        match self {
            CvdType::Protan | CvdType::Deutan => [575.0, 475.0],
            CvdType::Tritan => [660.0, 485.0],
        }
    }
}

impl fmt::Display for CvdType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CvdType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "protan" | "protanope" | "protanopia" => Ok(CvdType::Protan),
            "deutan" | "deuteranope" | "deuteranopia" => Ok(CvdType::Deutan),
            "tritan" | "tritanope" | "tritanopia" => Ok(CvdType::Tritan),
            other => Err(Error::Domain(format!("unknown CVD type '{other}' (expected protan, deutan or tritan)"))),
        }
    }
}

// ── spectral locus ─────────────────────────────────────────────────────────

/// CIE 1931 2° colour-matching functions, 380–780 nm at 5 nm.
const CMF_CSV: &str = include_str!("../data/cie1931_2deg_5nm.csv");

static CMF: LazyLock<Vec<(f64, Xyz)>> = LazyLock::new(|| {
    CMF_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.trim().parse().expect("embedded CMF table")).collect();
            (v[0], Xyz { x: v[1], y: v[2], z: v[3] })
        })
        .collect()
});

/// Tristimulus value of a unit-power monochromatic stimulus, linearly
/// interpolated. `None` outside the tabulated range.
pub fn spectral_xyz(wavelength_nm: f64) -> Option<Xyz> {
    let table = &*CMF;
    let (first, last) = (table[0].0, table[table.len() - 1].0);
    if !(first..=last).contains(&wavelength_nm) {
        return None;
    }
    let i = table.partition_point(|(w, _)| *w <= wavelength_nm).saturating_sub(1);
    if i + 1 >= table.len() {
        return Some(table[i].1);
    }
    let ((w0, a), (w1, b)) = (table[i], table[i + 1]);
    let t = (wavelength_nm - w0) / (w1 - w0);
    Some(Xyz { x: a.x + t * (b.x - a.x), y: a.y + t * (b.y - a.y), z: a.z + t * (b.z - a.z) })
}

/// Chromaticity of a spectral color.
pub fn spectral_xy(wavelength_nm: f64) -> Option<Xy> {
    spectral_xyz(wavelength_nm).and_then(|c| xyz_to_xy(c).ok())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsochromeAnchors {
    pub cvd: CvdType,
    pub wavelengths_nm: [f64; 2],
    pub chromaticities: [Xy; 2],
}

pub fn isochrome_anchors(t: CvdType) -> IsochromeAnchors {
    let wavelengths_nm = t.anchor_wavelengths();
    let chromaticities = wavelengths_nm.map(|w| spectral_xy(w).expect("anchor inside the CMF table"));
    IsochromeAnchors { cvd: t, wavelengths_nm, chromaticities }
}

// ── simulation ─────────────────────────────────────────────────────────────

struct HalfPlanes {
    missing: usize,
    /// Plane normals (neutral × anchor) for the long- and short-wave anchors.
    long: [f64; 3],
    short: [f64; 3],
}

impl HalfPlanes {
    fn new(t: CvdType) -> Self {
        let neutral = [1.0; 3];
        let [long, short] = t
            .anchor_wavelengths()
            .map(|w| mat3::cross(neutral, xyz_to_lms(spectral_xyz(w).expect("anchor in table")).to_array()));
        Self { missing: t.missing_cone(), long, short }
    }

    /// Which half-plane a color projects onto. The test compares the two
    /// remaining cone ratios against the neutral axis (all ones).
    fn normal_for(&self, q: [f64; 3]) -> &[f64; 3] {
        let use_long = match self.missing {
            0 => q[2] < q[1],
            1 => q[2] < q[0],
            _ => q[1] < q[0],
        };
        if use_long {
            &self.long
        } else {
            &self.short
        }
    }

    fn project(&self, mut q: [f64; 3]) -> [f64; 3] {
        let n = self.normal_for(q);
        let i = self.missing;
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        q[i] = -(n[j] * q[j] + n[k] * q[k]) / n[i];
        q
    }
}

static PLANES: LazyLock<[HalfPlanes; 3]> = LazyLock::new(|| CvdType::ALL.map(HalfPlanes::new));

fn planes(t: CvdType) -> &'static HalfPlanes {
    &PLANES[t.missing_cone()]
}

/// Moves an out-of-cube color toward the gray of equal luminance until every
/// channel is in `[0, 1]`.
fn desaturate_into_gamut(c: LinearRgb) -> LinearRgb {
    let v = c.to_array();
    let lum = mat3::dot(SRGB_TO_XYZ[1], v).clamp(0.0, 1.0);
    let mut t: f64 = 0.0;
    for x in v {
        if x > 1.0 {
            t = t.max((x - 1.0) / (x - lum));
        } else if x < 0.0 {
            t = t.max(-x / (lum - x));
        }
    }
    let t = t.min(1.0);
    LinearRgb::from_array(v.map(|x| (x + t * (lum - x)).clamp(0.0, 1.0)))
}

/// The trichromatic color a dichromat of type `t` confuses with `c`, before
/// any gamut mapping. Saturated inputs can land outside the cube.
pub fn dichromat_percept(c: LinearRgb, t: CvdType) -> LinearRgb {
    let q = linear_to_lms(c).to_array();
    lms_to_linear(Lms::from_array(planes(t).project(q)))
}

/// What a dichromat of type `t` perceives, as a displayable color with the
/// same appearance.
pub fn simulate_dichromat(c: LinearRgb, t: CvdType) -> LinearRgb {
    desaturate_into_gamut(dichromat_percept(c, t))
}

/// Distance of a color's missing-cone response from the perceived surface.
pub fn surface_residual(c: LinearRgb, t: CvdType) -> f64 {
    let q = linear_to_lms(c).to_array();
    let p = planes(t).project(q);
    (p[t.missing_cone()] - q[t.missing_cone()]).abs()
}

// ── confusion geometry ─────────────────────────────────────────────────────

/// Point where all confusion lines of type `t` meet: the chromaticity of the
/// missing cone's axis.
pub fn copunctal_point(t: CvdType) -> Xy {
    let i = t.missing_cone();
    let axis = Xyz { x: LMS_TO_XYZ[0][i], y: LMS_TO_XYZ[1][i], z: LMS_TO_XYZ[2][i] };
    xyz_to_xy(axis).expect("cone axis has a non-zero tristimulus sum")
}

/// Colors a dichromat cannot tell apart from `base`: varying only the
/// missing cone's response. In xy this is the line through the base
/// chromaticity and the copunctal point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionLine {
    pub cvd: CvdType,
    pub base_color: LinearRgb,
    pub base: Xy,
    pub copunctal: Xy,
    /// Unit vector from `base` toward `copunctal`.
    pub direction: [f64; 2],
}

impl ConfusionLine {
    /// Color whose missing-cone response is offset by `offset` (normalized
    /// LMS units) from the base color.
    pub fn color_at(&self, offset: f64) -> LinearRgb {
        if offset == 0.0 {
            return self.base_color;
        }
        let mut q = linear_to_lms(self.base_color).to_array();
        q[self.cvd.missing_cone()] += offset;
        lms_to_linear(Lms::from_array(q))
    }
}

pub fn confusion_line(base: LinearRgb, t: CvdType) -> Result<ConfusionLine> {
    if !base.is_finite() || !base.in_gamut(1e-12) {
        return Err(Error::Domain(format!("confusion line base {base:?} is outside the sRGB gamut")));
    }
    let xy = linear_to_xy(base)?;
    let copunctal = copunctal_point(t);
    let (dx, dy) = (copunctal.x - xy.x, copunctal.y - xy.y);
    let len = dx.hypot(dy);
    if len < 1e-12 {
        return Err(Error::Domain("confusion line base coincides with the copunctal point".into()));
    }
    Ok(ConfusionLine { cvd: t, base_color: base, base: xy, copunctal, direction: [dx / len, dy / len] })
}

const GAMUT_EPS: f64 = 1e-12;
const MAX_OFFSET: f64 = 8.0;

/// Offset `s` on side `sign` with ΔE76(color(from), color(s)) = `target`.
/// `None` when the line cannot reach that distance.
fn solve_step(line: &ConfusionLine, from: f64, sign: f64, target: f64) -> Option<f64> {
    let origin = line.color_at(from);
    let gap = |s: f64| delta_e_linear(origin, line.color_at(s)) - target;
    let mut h = 1e-3;
    while gap(from + sign * h) < 0.0 {
        h *= 2.0;
        if h > MAX_OFFSET {
            return None;
        }
    }
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(from + sign * mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(from + sign * 0.5 * (lo + hi))
}

/// Offsets reachable by walking `spacing` steps from `start` while staying
/// in gamut, at most `limit` of them.
fn walk(line: &ConfusionLine, start: f64, sign: f64, spacing: f64, limit: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = start;
    while out.len() < limit {
        match solve_step(line, s, sign, spacing) {
            Some(next) if line.color_at(next).in_gamut(GAMUT_EPS) => {
                out.push(next);
                s = next;
            }
            _ => break,
        }
    }
    out
}

/// `n` in-gamut colors on the type-`t` confusion line through `base`,
/// consecutive colors `spacing` ΔE76 apart and centered on `base`.
///
/// Samples vary only the missing cone, so they share one dichromat percept.
pub fn sample_confusion_line(base: LinearRgb, t: CvdType, spacing: f64, n: usize) -> Result<Vec<LinearRgb>> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Domain(format!("spacing must be positive, got {spacing}")));
    }
    let line = confusion_line(base, t)?;
    let half = n.div_ceil(2);

    // Odd counts: the base itself plus equal steps either side.
    let odd_up = walk(&line, 0.0, 1.0, spacing, half);
    let odd_down = walk(&line, 0.0, -1.0, spacing, half);
    // Even counts: two samples half a step either side of the base.
    let first_up = solve_step(&line, 0.0, 1.0, spacing / 2.0).filter(|&s| line.color_at(s).in_gamut(GAMUT_EPS));
    let first_down = solve_step(&line, 0.0, -1.0, spacing / 2.0).filter(|&s| line.color_at(s).in_gamut(GAMUT_EPS));
    let (even_up, even_down) = match (first_up, first_down) {
        (Some(u), Some(d)) => {
            let mut up = vec![u];
            up.extend(walk(&line, u, 1.0, spacing, half - 1));
            let mut down = vec![d];
            down.extend(walk(&line, d, -1.0, spacing, half - 1));
            (up, down)
        }
        _ => (Vec::new(), Vec::new()),
    };

    let fits = |m: usize| {
        if m % 2 == 1 {
            let k = (m - 1) / 2;
            odd_up.len() >= k && odd_down.len() >= k
        } else {
            let k = m / 2;
            even_up.len() >= k && even_down.len() >= k
        }
    };
    if !fits(n) {
        let achievable = (1..n).rev().find(|&m| m == 1 || fits(m)).unwrap_or(1);
        return Err(Error::GamutTooSmall { requested: n, achievable });
    }

    let offsets: Vec<f64> = if n % 2 == 1 {
        let k = (n - 1) / 2;
        odd_down[..k].iter().rev().copied().chain(std::iter::once(0.0)).chain(odd_up[..k].iter().copied()).collect()
    } else {
        let k = n / 2;
        even_down[..k].iter().rev().chain(even_up[..k].iter()).copied().collect()
    };
    Ok(offsets
        .into_iter()
        .map(|s| {
            let c = line.color_at(s);
            LinearRgb::new(c.r.clamp(0.0, 1.0), c.g.clamp(0.0, 1.0), c.b.clamp(0.0, 1.0))
        })
        .collect())
}
