//! Colorimetric foundation: display sRGB, linear sRGB, CIE XYZ, xy
//! chromaticity, LMS cone space and CIELAB.
//!
//! Conventions:
//! - sRGB primaries with a D65 white; linear `(1, 1, 1)` maps to the white
//!   point with `Y = 1`.
//! - The tone curve is the full IEC 61966-2-1 piecewise function.
//! - LMS uses the Smith–Pokorny cone fundamentals, rows scaled so that D65
//!   white maps to `(1, 1, 1)`:
//!
//!   ```text
//!   L =  0.15514 X + 0.54312 Y − 0.03286 Z
//!   M = −0.15514 X + 0.45684 Y + 0.03286 Z
//!   S =                           0.00801 Z
//!   ```
//!
//!   Their cone axes project exactly onto the classical protan, deutan and
//!   tritan copunctal points, so confusion lines and the dichromat
//!   simulation share one geometry.
//! - CIELAB is relative to the same D65 white; color differences use the
//!   1976 Euclidean formula.

use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat3::{self, Mat3};

/// One just-noticeable difference expressed in ΔE76 units.
pub const JND_DELTA_E: f64 = 2.3;

/// Display-encoded 8-bit sRGB color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SRgb8 {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl SRgb8 {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub const fn to_array(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }
}

/// Scene-linear sRGB. Values outside `[0, 1]` are allowed (unclipped
/// rotation output).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearRgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl LinearRgb {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Self { r, g, b }
    }

    pub const fn gray(v: f64) -> Self {
        Self { r: v, g: v, b: v }
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Self { r: a[0], g: a[1], b: a[2] }
    }

    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }

    /// True when every channel lies in `[-eps, 1 + eps]`.
    pub fn in_gamut(self, eps: f64) -> bool {
        self.to_array().iter().all(|&v| v >= -eps && v <= 1.0 + eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Xyz {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Xyz {
    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Self { x: a[0], y: a[1], z: a[2] }
    }
}

/// CIE 1931 xy chromaticity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Xy {
    pub x: f64,
    pub y: f64,
}

impl Xy {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Xy) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Cone excitations, normalized so D65 white is `(1, 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Lms {
    pub l: f64,
    pub m: f64,
    pub s: f64,
}

impl Lms {
    pub const fn to_array(self) -> [f64; 3] {
        [self.l, self.m, self.s]
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Self { l: a[0], m: a[1], s: a[2] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Lab {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Self { l, a, b }
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.l, self.a, self.b]
    }

    pub const fn from_array(v: [f64; 3]) -> Self {
        Self { l: v[0], a: v[1], b: v[2] }
    }
}

/// A color difference in just-noticeable-difference units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Jnd(pub f64);

impl Jnd {
    pub fn value(self) -> f64 {
        self.0
    }

    /// The same difference in ΔE76 units.
    pub fn to_delta_e(self) -> f64 {
        self.0 * JND_DELTA_E
    }
}

pub const SRGB_TO_XYZ: Mat3 = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

pub static XYZ_TO_SRGB: LazyLock<Mat3> = LazyLock::new(|| mat3::inverse(&SRGB_TO_XYZ));

/// D65 white as the image of linear `(1, 1, 1)`.
pub static D65: LazyLock<Xyz> = LazyLock::new(|| Xyz::from_array(mat3::mul_vec(&SRGB_TO_XYZ, [1.0; 3])));

const SMITH_POKORNY: Mat3 = [
    [0.155_14, 0.543_12, -0.032_86],
    [-0.155_14, 0.456_84, 0.032_86],
    [0.0, 0.0, 0.008_01],
];

pub static XYZ_TO_LMS: LazyLock<Mat3> =
    LazyLock::new(|| mat3::normalize_rows_to(&SMITH_POKORNY, D65.to_array()));

pub static LMS_TO_XYZ: LazyLock<Mat3> = LazyLock::new(|| mat3::inverse(&XYZ_TO_LMS));

pub static LINEAR_TO_LMS: LazyLock<Mat3> = LazyLock::new(|| mat3::mul(&XYZ_TO_LMS, &SRGB_TO_XYZ));

pub static LMS_TO_LINEAR: LazyLock<Mat3> = LazyLock::new(|| mat3::inverse(&LINEAR_TO_LMS));

/// IEC 61966-2-1 decoding of a normalized channel value.
#[inline]
pub fn srgb_eotf(v: f64) -> f64 {
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// IEC 61966-2-1 encoding of a linear channel value.
#[inline]
pub fn srgb_oetf(v: f64) -> f64 {
    if v <= 0.003_130_8 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

static DECODE_LUT: LazyLock<[f64; 256]> = LazyLock::new(|| {
    let mut lut = [0.0; 256];
    for (i, v) in lut.iter_mut().enumerate() {
        *v = srgb_eotf(i as f64 / 255.0);
    }
    lut
});

#[inline]
pub fn decode_channel(code: u8) -> f64 {
    DECODE_LUT[code as usize]
}

pub fn srgb_decode(c: SRgb8) -> LinearRgb {
    LinearRgb::new(decode_channel(c.r), decode_channel(c.g), decode_channel(c.b))
}

/// Encodes a linear channel in `[0, 1]` to the nearest 8-bit code.
#[inline]
pub fn encode_channel(v: f64) -> u8 {
    (srgb_oetf(v.clamp(0.0, 1.0)) * 255.0).round() as u8
}

pub fn srgb_encode(c: LinearRgb) -> Result<SRgb8> {
    if !c.is_finite() || !c.in_gamut(0.0) {
        return Err(Error::Domain(format!(
            "linear color ({}, {}, {}) is outside [0, 1]",
            c.r, c.g, c.b
        )));
    }
    Ok(SRgb8::new(encode_channel(c.r), encode_channel(c.g), encode_channel(c.b)))
}

pub fn linear_to_xyz(c: LinearRgb) -> Xyz {
    Xyz::from_array(mat3::mul_vec(&SRGB_TO_XYZ, c.to_array()))
}

pub fn xyz_to_linear(c: Xyz) -> LinearRgb {
    LinearRgb::from_array(mat3::mul_vec(&XYZ_TO_SRGB, c.to_array()))
}

pub fn xyz_to_xy(c: Xyz) -> Result<Xy> {
    let sum = c.x + c.y + c.z;
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::Domain("chromaticity of a zero-sum tristimulus value".into()));
    }
    Ok(Xy::new(c.x / sum, c.y / sum))
}

/// Tristimulus value with chromaticity `xy` and luminance `y_lum`.
pub fn xy_to_xyz(xy: Xy, y_lum: f64) -> Result<Xyz> {
    if xy.y == 0.0 {
        return Err(Error::Domain("chromaticity with y = 0 has no luminance scaling".into()));
    }
    let k = y_lum / xy.y;
    Ok(Xyz { x: xy.x * k, y: y_lum, z: (1.0 - xy.x - xy.y) * k })
}

pub fn linear_to_xy(c: LinearRgb) -> Result<Xy> {
    xyz_to_xy(linear_to_xyz(c))
}

pub fn xyz_to_lms(c: Xyz) -> Lms {
    Lms::from_array(mat3::mul_vec(&XYZ_TO_LMS, c.to_array()))
}

pub fn lms_to_xyz(c: Lms) -> Xyz {
    Xyz::from_array(mat3::mul_vec(&LMS_TO_XYZ, c.to_array()))
}

pub fn linear_to_lms(c: LinearRgb) -> Lms {
    Lms::from_array(mat3::mul_vec(&LINEAR_TO_LMS, c.to_array()))
}

pub fn lms_to_linear(c: Lms) -> LinearRgb {
    LinearRgb::from_array(mat3::mul_vec(&LMS_TO_LINEAR, c.to_array()))
}

const LAB_EPS: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

#[inline]
fn lab_f(t: f64) -> f64 {
    if t > LAB_EPS {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

#[inline]
fn lab_f_inv(f: f64) -> f64 {
    let t = f * f * f;
    if t > LAB_EPS {
        t
    } else {
        (116.0 * f - 16.0) / LAB_KAPPA
    }
}

pub fn lab_from_xyz(c: Xyz) -> Lab {
    let w = *D65;
    let fx = lab_f(c.x / w.x);
    let fy = lab_f(c.y / w.y);
    let fz = lab_f(c.z / w.z);
    Lab::new(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

pub fn xyz_from_lab(c: Lab) -> Xyz {
    let w = *D65;
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    Xyz { x: w.x * lab_f_inv(fx), y: w.y * lab_f_inv(fy), z: w.z * lab_f_inv(fz) }
}

pub fn lab_from_linear(c: LinearRgb) -> Lab {
    lab_from_xyz(linear_to_xyz(c))
}

pub fn linear_from_lab(c: Lab) -> LinearRgb {
    xyz_to_linear(xyz_from_lab(c))
}

pub fn delta_e76(a: Lab, b: Lab) -> f64 {
    let (dl, da, db) = (a.l - b.l, a.a - b.a, a.b - b.b);
    (dl * dl + da * da + db * db).sqrt()
}

/// ΔE76 between two linear colors.
pub fn delta_e_linear(a: LinearRgb, b: LinearRgb) -> f64 {
    delta_e76(lab_from_linear(a), lab_from_linear(b))
}

pub fn delta_e_to_jnd(d: f64) -> Result<Jnd> {
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("color difference {d} must be a finite non-negative value")));
    }
    Ok(Jnd(d / JND_DELTA_E))
}
