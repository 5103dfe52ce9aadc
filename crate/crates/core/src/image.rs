//! 8-bit sRGB images and the per-pixel pipelines over them.
//!
//! Reads and writes PNG (RGB or RGBA, alpha passed through untouched) and
//! binary PPM (P6).

use std::path::Path;
use std::sync::LazyLock;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use crate::colorspace::{decode_channel, delta_e_linear, srgb_decode, srgb_eotf, LinearRgb, SRgb8};
use crate::cvd::{simulate_dichromat, CvdType};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rotation::{rotation_matrix, RotationAngle};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<SRgb8>,
    alpha: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Png,
    Ppm,
}

impl FileFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("png") => Ok(FileFormat::Png),
            Some("ppm") | Some("pnm") => Ok(FileFormat::Ppm),
            _ => Err(Error::Image(format!("{}: unsupported image extension (expected .png or .ppm)", path.display()))),
        }
    }
}

impl Image {
    pub fn new(width: u32, height: u32, pixels: Vec<SRgb8>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::Image(format!(
                "pixel count {} does not match {width}×{height}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels, alpha: None })
    }

    pub fn with_alpha(mut self, alpha: Vec<u8>) -> Result<Self> {
        if alpha.len() != self.pixels.len() {
            return Err(Error::Image("alpha plane size does not match the image".into()));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    pub fn filled(width: u32, height: u32, c: SRgb8) -> Self {
        Self { width, height, pixels: vec![c; width as usize * height as usize], alpha: None }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[SRgb8] {
        &self.pixels
    }

    pub fn alpha(&self) -> Option<&[u8]> {
        self.alpha.as_deref()
    }

    pub fn pixel(&self, x: u32, y: u32) -> Option<SRgb8> {
        (x < self.width && y < self.height).then(|| self.pixels[(y * self.width + x) as usize])
    }

    /// Same geometry and alpha, new colors.
    fn with_pixels(&self, pixels: Vec<SRgb8>) -> Self {
        Self { width: self.width, height: self.height, pixels, alpha: self.alpha.clone() }
    }

    fn sniff(bytes: &[u8]) -> Result<ImageFormat> {
        let format = image::guess_format(bytes).map_err(|_| Error::UnsupportedFormat("not a PNG or PPM file".into()))?;
        if !matches!(format, ImageFormat::Png | ImageFormat::Pnm) {
            return Err(Error::UnsupportedFormat(format!("{format:?}")));
        }
        Ok(format)
    }

    /// Width and height from the header alone.
    pub fn dimensions(bytes: &[u8]) -> Result<(u32, u32)> {
        let format = Self::sniff(bytes)?;
        image::ImageReader::with_format(std::io::Cursor::new(bytes), format)
            .into_dimensions()
            .map_err(|e| Error::Image(e.to_string()))
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let format = Self::sniff(bytes)?;
        let dynamic = image::load_from_memory_with_format(bytes, format).map_err(|e| Error::Image(e.to_string()))?;
        let (width, height) = (dynamic.width(), dynamic.height());
        if dynamic.color().has_alpha() {
            let rgba = dynamic.into_rgba8();
            let mut pixels = Vec::with_capacity(width as usize * height as usize);
            let mut alpha = Vec::with_capacity(pixels.capacity());
            for p in rgba.pixels() {
                pixels.push(SRgb8::new(p[0], p[1], p[2]));
                alpha.push(p[3]);
            }
            Image::new(width, height, pixels)?.with_alpha(alpha)
        } else {
            let rgb = dynamic.into_rgb8();
            let pixels = rgb.pixels().map(|p| SRgb8::new(p[0], p[1], p[2])).collect();
            Image::new(width, height, pixels)
        }
    }

    /// Like [`Image::decode`], but rejects images larger than the limits
    /// before decoding any pixels.
    pub fn decode_limited(bytes: &[u8], max_width: u32, max_height: u32) -> Result<Self> {
        let (width, height) = Self::dimensions(bytes)?;
        if width > max_width || height > max_height {
            return Err(Error::TooLarge { width, height, max_width, max_height });
        }
        Self::decode(bytes)
    }

    pub fn encode(&self, format: FileFormat) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let err = |e: image::ImageError| Error::Image(e.to_string());
        match (format, &self.alpha) {
            (FileFormat::Png, Some(alpha)) => {
                let buf: Vec<u8> = self.pixels.iter().zip(alpha).flat_map(|(p, &a)| [p.r, p.g, p.b, a]).collect();
                PngEncoder::new(&mut out)
                    .write_image(&buf, self.width, self.height, ExtendedColorType::Rgba8)
                    .map_err(err)?;
            }
            (FileFormat::Png, None) => {
                PngEncoder::new(&mut out)
                    .write_image(&self.rgb_bytes(), self.width, self.height, ExtendedColorType::Rgb8)
                    .map_err(err)?;
            }
            (FileFormat::Ppm, _) => {
                PnmEncoder::new(&mut out)
                    .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
                    .write_image(&self.rgb_bytes(), self.width, self.height, ExtendedColorType::Rgb8)
                    .map_err(err)?;
            }
        }
        Ok(out)
    }

    pub fn rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.to_array()).collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Image(format!("{}: {e}", path.display())))?;
        Self::decode(&bytes).map_err(|e| Error::Image(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.encode(FileFormat::from_path(path)?)?;
        std::fs::write(path, bytes).map_err(|e| Error::Image(format!("{}: {e}", path.display())))
    }
}

/// f32 transfer tables for the image kernels.
struct TransferTables {
    decode: [f32; 256],
    /// `bounds[k]` is the smallest linear value that encodes to code `k`.
    bounds: [f32; 256],
    /// Lower-bound code for each of `COARSE` equal bins of `[0, 1]`.
    coarse: Vec<u8>,
}

const COARSE: usize = 4096;

static TABLES: LazyLock<TransferTables> = LazyLock::new(|| {
    let mut decode = [0f32; 256];
    let mut bounds = [0f32; 256];
    for k in 0..256 {
        decode[k] = decode_channel(k as u8) as f32;
        bounds[k] = if k == 0 { f32::NEG_INFINITY } else { srgb_eotf((k as f64 - 0.5) / 255.0) as f32 };
    }
    let mut coarse = vec![0u8; COARSE];
    let mut k = 0usize;
    for (i, slot) in coarse.iter_mut().enumerate() {
        let v = i as f32 / COARSE as f32;
        while k < 255 && v >= bounds[k + 1] {
            k += 1;
        }
        *slot = k as u8;
    }
    TransferTables { decode, bounds, coarse }
});

impl TransferTables {
    #[inline]
    fn encode(&self, v: f32) -> u8 {
        let v = v.clamp(0.0, 1.0);
        let mut k = self.coarse[((v * COARSE as f32) as usize).min(COARSE - 1)] as usize;
        while k < 255 && v >= self.bounds[k + 1] {
            k += 1;
        }
        k as u8
    }
}

/// Decode → rotate → clip → encode for every pixel, on the default executor.
pub fn rotate_image(img: &Image, theta: RotationAngle) -> Image {
    rotate_image_with(img, theta, Exec::default())
}

pub fn rotate_image_with(img: &Image, theta: RotationAngle, exec: Exec) -> Image {
    let m = rotation_matrix(theta).to_f32();
    let t = &*TABLES;
    let mut out = vec![SRgb8::default(); img.pixels.len()];
    par::map_into(exec, &img.pixels, &mut out, |p| {
        let (r, g, b) = (t.decode[p.r as usize], t.decode[p.g as usize], t.decode[p.b as usize]);
        SRgb8::new(
            t.encode(m[0][0] * r + m[0][1] * g + m[0][2] * b),
            t.encode(m[1][0] * r + m[1][1] * g + m[1][2] * b),
            t.encode(m[2][0] * r + m[2][1] * g + m[2][2] * b),
        )
    });
    img.with_pixels(out)
}

/// Dichromat appearance of every pixel.
pub fn simulate_image(img: &Image, cvd: CvdType) -> Image {
    simulate_image_with(img, cvd, Exec::default())
}

pub fn simulate_image_with(img: &Image, cvd: CvdType, exec: Exec) -> Image {
    let mut out = vec![SRgb8::default(); img.pixels.len()];
    par::map_into(exec, &img.pixels, &mut out, |p| {
        let s = simulate_dichromat(srgb_decode(p), cvd);
        quantize_stable(s, cvd)
    });
    img.with_pixels(out)
}

/// Quantizes a simulated color so that simulating the result again gives
/// back the same codes. Plain rounding leaves pixels slightly off the
/// dichromat's surface and, near black, the steep transfer curve turns the
/// re-projection into several codes of drift. When the rounded code is not
/// already stable it is iterated to a stable code; if that wanders more than
/// one code away, every neighbour is iterated and the stable code closest to
/// `s` wins.
fn quantize_stable(s: LinearRgb, cvd: CvdType) -> SRgb8 {
    let step = |q: SRgb8| round(simulate_dichromat(srgb_decode(q), cvd));
    let rounded = round(s);
    if step(rounded) == rounded {
        return rounded;
    }
    let settle = |mut q: SRgb8| {
        for _ in 0..SETTLE_ITERATIONS {
            let next = step(q);
            if next == q {
                return Some(q);
            }
            q = next;
        }
        None
    };
    let c = rounded.to_array().map(i32::from);
    let near = |q: SRgb8| q.to_array().iter().zip(c).all(|(&a, b)| (i32::from(a) - b).abs() <= 1);
    if let Some(q) = settle(rounded).filter(|&q| near(q)) {
        return q;
    }
    let mut best: Option<(f64, SRgb8)> = None;
    for k in 0..27 {
        let code = [c[0] + k % 3 - 1, c[1] + k / 3 % 3 - 1, c[2] + k / 9 - 1];
        if code.iter().any(|v| !(0..=255).contains(v)) {
            continue;
        }
        if let Some(q) = settle(SRgb8::new(code[0] as u8, code[1] as u8, code[2] as u8)) {
            let e = delta_e_linear(srgb_decode(q), s);
            if best.is_none_or(|(d, _)| e < d) {
                best = Some((e, q));
            }
        }
    }
    best.map_or(rounded, |(_, q)| q)
}

const SETTLE_ITERATIONS: usize = 16;

fn round(c: LinearRgb) -> SRgb8 {
    let t = &*TABLES;
    SRgb8::new(t.encode(c.r as f32), t.encode(c.g as f32), t.encode(c.b as f32))
}
