//! Rotation of colors about the gray axis of linear sRGB.
//!
//! For an angle θ, with `u = 1/√3`, `c = cos θ`, `s = sin θ` and
//! `k = u²(1 − c)`, the transform is
//!
//! ```text
//! ⎡ c + k    k − us   k + us ⎤
//! ⎢ k + us   c + k    k − us ⎥
//! ⎣ k − us   k + us   c + k  ⎦
//! ```
//!
//! Positive angles move red toward green: at 120° the matrix is the cyclic
//! permutation `(r, g, b) → (b, r, g)`.

use serde::{Deserialize, Serialize};

use crate::colorspace::{linear_to_xy, LinearRgb};
use crate::error::{Error, Result};
use crate::mat3::{self, Mat3};

/// Rotation angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RotationAngle(f64);

impl RotationAngle {
    pub const ZERO: RotationAngle = RotationAngle(0.0);

    pub const fn from_radians(theta: f64) -> Self {
        Self(theta)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self(deg.to_radians())
    }

    pub const fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Same angle mapped into `[0, 2π)`.
    pub fn normalized(self) -> Self {
        let tau = std::f64::consts::TAU;
        let r = self.0.rem_euclid(tau);
        // rem_euclid can round up to exactly τ for tiny negative inputs
        Self(if r >= tau { 0.0 } else { r })
    }
}

impl std::ops::Add for RotationAngle {
    type Output = RotationAngle;

    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

/// Orthogonal 3×3 matrix rotating about `(1, 1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationTransform {
    m: Mat3,
}

impl RotationTransform {
    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn apply(&self, c: LinearRgb) -> LinearRgb {
        LinearRgb::from_array(mat3::mul_vec(&self.m, c.to_array()))
    }

    /// Single-precision copy of the matrix, row-major.
    pub fn to_f32(&self) -> [[f32; 3]; 3] {
        self.m.map(|row| row.map(|v| v as f32))
    }
}

pub fn rotation_matrix(theta: RotationAngle) -> RotationTransform {
    let u = 1.0 / 3f64.sqrt();
    let (s, c) = theta.radians().sin_cos();
    let k = u * u * (1.0 - c);
    let us = u * s;
    RotationTransform {
        m: [
            [c + k, k - us, k + us],
            [k + us, c + k, k - us],
            [k - us, k + us, c + k],
        ],
    }
}

/// Rotates without clipping; the result may leave the unit cube.
pub fn rotate_color(c: LinearRgb, theta: RotationAngle) -> LinearRgb {
    rotation_matrix(theta).apply(c)
}

/// Per-channel clamp to `[0, 1]`.
pub fn clip_to_gamut(c: LinearRgb) -> LinearRgb {
    LinearRgb::new(c.r.clamp(0.0, 1.0), c.g.clamp(0.0, 1.0), c.b.clamp(0.0, 1.0))
}

/// Rotate, then clip. This is what a viewer displays for a color.
pub fn shift_color(c: LinearRgb, theta: RotationAngle) -> LinearRgb {
    clip_to_gamut(rotate_color(c, theta))
}

/// One sample of a color's hue-cycling path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub theta_deg: f64,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub g: f64,
    pub b: f64,
    /// Whether any channel had to be clamped at this angle.
    pub clipped: bool,
}

/// Chromaticity of `clip(rotate(c, θ))` at `samples` uniformly spaced angles
/// over `[0, 2π)`.
pub fn shift_trajectory(c: LinearRgb, samples: usize) -> Result<Vec<TrajectoryPoint>> {
    if samples < 2 {
        return Err(Error::Domain(format!("trajectory needs at least 2 samples, got {samples}")));
    }
    if !c.is_finite() {
        return Err(Error::Domain("trajectory of a non-finite color".into()));
    }
    (0..samples)
        .map(|i| {
            let theta = RotationAngle::from_radians(std::f64::consts::TAU * i as f64 / samples as f64);
            let raw = rotate_color(c, theta);
            let shown = clip_to_gamut(raw);
            let xy = linear_to_xy(shown)?;
            Ok(TrajectoryPoint {
                theta_deg: theta.degrees(),
                x: xy.x,
                y: xy.y,
                r: shown.r,
                g: shown.g,
                b: shown.b,
                clipped: raw != shown,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::{linear_to_xyz, xyz_to_xy, D65};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_mat_close(a: &Mat3, b: &Mat3, tol: f64) {
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[i][j]).abs() <= tol, "{a:?} vs {b:?}");
            }
        }
    }

    fn assert_rgb_close(a: LinearRgb, b: LinearRgb, tol: f64) {
        for (x, y) in a.to_array().into_iter().zip(b.to_array()) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identity_at_zero_and_full_turn() {
        assert_eq!(rotation_matrix(RotationAngle::ZERO).matrix(), &mat3::IDENTITY);
        let full = rotation_matrix(RotationAngle::from_radians(std::f64::consts::TAU));
        assert_mat_close(full.matrix(), &mat3::IDENTITY, 1e-12);
    }

    #[test]
    fn third_turn_is_cyclic_permutation() {
        let m = rotation_matrix(RotationAngle::from_degrees(120.0));
        assert_mat_close(m.matrix(), &[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], 1e-12);
        let m = rotation_matrix(RotationAngle::from_degrees(240.0));
        assert_mat_close(m.matrix(), &[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], 1e-12);
        assert_rgb_close(
            rotate_color(LinearRgb::new(1.0, 0.0, 0.0), RotationAngle::from_degrees(120.0)),
            LinearRgb::new(0.0, 1.0, 0.0),
            1e-12,
        );
    }

    #[test]
    fn gray_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let t = RotationAngle::from_radians(rng.random_range(-10.0..10.0));
            assert_rgb_close(rotate_color(LinearRgb::gray(0.5), t), LinearRgb::gray(0.5), 1e-12);
        }
    }

    #[test]
    fn distance_to_gray_axis_preserved() {
        let chroma = |c: LinearRgb| {
            let m = (c.r + c.g + c.b) / 3.0;
            ((c.r - m).powi(2) + (c.g - m).powi(2) + (c.b - m).powi(2)).sqrt()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let c = LinearRgb::new(rng.random(), rng.random(), rng.random());
            let t = RotationAngle::from_radians(rng.random_range(0.0..std::f64::consts::TAU));
            assert!((chroma(rotate_color(c, t)) - chroma(c)).abs() < 1e-9);
        }
    }

    #[test]
    fn clipping() {
        let c = LinearRgb::new(0.3, 0.7, 0.5);
        assert_eq!(clip_to_gamut(c), c);
        assert_eq!(clip_to_gamut(LinearRgb::new(1.2, 0.5, -0.1)), LinearRgb::new(1.0, 0.5, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let c = LinearRgb::new(rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0));
            assert_eq!(clip_to_gamut(clip_to_gamut(c)), clip_to_gamut(c));
        }
    }

    #[test]
    fn normalization() {
        let a = RotationAngle::from_degrees(-90.0).normalized();
        assert!((a.degrees() - 270.0).abs() < 1e-9);
        let a = RotationAngle::from_degrees(725.0).normalized();
        assert!((a.degrees() - 5.0).abs() < 1e-9);
        let a = RotationAngle::from_radians(-1e-300).normalized();
        assert!(a.radians() >= 0.0 && a.radians() < std::f64::consts::TAU);
    }

    #[test]
    fn trajectory_of_gray_sits_on_white_point() {
        let w = xyz_to_xy(*D65).unwrap();
        for p in shift_trajectory(LinearRgb::gray(0.4), 36).unwrap() {
            assert!((p.x - w.x).abs() < 1e-6 && (p.y - w.y).abs() < 1e-6);
            assert!(!p.clipped);
        }
    }

    #[test]
    fn trajectory_wraps_and_saturated_colors_clip() {
        let c = LinearRgb::new(0.45, 0.35, 0.4);
        let a = rotate_color(c, RotationAngle::ZERO);
        let b = rotate_color(c, RotationAngle::from_radians(std::f64::consts::TAU));
        assert_rgb_close(a, b, 1e-9);
        let pts = shift_trajectory(c, 360).unwrap();
        assert!(pts.iter().all(|p| !p.clipped));

        let pts = shift_trajectory(LinearRgb::new(1.0, 0.0, 0.0), 360).unwrap();
        let clipped = pts.iter().filter(|p| p.clipped).count();
        assert!(clipped > 0 && clipped < 360, "{clipped}");
    }

    #[test]
    fn trajectory_rejects_bad_input() {
        assert!(shift_trajectory(LinearRgb::gray(0.5), 1).is_err());
        assert!(shift_trajectory(LinearRgb::gray(0.0), 8).is_err());
    }

    #[test]
    fn trajectory_encloses_area() {
        let c = LinearRgb::new(0.5, 0.3, 0.35);
        let pts: Vec<_> = (0..360)
            .map(|i| {
                let raw = rotate_color(c, RotationAngle::from_degrees(i as f64));
                xyz_to_xy(linear_to_xyz(raw)).unwrap()
            })
            .collect();
        let area: f64 = (0..pts.len())
            .map(|i| {
                let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
                p.x * q.y - q.x * p.y
            })
            .sum::<f64>()
            / 2.0;
        assert!(area.abs() > 1e-4, "{area}");
    }
}
