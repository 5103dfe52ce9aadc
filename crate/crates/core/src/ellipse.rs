//! Threshold ellipses: direct least-squares ellipse fitting in xy.
//!
//! The fit is the numerically stable form of the ellipse-specific direct
//! method (Halíř–Flusser split of Fitzgibbon's constrained problem): the
//! conic minimizing algebraic error subject to `4AC − B² = 1`. Points are
//! centered and scaled before fitting so chromaticity-sized data
//! (spreads around 1e-2) stays well conditioned.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::colorspace::Xy;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEllipse {
    pub center: Xy,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Angle of the major axis from +x, radians in `[0, π)`.
    pub orientation: f64,
}

impl ThresholdEllipse {
    pub fn area(&self) -> f64 {
        ellipse_area(self)
    }

    /// Point at parametric angle `t`.
    pub fn point_at(&self, t: f64) -> Xy {
        let (s, c) = self.orientation.sin_cos();
        let (u, v) = (self.semi_major * t.cos(), self.semi_minor * t.sin());
        Xy::new(self.center.x + u * c - v * s, self.center.y + u * s + v * c)
    }
}

pub fn ellipse_area(e: &ThresholdEllipse) -> f64 {
    std::f64::consts::PI * e.semi_major * e.semi_minor
}

fn wrap_pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(std::f64::consts::PI);
    if a >= std::f64::consts::PI {
        0.0
    } else {
        a
    }
}

/// General conic `A x² + B xy + C y² + D x + E y + F = 0` to geometric form.
fn conic_to_ellipse(k: [f64; 6]) -> Result<(Xy, f64, f64, f64)> {
    let [a, b, c, d, e, f] = k;
    if b * b - 4.0 * a * c >= 0.0 {
        return Err(Error::Fit("best-fit conic is not an ellipse".into()));
    }
    let center = Matrix2::new(2.0 * a, b, b, 2.0 * c)
        .try_inverse()
        .map(|inv| inv * Vector2::new(-d, -e))
        .ok_or_else(|| Error::Fit("degenerate conic".into()))?;
    let (x0, y0) = (center[0], center[1]);
    let f0 = f + 0.5 * (d * x0 + e * y0);
    let eig = Matrix2::new(a, b / 2.0, b / 2.0, c).symmetric_eigen();
    let (l0, l1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let (r0, r1) = (-f0 / l0, -f0 / l1);
    if !(r0 > 0.0 && r1 > 0.0) {
        return Err(Error::Fit("conic has no real points".into()));
    }
    let (s0, s1) = (r0.sqrt(), r1.sqrt());
    // major axis follows the smaller eigenvalue
    let (major, minor, axis) = if s0 >= s1 { (s0, s1, eig.eigenvectors.column(0)) } else { (s1, s0, eig.eigenvectors.column(1)) };
    let orientation = wrap_pi(axis[1].atan2(axis[0]));
    Ok((Xy::new(x0, y0), major, minor, orientation))
}

/// Eigenvector of `m` for eigenvalue `lambda`, via the null space of `m − λI`.
fn eigenvector(m: &Matrix3<f64>, lambda: f64) -> Vector3<f64> {
    let shifted = m - Matrix3::identity() * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    v_t.row(idx).transpose()
}

/// Direct least-squares ellipse through at least five points.
pub fn fit_ellipse(points: &[Xy]) -> Result<ThresholdEllipse> {
    if points.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {}", points.len())));
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::Fit("non-finite point".into()));
    }
    let n = points.len() as f64;
    let (mx, my) = (points.iter().map(|p| p.x).sum::<f64>() / n, points.iter().map(|p| p.y).sum::<f64>() / n);
    let scale = (points.iter().map(|p| (p.x - mx).powi(2) + (p.y - my).powi(2)).sum::<f64>() / n).sqrt();
    if !(scale > 0.0) {
        return Err(Error::Fit("points are coincident".into()));
    }
    let norm: Vec<(f64, f64)> = points.iter().map(|p| ((p.x - mx) / scale, (p.y - my) / scale)).collect();

    // collinearity: smallest principal variance of the normalized cloud
    let (sxx, sxy, syy) = norm.iter().fold((0.0, 0.0, 0.0), |(a, b, c), (x, y)| (a + x * x, b + x * y, c + y * y));
    let cov = Matrix2::new(sxx, sxy, sxy, syy) / n;
    if cov.symmetric_eigenvalues().min() < 1e-10 {
        return Err(Error::Fit("points are collinear".into()));
    }

    let mut s1 = Matrix3::zeros();
    let mut s2 = Matrix3::zeros();
    let mut s3 = Matrix3::zeros();
    for &(x, y) in &norm {
        let quad = Vector3::new(x * x, x * y, y * y);
        let lin = Vector3::new(x, y, 1.0);
        s1 += quad * quad.transpose();
        s2 += quad * lin.transpose();
        s3 += lin * lin.transpose();
    }
    let s3_inv = s3.try_inverse().ok_or_else(|| Error::Fit("singular scatter matrix".into()))?;
    let t = -s3_inv * s2.transpose();
    let reduced = s1 + s2 * t;
    // inverse of the constraint block [[0, 0, 2], [0, -1, 0], [2, 0, 0]]
    let c1_inv = Matrix3::new(0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0);
    let m = c1_inv * reduced;

    let eigenvalues = m.eigenvalues().ok_or_else(|| Error::Fit("complex eigenvalues in ellipse fit".into()))?;
    let best = eigenvalues
        .iter()
        .map(|&l| eigenvector(&m, l))
        .filter(|v| 4.0 * v[0] * v[2] - v[1] * v[1] > 0.0)
        .min_by(|a, b| {
            let ra = (a.transpose() * reduced * a)[0] / (4.0 * a[0] * a[2] - a[1] * a[1]);
            let rb = (b.transpose() * reduced * b)[0] / (4.0 * b[0] * b[2] - b[1] * b[1]);
            ra.total_cmp(&rb)
        })
        .ok_or_else(|| Error::Fit("best-fit conic is not an ellipse".into()))?;
    let lin = t * best;
    let (c, major, minor, orientation) = conic_to_ellipse([best[0], best[1], best[2], lin[0], lin[1], lin[2]])?;

    Ok(ThresholdEllipse {
        center: Xy::new(mx + scale * c.x, my + scale * c.y),
        semi_major: major * scale,
        semi_minor: minor * scale,
        orientation,
    })
}
