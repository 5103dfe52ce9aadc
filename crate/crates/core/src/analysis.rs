//! Discriminability of confusable pairs under rotation, measured on what
//! the dichromat perceives.

use serde::{Deserialize, Serialize};

use crate::colorspace::{delta_e_linear, Jnd, LinearRgb, JND_DELTA_E};
use crate::cvd::{dichromat_percept, sample_confusion_line, CvdType};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rotation::{shift_color, RotationAngle};

pub use crate::ellipse::{ellipse_area, fit_ellipse, ThresholdEllipse};

/// ΔE76 between the dichromat percepts of two colors after both are
/// rotated by `theta` and clipped.
pub fn perceived_difference(a: LinearRgb, b: LinearRgb, cvd: CvdType, theta: RotationAngle) -> f64 {
    let pa = dichromat_percept(shift_color(a, theta), cvd);
    let pb = dichromat_percept(shift_color(b, theta), cvd);
    delta_e_linear(pa, pb)
}

pub fn perceived_jnd(a: LinearRgb, b: LinearRgb, cvd: CvdType, theta: RotationAngle) -> Jnd {
    Jnd(perceived_difference(a, b, cvd, theta) / JND_DELTA_E)
}

/// Angles `0, step, 2·step, …` below 360°, each computed as `i · step`.
pub fn angle_grid(step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0) || !step_deg.is_finite() || step_deg > 360.0 {
        return Err(Error::Domain(format!("angle step must be in (0, 360], got {step_deg}")));
    }
    Ok((0..).map(|i| i as f64 * step_deg).take_while(|&a| a < 360.0).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub theta_deg: f64,
    pub jnd: Jnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminabilityCurve {
    pub pair: (LinearRgb, LinearRgb),
    pub samples: Vec<CurveSample>,
}

impl DiscriminabilityCurve {
    pub fn compute(a: LinearRgb, b: LinearRgb, cvd: CvdType, angles_deg: &[f64]) -> Self {
        let samples = angles_deg
            .iter()
            .map(|&d| CurveSample { theta_deg: d, jnd: perceived_jnd(a, b, cvd, RotationAngle::from_degrees(d)) })
            .collect();
        Self { pair: (a, b), samples }
    }
}

/// Samples `count` colors `spacing` ΔE apart on the confusion line through
/// `base` and traces the perceived difference of every adjacent pair over a
/// full turn.
pub fn discriminability_curves(
    base: LinearRgb,
    cvd: CvdType,
    spacing: f64,
    count: usize,
    angle_step_deg: f64,
) -> Result<Vec<DiscriminabilityCurve>> {
    discriminability_curves_with(base, cvd, spacing, count, angle_step_deg, Exec::default())
}

pub fn discriminability_curves_with(
    base: LinearRgb,
    cvd: CvdType,
    spacing: f64,
    count: usize,
    angle_step_deg: f64,
    exec: Exec,
) -> Result<Vec<DiscriminabilityCurve>> {
    let angles = angle_grid(angle_step_deg)?;
    let colors = sample_confusion_line(base, cvd, spacing, count)?;
    let pairs: Vec<(LinearRgb, LinearRgb)> = colors.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(par::map_slice(exec, &pairs, |&(a, b)| DiscriminabilityCurve::compute(a, b, cvd, &angles)))
}

/// Angle of the largest perceived difference; ties go to the smallest angle.
pub fn max_discriminability(curve: &DiscriminabilityCurve) -> Result<(f64, Jnd)> {
    let mut best: Option<&CurveSample> = None;
    for s in &curve.samples {
        let better = match best {
            None => true,
            Some(b) => s.jnd.0 > b.jnd.0 || (s.jnd.0 == b.jnd.0 && s.theta_deg < b.theta_deg),
        };
        if better {
            best = Some(s);
        }
    }
    best.map(|s| (s.theta_deg, s.jnd)).ok_or_else(|| Error::Domain("empty discriminability curve".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::{srgb_decode, SRgb8};

    fn gray() -> LinearRgb {
        srgb_decode(SRgb8::new(136, 136, 136))
    }

    #[test]
    fn grid() {
        assert_eq!(angle_grid(1.0).unwrap().len(), 360);
        assert_eq!(angle_grid(7.0).unwrap().len(), 52);
        assert_eq!(angle_grid(360.0).unwrap(), vec![0.0]);
        assert!(angle_grid(0.0).is_err() && angle_grid(-1.0).is_err() && angle_grid(f64::NAN).is_err());
    }

    #[test]
    fn identical_pair_is_flat_zero() {
        let c = LinearRgb::new(0.2, 0.4, 0.3);
        let curve = DiscriminabilityCurve::compute(c, c, CvdType::Protan, &angle_grid(10.0).unwrap());
        let (theta, jnd) = max_discriminability(&curve).unwrap();
        assert_eq!(jnd.0, 0.0);
        assert_eq!(theta, 0.0);
    }

    #[test]
    fn argmax_ties_and_scaling() {
        let mk = |vals: &[f64]| DiscriminabilityCurve {
            pair: (LinearRgb::default(), LinearRgb::default()),
            samples: vals.iter().enumerate().map(|(i, &v)| CurveSample { theta_deg: i as f64 * 10.0, jnd: Jnd(v) }).collect(),
        };
        assert_eq!(max_discriminability(&mk(&[1.0, 3.0, 2.0, 3.0])).unwrap().0, 10.0);
        let base = mk(&[0.5, 1.5, 4.0, 2.0, 4.0 - 1e-9]);
        let scaled = mk(&[0.5 * 3.7, 1.5 * 3.7, 4.0 * 3.7, 2.0 * 3.7, (4.0 - 1e-9) * 3.7]);
        assert_eq!(max_discriminability(&base).unwrap().0, max_discriminability(&scaled).unwrap().0);
        assert!(max_discriminability(&mk(&[])).is_err());
    }

    #[test]
    fn curves_are_periodic() {
        let colors = sample_confusion_line(gray(), CvdType::Protan, 5.0, 3).unwrap();
        for w in colors.windows(2) {
            let a = perceived_jnd(w[0], w[1], CvdType::Protan, RotationAngle::ZERO).0;
            let b = perceived_jnd(w[0], w[1], CvdType::Protan, RotationAngle::from_degrees(360.0)).0;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn halving_the_step_keeps_shared_angles() {
        let coarse = discriminability_curves(gray(), CvdType::Protan, 5.0, 4, 10.0).unwrap();
        let fine = discriminability_curves(gray(), CvdType::Protan, 5.0, 4, 5.0).unwrap();
        for (c, f) in coarse.iter().zip(&fine) {
            for (i, s) in c.samples.iter().enumerate() {
                assert_eq!(s.theta_deg.to_bits(), f.samples[2 * i].theta_deg.to_bits());
                assert_eq!(s.jnd.0.to_bits(), f.samples[2 * i].jnd.0.to_bits());
            }
        }
    }

    #[test]
    fn pairs_start_confusable() {
        let curves = discriminability_curves(gray(), CvdType::Protan, 5.0, 13, 30.0).unwrap();
        assert_eq!(curves.len(), 12);
        for c in &curves {
            assert_eq!(c.samples[0].theta_deg, 0.0);
            assert!(c.samples[0].jnd.0 <= 1.0);
            assert!(c.samples.iter().all(|s| s.jnd.0 >= 0.0));
        }
    }

    #[test]
    fn executors_agree() {
        let a = discriminability_curves_with(gray(), CvdType::Deutan, 5.0, 5, 15.0, Exec::Sequential).unwrap();
        let b = discriminability_curves_with(gray(), CvdType::Deutan, 5.0, 5, 15.0, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
