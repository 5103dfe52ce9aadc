//! Hue rotation about the gray axis, dichromat simulation, color naming and
//! a simulated discrimination study.

pub mod analysis;
pub mod colorspace;
pub mod cvd;
pub mod ellipse;
pub mod error;
pub mod image;
pub mod mat3;
pub mod naming;
pub mod par;
pub mod psychophysics;
pub mod rotation;

pub use error::{Error, Result};
