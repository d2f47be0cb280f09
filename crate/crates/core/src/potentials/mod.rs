//! Potential families, their partial Fourier transforms, the closed-form
//! deformations that leave low-wavenumber scattering untouched, and
//! one-sided support checks.

mod support;
mod three_d;
mod two_d;

pub use support::{check_onesided_support, SupportGrid, SupportReport};
pub use three_d::{construct_deformation_3d, deformation_amplitude_3d, Deformation3D, Potential3D};
pub(crate) use two_d::Leaf;
pub use two_d::{construct_deformation_2d, Envelope, Potential2D, Tabulated};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian envelopes are treated as zero beyond this many widths.
pub const SUPPORT_SIGMAS: f64 = 8.0;

/// A potential of either dimensionality, as stored in JSON files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Potential {
    TwoD(Potential2D),
    ThreeD(Potential3D),
}

impl Potential {
    /// `v2 - v1`, as a sum with the negated first member.
    pub fn difference(v2: &Potential, v1: &Potential) -> Result<Potential> {
        match (v2, v1) {
            (Potential::TwoD(a), Potential::TwoD(b)) => Ok(Potential::TwoD(a.difference(b))),
            (Potential::ThreeD(a), Potential::ThreeD(b)) => Ok(Potential::ThreeD(a.difference(b))),
            _ => Err(Error::DimensionMismatch),
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}
