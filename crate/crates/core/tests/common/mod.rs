//! Oracles shared by the integration tests. Integrals go through the
//! double-exponential rules of the `quadrature` crate, independent of the
//! engine's Gauss–Legendre code.
#![allow(dead_code)]

use std::f64::consts::PI;

use xferscat::amplitudes::{AmplitudeTable, Side};
use xferscat::linalg::C64;
use xferscat::potentials::{Envelope, Potential2D};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, 1e-13).integral
}

pub fn integrate_c(f: impl Fn(f64) -> C64, a: f64, b: f64) -> C64 {
    C64::new(integrate(|x| f(x).re, a, b), integrate(|x| f(x).im, a, b))
}

/// `∫_0^∞ f`, as panels of width `width` up to `cut`, beyond which the
/// integrand must be negligible.
pub fn integrate_half_line(f: impl Fn(f64) -> C64, width: f64, cut: f64) -> C64 {
    let panels = (cut / width).ceil() as usize;
    (0..panels).map(|i| integrate_c(&f, i as f64 * width, (i + 1) as f64 * width)).sum()
}

pub fn gaussian(z: f64) -> Potential2D {
    Potential2D::gaussian(c(z, 0.0), [0.0, 0.0], [1.0, 1.0], 0.0).unwrap()
}

pub fn rational(alpha: f64, m: u32, a: f64, z: C64) -> Potential2D {
    Potential2D::rational(Envelope::new(0.0, 1.0), alpha, m, a, z).unwrap()
}

pub fn max_diff(a: &AmplitudeTable, b: &AmplitudeTable) -> f64 {
    a.rows.iter().zip(&b.rows).map(|(x, y)| (x.f - y.f).norm()).fold(0.0, f64::max)
}

/// Sup-norm gap between two tables relative to the second.
pub fn rel_gap(a: &AmplitudeTable, b: &AmplitudeTable) -> f64 {
    max_diff(a, b) / b.max_abs()
}

pub const SIDES: [Side; 2] = Side::BOTH;

pub fn deg(d: f64) -> f64 {
    d * PI / 180.0
}

/// `n` output angles spread over the circle, avoiding grazing directions.
pub fn thetas(n: usize) -> Vec<f64> {
    xferscat::amplitudes::default_thetas(n)
}
