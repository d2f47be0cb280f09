use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_positive, factorial, SUPPORT_SIGMAS};
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

/// Unit-peak Gaussian profile `exp(-(x - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub center: f64,
    pub width: f64,
}

impl Envelope {
    pub fn new(center: f64, width: f64) -> Self {
        Self { center, width }
    }

    pub fn value(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.width;
        (-0.5 * t * t).exp()
    }

    /// `∫ dx e^{-i kx x} g(x)`.
    pub fn fourier(&self, kx: f64) -> C64 {
        let s = self.width;
        C64::from_polar(s * (2.0 * PI).sqrt() * (-0.5 * s * s * kx * kx).exp(), -kx * self.center)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - SUPPORT_SIGMAS * self.width, self.center + SUPPORT_SIGMAS * self.width)
    }
}

/// Samples `values[ix * ny + iy]` at `(x0 + ix dx, y0 + iy dy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub y0: f64,
    pub dy: f64,
    pub ny: usize,
    pub values: Vec<C64>,
}

impl Tabulated {
    fn validate(&self) -> Result<()> {
        check_positive("dx", self.dx)?;
        check_positive("dy", self.dy)?;
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::invalid("tabulated potentials need at least 2x2 samples"));
        }
        if self.values.len() != self.nx * self.ny {
            return Err(Error::invalid(format!(
                "tabulated potential has {} values, expected {}",
                self.values.len(),
                self.nx * self.ny
            )));
        }
        Ok(())
    }

    fn at(&self, ix: usize, iy: usize) -> C64 {
        self.values[ix * self.ny + iy]
    }

    /// Fractional row position and the bracketing rows, or `None` outside.
    fn bracket(start: f64, step: f64, n: usize, x: f64) -> Option<(usize, f64)> {
        let t = (x - start) / step;
        if t < 0.0 || t > (n - 1) as f64 {
            return None;
        }
        let i = (t.floor() as usize).min(n - 2);
        Some((i, t - i as f64))
    }

    fn eval(&self, x: f64, y: f64) -> C64 {
        let (Some((ix, tx)), Some((iy, ty))) = (
            Self::bracket(self.x0, self.dx, self.nx, x),
            Self::bracket(self.y0, self.dy, self.ny, y),
        ) else {
            return ZERO;
        };
        let a = self.at(ix, iy) * (1.0 - ty) + self.at(ix, iy + 1) * ty;
        let b = self.at(ix + 1, iy) * (1.0 - ty) + self.at(ix + 1, iy + 1) * ty;
        a * (1.0 - tx) + b * tx
    }

    /// Trapezoidal DFT of one sample row.
    fn row_fourier(&self, ix: usize, ky: f64) -> C64 {
        let mut s = ZERO;
        for iy in 0..self.ny {
            let y = self.y0 + iy as f64 * self.dy;
            let w = if iy == 0 || iy == self.ny - 1 { 0.5 } else { 1.0 };
            s += self.at(ix, iy) * C64::from_polar(w * self.dy, -ky * y);
        }
        s
    }

    fn fourier_y(&self, x: f64, ky: f64) -> C64 {
        match Self::bracket(self.x0, self.dx, self.nx, x) {
            None => ZERO,
            Some((ix, tx)) => self.row_fourier(ix, ky) * (1.0 - tx) + self.row_fourier(ix + 1, ky) * tx,
        }
    }

    fn fourier_2d(&self, kx: f64, ky: f64) -> C64 {
        let mut s = ZERO;
        for ix in 0..self.nx {
            let x = self.x0 + ix as f64 * self.dx;
            let w = if ix == 0 || ix == self.nx - 1 { 0.5 } else { 1.0 };
            s += self.row_fourier(ix, ky) * C64::from_polar(w * self.dx, -kx * x);
        }
        s
    }
}

/// A scattering potential `v(x, y)` in two dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Potential2D {
    /// `z exp(-(x-x0)²/2σx² - (y-y0)²/2σy²) e^{iβy}`.
    GaussianBump {
        amplitude: C64,
        center: [f64; 2],
        widths: [f64; 2],
        #[serde(default)]
        modulation: f64,
    },
    /// `δ(x) Σ_{n=-N}^{N} z_n e^{i n α1 y}`; `coefficients[i]` holds `z_{i-N}`.
    DeltaComb { coefficients: Vec<C64>, lattice_frequency: f64 },
    /// `g(x) z m! e^{2iαy} / (a - iy)^{m+1}`, whose y-transform is supported
    /// on `Ky ≥ 2α`.
    RationalDeformation2D {
        envelope: Envelope,
        alpha: f64,
        order: u32,
        decay: f64,
        amplitude: C64,
    },
    Tabulated(Tabulated),
    Sum { members: Vec<Potential2D> },
}

/// Factorized y-transform `x_part(x) * ky_part(Ky)` of an analytic leaf.
pub(crate) enum Leaf<'a> {
    Separable(&'a Potential2D),
    General(&'a Potential2D),
}

impl Potential2D {
    pub fn zero() -> Self {
        Potential2D::Sum { members: Vec::new() }
    }

    pub fn gaussian(amplitude: C64, center: [f64; 2], widths: [f64; 2], modulation: f64) -> Result<Self> {
        let v = Potential2D::GaussianBump { amplitude, center, widths, modulation };
        v.validate()?;
        Ok(v)
    }

    /// Comb with coefficients `z_{-N} ..= z_N`.
    pub fn delta_comb(coefficients: Vec<C64>, lattice_frequency: f64) -> Result<Self> {
        let v = Potential2D::DeltaComb { coefficients, lattice_frequency };
        v.validate()?;
        Ok(v)
    }

    pub fn rational(envelope: Envelope, alpha: f64, order: u32, decay: f64, amplitude: C64) -> Result<Self> {
        let v = Potential2D::RationalDeformation2D { envelope, alpha, order, decay, amplitude };
        v.validate()?;
        Ok(v)
    }

    pub fn sum(members: Vec<Potential2D>) -> Self {
        Potential2D::Sum { members }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential2D::GaussianBump { widths, modulation, amplitude, center } => {
                check_positive("sigma_x", widths[0])?;
                check_positive("sigma_y", widths[1])?;
                if !(modulation.is_finite() && amplitude.is_finite() && center.iter().all(|c| c.is_finite())) {
                    return Err(Error::invalid("Gaussian parameters must be finite"));
                }
                Ok(())
            }
            Potential2D::DeltaComb { coefficients, lattice_frequency } => {
                check_positive("lattice frequency", *lattice_frequency)?;
                if coefficients.len() % 2 == 0 {
                    return Err(Error::invalid("comb coefficients must have odd length 2N+1"));
                }
                Ok(())
            }
            Potential2D::RationalDeformation2D { envelope, alpha, decay, .. } => {
                check_positive("envelope width", envelope.width)?;
                check_positive("alpha", *alpha)?;
                check_positive("decay", *decay)
            }
            Potential2D::Tabulated(t) => t.validate(),
            Potential2D::Sum { members } => members.iter().try_for_each(Potential2D::validate),
        }
    }

    /// Truncation order `N` of a comb.
    pub fn comb_order(&self) -> Option<usize> {
        match self {
            Potential2D::DeltaComb { coefficients, .. } => Some(coefficients.len() / 2),
            _ => None,
        }
    }

    pub fn eval_position(&self, x: f64, y: f64) -> Result<C64> {
        Ok(match self {
            Potential2D::GaussianBump { amplitude, center, widths, modulation } => {
                let tx = (x - center[0]) / widths[0];
                let ty = (y - center[1]) / widths[1];
                amplitude * C64::from_polar((-0.5 * (tx * tx + ty * ty)).exp(), modulation * y)
            }
            Potential2D::DeltaComb { .. } => return Err(Error::DistributionalVariant),
            Potential2D::RationalDeformation2D { envelope, alpha, order, decay, amplitude } => {
                let denom = (C64::new(*decay, -y)).powu(order + 1);
                amplitude * factorial(*order) * C64::from_polar(envelope.value(x), 2.0 * alpha * y) / denom
            }
            Potential2D::Tabulated(t) => t.eval(x, y),
            Potential2D::Sum { members } => {
                let mut s = ZERO;
                for m in members {
                    s += m.eval_position(x, y)?;
                }
                s
            }
        })
    }

    /// `ṽ(x, Ky) = ∫ dy e^{-i Ky y} v(x, y)`.
    pub fn fourier_y(&self, x: f64, ky: f64) -> Result<C64> {
        Ok(match self {
            Potential2D::GaussianBump { .. } | Potential2D::RationalDeformation2D { .. } => {
                self.x_factor(x) * self.ky_factor(ky)
            }
            Potential2D::DeltaComb { .. } => return Err(Error::CombRequiresLattice),
            Potential2D::Tabulated(t) => t.fourier_y(x, ky),
            Potential2D::Sum { members } => {
                let mut s = ZERO;
                for m in members {
                    s += m.fourier_y(x, ky)?;
                }
                s
            }
        })
    }

    /// Full transform `∫∫ dx dy e^{-i(Kx x + Ky y)} v(x, y)`.
    pub fn fourier_2d(&self, kx: f64, ky: f64) -> Result<C64> {
        Ok(match self {
            Potential2D::GaussianBump { center, widths, .. } => {
                Envelope::new(center[0], widths[0]).fourier(kx) * self.ky_factor(ky)
            }
            Potential2D::RationalDeformation2D { envelope, .. } => envelope.fourier(kx) * self.ky_factor(ky),
            Potential2D::DeltaComb { .. } => return Err(Error::CombRequiresLattice),
            Potential2D::Tabulated(t) => t.fourier_2d(kx, ky),
            Potential2D::Sum { members } => {
                let mut s = ZERO;
                for m in members {
                    s += m.fourier_2d(kx, ky)?;
                }
                s
            }
        })
    }

    /// x-dependence of a separable leaf's y-transform.
    pub(crate) fn x_factor(&self, x: f64) -> f64 {
        match self {
            Potential2D::GaussianBump { center, widths, .. } => Envelope::new(center[0], widths[0]).value(x),
            Potential2D::RationalDeformation2D { envelope, .. } => envelope.value(x),
            _ => unreachable!("x_factor on a non-separable family"),
        }
    }

    /// Ky-dependence of a separable leaf's y-transform.
    pub(crate) fn ky_factor(&self, ky: f64) -> C64 {
        match self {
            Potential2D::GaussianBump { amplitude, center, widths, modulation } => {
                let s = widths[1];
                let d = ky - modulation;
                amplitude * C64::from_polar(s * (2.0 * PI).sqrt() * (-0.5 * s * s * d * d).exp(), -d * center[1])
            }
            Potential2D::RationalDeformation2D { alpha, order, decay, amplitude, .. } => {
                let q = ky - 2.0 * alpha;
                if q < 0.0 {
                    ZERO
                } else {
                    amplitude * (2.0 * PI * q.powi(*order as i32) * (-decay * q).exp())
                }
            }
            _ => unreachable!("ky_factor on a non-separable family"),
        }
    }

    pub(crate) fn leaves(&self) -> Vec<Leaf<'_>> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<Leaf<'a>>) {
        match self {
            Potential2D::GaussianBump { .. } | Potential2D::RationalDeformation2D { .. } => {
                out.push(Leaf::Separable(self))
            }
            Potential2D::Sum { members } => members.iter().for_each(|m| m.collect_leaves(out)),
            _ => out.push(Leaf::General(self)),
        }
    }

    /// x-interval outside of which the potential is treated as zero;
    /// `None` for the empty sum.
    pub fn x_support(&self) -> Option<(f64, f64)> {
        match self {
            Potential2D::GaussianBump { center, widths, .. } => {
                Some(Envelope::new(center[0], widths[0]).support())
            }
            Potential2D::DeltaComb { .. } => Some((0.0, 0.0)),
            Potential2D::RationalDeformation2D { envelope, .. } => Some(envelope.support()),
            Potential2D::Tabulated(t) => Some((t.x0, t.x0 + (t.nx - 1) as f64 * t.dx)),
            Potential2D::Sum { members } => members
                .iter()
                .filter_map(Potential2D::x_support)
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
        }
    }

    pub fn contains_comb(&self) -> bool {
        match self {
            Potential2D::DeltaComb { .. } => true,
            Potential2D::Sum { members } => members.iter().any(Potential2D::contains_comb),
            _ => false,
        }
    }

    /// True when every member has identically vanishing coefficients.
    pub fn is_zero(&self) -> bool {
        match self {
            Potential2D::GaussianBump { amplitude, .. } | Potential2D::RationalDeformation2D { amplitude, .. } => {
                *amplitude == ZERO
            }
            Potential2D::DeltaComb { coefficients, .. } => coefficients.iter().all(|c| *c == ZERO),
            Potential2D::Tabulated(t) => t.values.iter().all(|c| *c == ZERO),
            Potential2D::Sum { members } => members.iter().all(Potential2D::is_zero),
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let mut v = self.clone();
        v.scale_in_place(factor);
        v
    }

    pub fn negated(&self) -> Self {
        self.scaled(-ONE)
    }

    fn scale_in_place(&mut self, factor: C64) {
        match self {
            Potential2D::GaussianBump { amplitude, .. } | Potential2D::RationalDeformation2D { amplitude, .. } => {
                *amplitude *= factor
            }
            Potential2D::DeltaComb { coefficients, .. } => coefficients.iter_mut().for_each(|c| *c *= factor),
            Potential2D::Tabulated(t) => t.values.iter_mut().for_each(|c| *c *= factor),
            Potential2D::Sum { members } => members.iter_mut().for_each(|m| m.scale_in_place(factor)),
        }
    }

    /// `self - other`.
    pub fn difference(&self, other: &Potential2D) -> Potential2D {
        Potential2D::sum(vec![self.clone(), other.negated()])
    }
}

/// Adds `g(x) e^{2iαy} ∫_0^∞ e^{iyq} z q^m e^{-aq} dq` to `base`. The result
/// scatters exactly like `base` for every incident wavenumber `k ≤ α`.
pub fn construct_deformation_2d(
    base: &Potential2D,
    alpha: f64,
    order: u32,
    decay: f64,
    amplitude: C64,
    envelope: Envelope,
) -> Result<Potential2D> {
    let u = Potential2D::rational(envelope, alpha, order, decay, amplitude)?;
    Ok(Potential2D::sum(vec![base.clone(), u]))
}
