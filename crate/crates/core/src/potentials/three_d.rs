use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_positive, factorial, SUPPORT_SIGMAS};
use crate::error::{Error, Result};
use crate::linalg::{C64, I, ONE, ZERO};
use crate::quadrature::composite_rule;

/// Parameters of the closed-form 3D deformation
/// `z e^{2iα(x+y)} e^{-z²/2az²} / ((x/ax + i)^{nx+1} (y/ay + i)^{ny+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deformation3D {
    /// Coupling of the momentum-space profile `q_x^{nx} q_y^{ny} e^{-(ax qx + ay qy)}`.
    pub amplitude_tilde: C64,
    /// Position-space prefactor, derived from `amplitude_tilde`.
    pub amplitude: C64,
    pub alpha: f64,
    /// `[ax, ay, az]`.
    pub scales: [f64; 3],
    /// `[nx, ny]`.
    pub orders: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Potential3D {
    Gaussian3D {
        amplitude: C64,
        center: [f64; 3],
        widths: [f64; 3],
    },
    RationalDeformation3D(Deformation3D),
    Sum {
        members: Vec<Potential3D>,
    },
}

fn minus_i_pow(n: u32) -> C64 {
    match n % 4 {
        0 => ONE,
        1 => -I,
        2 => -ONE,
        _ => I,
    }
}

/// `nx! ny! z̃ / [(-i ax)^{nx+1} (-i ay)^{ny+1}]`, evaluated for any orders
/// (the positional closed form is only offered for positive orders).
pub fn deformation_amplitude_3d(amplitude_tilde: C64, ax: f64, ay: f64, nx: u32, ny: u32) -> C64 {
    let denom = minus_i_pow(nx + 1) * minus_i_pow(ny + 1) * ax.powi(nx as i32 + 1) * ay.powi(ny as i32 + 1);
    amplitude_tilde * (factorial(nx) * factorial(ny)) / denom
}

impl Deformation3D {
    pub fn new(alpha: f64, amplitude_tilde: C64, scales: [f64; 3], orders: [u32; 2]) -> Result<Self> {
        check_positive("alpha", alpha)?;
        for (name, s) in ["a_x", "a_y", "a_z"].iter().zip(scales) {
            check_positive(name, s)?;
        }
        if orders.contains(&0) {
            return Err(Error::invalid(
                "deformation orders n_x, n_y must be positive integers (zero orders are not supported)",
            ));
        }
        let amplitude = deformation_amplitude_3d(amplitude_tilde, scales[0], scales[1], orders[0], orders[1]);
        Ok(Self { amplitude_tilde, amplitude, alpha, scales, orders })
    }

    fn validate(&self) -> Result<()> {
        let fresh = Self::new(self.alpha, self.amplitude_tilde, self.scales, self.orders)?;
        if fresh.amplitude != self.amplitude {
            return Err(Error::invalid("stored deformation amplitude disagrees with amplitude_tilde"));
        }
        Ok(())
    }

    fn z_envelope(&self, z: f64) -> f64 {
        let t = z / self.scales[2];
        (-0.5 * t * t).exp()
    }

    fn eval(&self, x: f64, y: f64, z: f64) -> C64 {
        let [ax, ay, _] = self.scales;
        let [nx, ny] = self.orders;
        let dx = C64::new(x / ax, 1.0).powu(nx + 1);
        let dy = C64::new(y / ay, 1.0).powu(ny + 1);
        self.amplitude * C64::from_polar(self.z_envelope(z), 2.0 * self.alpha * (x + y)) / (dx * dy)
    }

    /// `(Kx, Ky)` profile of the transform, without the z envelope.
    fn kxy_profile(&self, kx: f64, ky: f64) -> C64 {
        let qx = kx - 2.0 * self.alpha;
        let qy = ky - 2.0 * self.alpha;
        if qx < 0.0 || qy < 0.0 {
            return ZERO;
        }
        let [ax, ay, _] = self.scales;
        let [nx, ny] = self.orders;
        let mag = 4.0 * PI * PI * qx.powi(nx as i32) * qy.powi(ny as i32) * (-(ax * qx + ay * qy)).exp();
        self.amplitude_tilde * mag
    }
}

impl Potential3D {
    pub fn zero() -> Self {
        Potential3D::Sum { members: Vec::new() }
    }

    pub fn gaussian(amplitude: C64, center: [f64; 3], widths: [f64; 3]) -> Result<Self> {
        let v = Potential3D::Gaussian3D { amplitude, center, widths };
        v.validate()?;
        Ok(v)
    }

    pub fn sum(members: Vec<Potential3D>) -> Self {
        Potential3D::Sum { members }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential3D::Gaussian3D { widths, .. } => {
                widths.iter().try_for_each(|w| check_positive("Gaussian width", *w))
            }
            Potential3D::RationalDeformation3D(d) => d.validate(),
            Potential3D::Sum { members } => members.iter().try_for_each(Potential3D::validate),
        }
    }

    pub fn eval_position(&self, x: f64, y: f64, z: f64) -> C64 {
        match self {
            Potential3D::Gaussian3D { amplitude, center, widths } => {
                let r2: f64 = [x, y, z]
                    .iter()
                    .zip(center)
                    .zip(widths)
                    .map(|((p, c), w)| ((p - c) / w).powi(2))
                    .sum();
                amplitude * (-0.5 * r2).exp()
            }
            Potential3D::RationalDeformation3D(d) => d.eval(x, y, z),
            Potential3D::Sum { members } => members.iter().map(|m| m.eval_position(x, y, z)).sum(),
        }
    }

    /// `ṽ(Kx, Ky, z) = ∫∫ dx dy e^{-i(Kx x + Ky y)} v(x, y, z)`.
    pub fn fourier_xy(&self, kx: f64, ky: f64, z: f64) -> C64 {
        match self {
            Potential3D::Sum { members } => members.iter().map(|m| m.fourier_xy(kx, ky, z)).fold(ZERO, |a, b| a + b),
            _ => self.kxy_factor(kx, ky) * self.z_factor(z),
        }
    }

    /// z-dependence of a leaf's (x, y)-transform.
    pub(crate) fn z_factor(&self, z: f64) -> f64 {
        match self {
            Potential3D::Gaussian3D { center, widths, .. } => {
                let t = (z - center[2]) / widths[2];
                (-0.5 * t * t).exp()
            }
            Potential3D::RationalDeformation3D(d) => d.z_envelope(z),
            Potential3D::Sum { .. } => unreachable!("z_factor on a sum"),
        }
    }

    /// `(Kx, Ky)`-dependence of a leaf's (x, y)-transform.
    pub(crate) fn kxy_factor(&self, kx: f64, ky: f64) -> C64 {
        match self {
            Potential3D::Gaussian3D { amplitude, center, widths } => {
                let [sx, sy, _] = *widths;
                let mag = 2.0 * PI * sx * sy * (-0.5 * (sx * sx * kx * kx + sy * sy * ky * ky)).exp();
                amplitude * C64::from_polar(mag, -(kx * center[0] + ky * center[1]))
            }
            Potential3D::RationalDeformation3D(d) => d.kxy_profile(kx, ky),
            Potential3D::Sum { .. } => unreachable!("kxy_factor on a sum"),
        }
    }

    pub(crate) fn leaves(&self) -> Vec<&Potential3D> {
        match self {
            Potential3D::Sum { members } => members.iter().flat_map(Potential3D::leaves).collect(),
            _ => vec![self],
        }
    }

    /// Full 3D transform at `q`: analytic in (x, y), Gauss–Legendre in z over
    /// each member's declared z-support.
    pub fn fourier_3d(&self, q: [f64; 3]) -> C64 {
        if let Potential3D::Sum { members } = self {
            return members.iter().map(|m| m.fourier_3d(q)).fold(ZERO, |a, b| a + b);
        }
        let Some((a, b)) = self.z_support() else {
            return ZERO;
        };
        let panels = (((b - a) * (1.0 + q[2].abs())).ceil() as usize).clamp(8, 512);
        let (zs, ws) = composite_rule(a, b, panels, 12);
        let mut s = ZERO;
        for (z, w) in zs.iter().zip(&ws) {
            s += self.fourier_xy(q[0], q[1], *z) * C64::from_polar(*w, -q[2] * z);
        }
        s
    }

    pub fn z_support(&self) -> Option<(f64, f64)> {
        match self {
            Potential3D::Gaussian3D { center, widths, .. } => {
                Some((center[2] - SUPPORT_SIGMAS * widths[2], center[2] + SUPPORT_SIGMAS * widths[2]))
            }
            Potential3D::RationalDeformation3D(d) => {
                Some((-SUPPORT_SIGMAS * d.scales[2], SUPPORT_SIGMAS * d.scales[2]))
            }
            Potential3D::Sum { members } => members
                .iter()
                .filter_map(Potential3D::z_support)
                .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential3D::Gaussian3D { amplitude, .. } => *amplitude == ZERO,
            Potential3D::RationalDeformation3D(d) => d.amplitude_tilde == ZERO,
            Potential3D::Sum { members } => members.iter().all(Potential3D::is_zero),
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        match self {
            Potential3D::Gaussian3D { amplitude, center, widths } => {
                Potential3D::Gaussian3D { amplitude: amplitude * factor, center: *center, widths: *widths }
            }
            Potential3D::RationalDeformation3D(d) => Potential3D::RationalDeformation3D(Deformation3D {
                amplitude_tilde: d.amplitude_tilde * factor,
                amplitude: d.amplitude * factor,
                ..*d
            }),
            Potential3D::Sum { members } => Potential3D::sum(members.iter().map(|m| m.scaled(factor)).collect()),
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-ONE)
    }

    pub fn difference(&self, other: &Potential3D) -> Potential3D {
        Potential3D::sum(vec![self.clone(), other.negated()])
    }
}

/// `base` plus the closed-form deformation built from
/// `f = z̃ qx^{nx} qy^{ny} e^{-(ax qx + ay qy)} e^{-z²/2az²}`.
#[allow(clippy::too_many_arguments)]
pub fn construct_deformation_3d(
    base: &Potential3D,
    alpha: f64,
    amplitude_tilde: C64,
    ax: f64,
    ay: f64,
    az: f64,
    nx: u32,
    ny: u32,
) -> Result<Potential3D> {
    let d = Deformation3D::new(alpha, amplitude_tilde, [ax, ay, az], [nx, ny])?;
    Ok(Potential3D::sum(vec![base.clone(), Potential3D::RationalDeformation3D(d)]))
}
