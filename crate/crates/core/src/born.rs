//! First Born approximation in 2D and 3D.
//!
//! In 2D the outgoing Hankel asymptotics
//! `H₀⁽¹⁾(kr) ≈ √(2/πkr) e^{i(kr − π/4)}` against the normalization
//! `ψ ≈ e^{ik₀·r} + √(i/kr) e^{ikr} f(θ)` give `f_B = −ṽ(kŝ − k₀)/(2√2π)`,
//! where `ṽ(q) = ∫ d²r e^{−iq·r} v(r)` and `−Δψ + vψ = k²ψ`. In 3D the same
//! matching gives the textbook `f_B = −ṽ(k(ŝ − ŝ₀))/4π`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::amplitudes::{AmplitudeRow, AmplitudeTable, Provenance, ScatteringTask, Side};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::potentials::{Potential2D, Potential3D};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornResult {
    /// Momentum transfer `k ŝ − k₀`.
    pub q: Vec<f64>,
    pub vtilde: C64,
    pub f: C64,
}

/// Incident wave vector; right incidence travels towards `−x`.
pub fn incident_vector(k: f64, theta0: f64, side: Side) -> [f64; 2] {
    let (s, c) = theta0.sin_cos();
    match side {
        Side::Left => [k * c, k * s],
        Side::Right => [-k * c, k * s],
    }
}

pub fn born_2d(v: &Potential2D, k: f64, theta0: f64, theta: f64, side: Side) -> Result<BornResult> {
    if v.contains_comb() {
        return Err(Error::UnsupportedFamily("DeltaComb has no two-dimensional Fourier transform"));
    }
    let k0 = incident_vector(k, theta0, side);
    let q = [k * theta.cos() - k0[0], k * theta.sin() - k0[1]];
    let vtilde = v.fourier_2d(q[0], q[1])?;
    let f = -vtilde / (2.0 * (2.0 * PI).sqrt());
    Ok(BornResult { q: q.to_vec(), vtilde, f })
}

/// Born amplitudes for a task, in the same table shape as the transfer-matrix
/// amplitudes.
pub fn born_table(v: &Potential2D, task: &ScatteringTask) -> Result<AmplitudeTable> {
    let rows = task
        .thetas
        .iter()
        .map(|&theta| {
            let f = born_2d(v, task.k, task.theta0, theta, task.side)?.f;
            Ok(AmplitudeRow { k: task.k, theta0: task.theta0, side: task.side, theta, f })
        })
        .collect::<Result<Vec<_>>>()?;
    let provenance = Provenance { nodes: 0, slices: 0, tol: 0.0, change: 0.0, residual: 0.0 };
    Ok(AmplitudeTable { rows, provenance })
}

fn unit(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid("direction vector must be nonzero"));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

/// `s0` and `s` need not be normalized.
pub fn born_3d(v: &Potential3D, k: f64, s0: [f64; 3], s: [f64; 3]) -> Result<BornResult> {
    let (s0, s) = (unit(s0)?, unit(s)?);
    let q = [k * (s[0] - s0[0]), k * (s[1] - s0[1]), k * (s[2] - s0[2])];
    let vtilde = v.fourier_3d(q);
    let f = -vtilde / (4.0 * PI);
    Ok(BornResult { q: q.to_vec(), vtilde, f })
}
