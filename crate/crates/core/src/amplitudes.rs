//! T-coefficients, scattering amplitudes and diffraction orders.

use std::f64::consts::PI;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::dynamics2d::{transfer_matrix, LatticeTransferMatrix, TransferMatrix2D};
use crate::engine::EngineOptions;
use crate::error::{Error, Result};
use crate::grid::{build_grid_2d, MomentumGrid2D, GRAZING_MARGIN, OUTPUT_COS_FLOOR};
use crate::linalg::{Lu, C64, I, ZERO};
use crate::operator::DeltaFunction;
use crate::potentials::Potential2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            _ => Err(Error::invalid(format!("unknown side {s:?}, expected left or right"))),
        }
    }
}

/// An incident plane wave and the directions at which to read `f`.
/// Angles in radians; left incidence travels towards `+x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringTask {
    pub k: f64,
    pub side: Side,
    pub theta0: f64,
    pub thetas: Vec<f64>,
}

impl ScatteringTask {
    pub fn new(k: f64, side: Side, theta0: f64, thetas: Vec<f64>) -> Result<Self> {
        if theta0.abs() >= PI / 2.0 - GRAZING_MARGIN {
            return Err(Error::GrazingIncidence(theta0.sin().abs()));
        }
        if let Some(t) = thetas.iter().find(|t| t.cos().abs() < OUTPUT_COS_FLOOR) {
            return Err(Error::invalid(format!("output angle {t} rad is grazing")));
        }
        Ok(Self { k, side, theta0, thetas })
    }

    pub fn p0(&self) -> f64 {
        self.k * self.theta0.sin()
    }

    pub fn grid(&self, n_nodes: usize) -> Result<MomentumGrid2D> {
        build_grid_2d(self.k, n_nodes, self.theta0, &self.thetas)
    }
}

/// `n` angles `−180° + (j + ½)·360°/n`, dropping those with `|cos θ| < 10⁻³`.
pub fn default_thetas(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| -PI + (j as f64 + 0.5) * 2.0 * PI / n as f64)
        .filter(|t| t.cos().abs() >= 1e-3)
        .collect()
}

/// `T₋` and `T₊` sampled on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct TCoefficients {
    pub minus: Vec<C64>,
    pub plus: Vec<C64>,
    /// Largest relative residual of the `M₂₂` solves.
    pub residual: f64,
}

pub fn t_coefficients(tm: &TransferMatrix2D, side: Side) -> Result<TCoefficients> {
    let [[m11, m12], [m21, m22]] = &tm.m.blocks;
    let layout = m22.layout;
    let f22 = m22.factor()?;
    let two_pi = C64::new(2.0 * PI, 0.0);
    match side {
        Side::Left => {
            let xi = f22.solve(&m21.apply_to_delta())?;
            let mut plus = m11.apply_to_delta();
            plus.delta -= 1.0;
            let plus = plus.sub(&m12.apply_delta_function(&xi.x)).scale(two_pi);
            let minus = xi.x.scale(-two_pi);
            Ok(TCoefficients { minus: minus.smooth, plus: plus.smooth, residual: xi.residual })
        }
        Side::Right => {
            let y = f22.solve(&DeltaFunction::delta(layout))?;
            // (1 − M₂₂⁻¹)δ has smooth part −η'.
            let minus: Vec<C64> = y.x.smooth.iter().map(|v| v * two_pi).collect();
            let plus = m12.apply_delta_function(&y.x).scale(two_pi);
            Ok(TCoefficients { minus, plus: plus.smooth, residual: y.residual })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeRow {
    pub k: f64,
    pub theta0: f64,
    pub side: Side,
    pub theta: f64,
    pub f: C64,
}

impl AmplitudeRow {
    pub fn abs_f2(&self) -> f64 {
        self.f.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Provenance {
    pub nodes: usize,
    pub slices: usize,
    pub tol: f64,
    pub change: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeTable {
    pub rows: Vec<AmplitudeRow>,
    pub provenance: Provenance,
}

impl AmplitudeTable {
    pub fn values(&self) -> Vec<C64> {
        self.rows.iter().map(|r| r.f).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.iter().map(|r| r.f.norm()).fold(0.0, f64::max)
    }
}

/// `f(θ) = −(i k|cos θ|/√2π) T∓(k sin θ)`, `T₋` for backward (`cos θ < 0`)
/// directions and `T₊` for forward ones.
pub fn amplitude(tm: &TransferMatrix2D, grid: &MomentumGrid2D, side: Side, tol: f64) -> Result<AmplitudeTable> {
    if grid.layout() != tm.m.layout() {
        return Err(Error::GridMismatch);
    }
    let t = t_coefficients(tm, side)?;
    let pref = -I / (2.0 * PI).sqrt();
    let rows = grid
        .thetas
        .iter()
        .zip(&grid.output_index)
        .map(|(&theta, &idx)| {
            let c = theta.cos();
            let tv = if c < 0.0 { t.minus[idx] } else { t.plus[idx] };
            AmplitudeRow { k: grid.k, theta0: grid.theta0, side, theta, f: pref * (grid.k * c.abs()) * tv }
        })
        .collect();
    let provenance = Provenance {
        nodes: grid.n_quad,
        slices: tm.convergence.slices,
        tol,
        change: tm.convergence.change,
        residual: t.residual,
    };
    Ok(AmplitudeTable { rows, provenance })
}

/// Amplitudes for each requested side from a single transfer matrix.
pub fn scatter(
    v: &Potential2D,
    k: f64,
    theta0: f64,
    thetas: &[f64],
    sides: &[Side],
    n_nodes: usize,
    opts: &EngineOptions,
) -> Result<Vec<AmplitudeTable>> {
    scatter_over(v, None, k, theta0, thetas, sides, n_nodes, opts)
}

/// [`scatter`] with the transfer matrix taken over `x_range` rather than the
/// support of `v`.
#[allow(clippy::too_many_arguments)]
pub fn scatter_over(
    v: &Potential2D,
    x_range: Option<(f64, f64)>,
    k: f64,
    theta0: f64,
    thetas: &[f64],
    sides: &[Side],
    n_nodes: usize,
    opts: &EngineOptions,
) -> Result<Vec<AmplitudeTable>> {
    ScatteringTask::new(k, Side::Left, theta0, thetas.to_vec())?;
    let grid = build_grid_2d(k, n_nodes, theta0, thetas)?;
    let tm = transfer_matrix(v, &grid, x_range, opts)?;
    sides.iter().map(|&s| amplitude(&tm, &grid, s, opts.tol)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderRow {
    pub n: i64,
    pub sin_theta: f64,
    pub r: C64,
    pub t: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderTable {
    pub k: f64,
    pub p0: f64,
    pub side: Side,
    pub rows: Vec<OrderRow>,
}

impl OrderTable {
    /// `Σ (|r_n|² + |t_n|²) ϖ_n / ϖ_0`, which is 1 for real lossless combs.
    pub fn flux(&self) -> f64 {
        let w = |s: f64| (1.0 - s * s).max(0.0).sqrt();
        let w0 = w(self.p0 / self.k);
        self.rows.iter().map(|r| (r.r.norm_sqr() + r.t.norm_sqr()) * w(r.sin_theta) / w0).sum()
    }

    pub fn coefficients(&self) -> Vec<C64> {
        self.rows.iter().flat_map(|r| [r.r, r.t]).collect()
    }
}

/// Reflection and transmission amplitudes into each diffraction order,
/// reported raw. Left: `r = −(M₂₂⁻¹M₂₁)(·,0)`, `t = (M₁₁ − M₁₂M₂₂⁻¹M₂₁)(·,0)`.
/// Right: `t = M₂₂⁻¹(·,0)`, `r = (M₁₂M₂₂⁻¹)(·,0)`.
pub fn diffraction_orders(tm: &LatticeTransferMatrix, side: Side) -> Result<OrderTable> {
    let lat = &tm.lattice;
    let n = lat.len();
    let z = lat.zero_index();
    let m22 = tm.block(1, 1);
    let lu = Lu::checked(&m22)?;
    let m12 = tm.block(0, 1);
    let mut e0 = vec![ZERO; n];
    e0[z] = C64::new(1.0, 0.0);
    let (r, t): (Vec<C64>, Vec<C64>) = match side {
        Side::Left => {
            let m21 = tm.block(1, 0);
            let xi = Array1::from(lu.solve(&m21.column(z).to_vec()));
            let t = &tm.block(0, 0).column(z) - &m12.dot(&xi);
            (xi.iter().map(|v| -v).collect(), t.to_vec())
        }
        Side::Right => {
            let t = Array1::from(lu.solve(&e0));
            (m12.dot(&t).to_vec(), t.to_vec())
        }
    };
    let rows = (0..n)
        .map(|i| OrderRow { n: lat.orders[i], sin_theta: lat.nodes[i] / lat.k, r: r[i], t: t[i] })
        .collect();
    Ok(OrderTable { k: lat.k, p0: lat.p0, side, rows })
}
