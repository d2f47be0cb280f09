//! Discretizations of the propagating momentum window.
//!
//! The 2D window `(-k, k)` is sampled with Gauss–Legendre nodes in the angle
//! `φ` of `p = k sin φ`, so the `1/(2ϖ)` endpoint singularity is never
//! touched. Zero-weight *augmented* nodes carry the incidence momentum and
//! the requested output directions; they are read exactly instead of being
//! interpolated. (A Chebyshev map would serve as well; it is not offered.)

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::Layout;
use crate::quadrature::gauss_legendre;

pub const MIN_NODES: usize = 8;
/// Incidence angles within this distance of ±π/2 are rejected.
pub const GRAZING_MARGIN: f64 = 1e-3;
/// Output directions with `|cos θ|` below this are rejected.
pub const OUTPUT_COS_FLOOR: f64 = 1e-6;

/// `ϖ(p) = √(k² − p²)`, written to keep precision near `|p| → k`.
pub fn longitudinal(k: f64, p: f64) -> f64 {
    ((k - p) * (k + p)).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumGrid2D {
    pub k: f64,
    pub n_quad: usize,
    /// Node momenta: quadrature nodes, then the incidence node, then the
    /// remaining output nodes.
    pub nodes: Vec<f64>,
    /// Quadrature weights; zero on augmented nodes.
    pub weights: Vec<f64>,
    pub omega: Vec<f64>,
    pub theta0: f64,
    pub thetas: Vec<f64>,
    /// Node holding `k sin θ_j` for each requested output angle.
    pub output_index: Vec<usize>,
}

impl MomentumGrid2D {
    pub fn incidence_index(&self) -> usize {
        self.n_quad
    }

    pub fn p0(&self) -> f64 {
        self.nodes[self.n_quad]
    }

    pub fn layout(&self) -> Layout {
        Layout { rows: self.nodes.len(), cols: self.n_quad + 1, quad: self.n_quad }
    }

    /// `∫_{-k}^{k} f(p) dp` on the quadrature nodes.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes[..self.n_quad].iter().zip(&self.weights).map(|(p, w)| w * f(*p)).sum()
    }
}

/// Grid for wavenumber `k` with `n_nodes` quadrature nodes, incidence angle
/// `theta0` and output angles `thetas` (radians).
pub fn build_grid_2d(k: f64, n_nodes: usize, theta0: f64, thetas: &[f64]) -> Result<MomentumGrid2D> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
    }
    if n_nodes < MIN_NODES {
        return Err(Error::invalid(format!("need at least {MIN_NODES} quadrature nodes, got {n_nodes}")));
    }
    let s0 = theta0.sin();
    if theta0.abs() >= FRAC_PI_2 - GRAZING_MARGIN || s0.abs() > 1.0 - 1e-6 {
        return Err(Error::GrazingIncidence(s0.abs()));
    }
    let (t, w) = gauss_legendre(n_nodes);
    let mut nodes = Vec::with_capacity(n_nodes + 1 + thetas.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    let mut omega = Vec::with_capacity(nodes.capacity());
    for (ti, wi) in t.iter().zip(&w) {
        let phi = FRAC_PI_2 * ti;
        let (s, c) = phi.sin_cos();
        nodes.push(k * s);
        weights.push(k * c * FRAC_PI_2 * wi);
        omega.push(k * c);
    }
    let p0 = k * s0;
    nodes.push(p0);
    weights.push(0.0);
    omega.push(k * theta0.cos());

    let tol = 1e-13 * k;
    let mut output_index = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let (s, c) = theta.sin_cos();
        if c.abs() < OUTPUT_COS_FLOOR {
            return Err(Error::invalid(format!("output angle {theta} rad is grazing")));
        }
        let p = k * s;
        let existing = (n_nodes..nodes.len()).find(|&i| (nodes[i] - p).abs() <= tol);
        let idx = existing.unwrap_or_else(|| {
            nodes.push(p);
            weights.push(0.0);
            omega.push(k * c.abs());
            nodes.len() - 1
        });
        output_index.push(idx);
    }
    Ok(MomentumGrid2D { k, n_quad: n_nodes, nodes, weights, omega, theta0, thetas: thetas.to_vec(), output_index })
}

/// Diffraction orders of a comb: momenta `p0 + n α1` strictly inside the window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombLattice {
    pub k: f64,
    pub p0: f64,
    pub alpha1: f64,
    pub orders: Vec<i64>,
    pub nodes: Vec<f64>,
    pub omega: Vec<f64>,
}

impl CombLattice {
    pub fn new(k: f64, p0: f64, alpha1: f64) -> Result<Self> {
        if !(k > 0.0 && alpha1 > 0.0) {
            return Err(Error::invalid("lattice needs positive k and lattice frequency"));
        }
        if !(p0.abs() < k) {
            return Err(Error::GrazingIncidence((p0 / k).abs()));
        }
        let lo = ((-k - p0) / alpha1).floor() as i64;
        let hi = ((k - p0) / alpha1).ceil() as i64;
        let orders: Vec<i64> = (lo..=hi).filter(|n| (p0 + *n as f64 * alpha1).abs() < k).collect();
        let nodes: Vec<f64> = orders.iter().map(|n| p0 + *n as f64 * alpha1).collect();
        let omega = nodes.iter().map(|p| longitudinal(k, *p)).collect();
        Ok(Self { k, p0, alpha1, orders, nodes, omega })
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Position of order `n = 0`, always present.
    pub fn zero_index(&self) -> usize {
        self.orders.iter().position(|n| *n == 0).expect("order 0 lies inside the window")
    }
}

/// Polar product grid on the open disk `|p| < k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskGrid3D {
    pub k: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub omega: Vec<f64>,
}

impl DiskGrid3D {
    pub const DEFAULT_RADIAL: usize = 16;
    pub const DEFAULT_ANGULAR: usize = 24;
    pub const MAX_NODES: usize = 1024;

    /// Radii `k sin φ` with Gauss–Legendre `φ ∈ (0, π/2)`, uniform angles `2πj/n`.
    pub fn new(k: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("wavenumber must be positive, got {k}")));
        }
        if n_radial == 0 || n_angular == 0 || n_radial * n_angular > Self::MAX_NODES {
            return Err(Error::invalid(format!(
                "disk grid {n_radial}x{n_angular} must be nonempty with at most {} nodes",
                Self::MAX_NODES
            )));
        }
        let (t, w) = gauss_legendre(n_radial);
        let dtheta = TAU / n_angular as f64;
        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut omega = Vec::with_capacity(nodes.capacity());
        for (ti, wi) in t.iter().zip(&w) {
            let phi = FRAC_PI_4 * (ti + 1.0);
            let (s, c) = phi.sin_cos();
            let r = k * s;
            let wr = r * k * c * FRAC_PI_4 * wi * dtheta;
            for j in 0..n_angular {
                let (sa, ca) = (dtheta * j as f64).sin_cos();
                nodes.push([r * ca, r * sa]);
                weights.push(wr);
                omega.push(k * c);
            }
        }
        Ok(Self { k, n_radial, n_angular, nodes, weights, omega })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn layout(&self) -> Layout {
        let n = self.len();
        Layout { rows: n, cols: n, quad: n }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_window() {
        let g = build_grid_2d(1.0, 64, 0.0, &[]).unwrap();
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 2e-12);
        assert!(g.nodes.iter().all(|p| p.abs() < 1.0));
        assert!(g.omega.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn three_four_five() {
        assert!((longitudinal(1.0, 0.6) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn incidence_node_has_zero_weight() {
        let g = build_grid_2d(2.0, 16, 0.0, &[]).unwrap();
        assert_eq!(g.p0(), 0.0);
        assert_eq!(g.weights[g.incidence_index()], 0.0);
        assert_eq!(g.layout().cols, 17);
    }

    #[test]
    fn grazing_incidence_rejected() {
        assert!(matches!(build_grid_2d(1.0, 16, FRAC_PI_2 - 1e-4, &[]), Err(Error::GrazingIncidence(_))));
        assert!(build_grid_2d(1.0, 4, 0.0, &[]).is_err());
        assert!(build_grid_2d(1.0, 16, 0.0, &[FRAC_PI_2]).is_err());
    }

    #[test]
    fn mirrored_outputs_share_nodes() {
        let th = [0.3, std::f64::consts::PI - 0.3, 0.0, std::f64::consts::PI];
        let g = build_grid_2d(1.0, 16, 0.0, &th).unwrap();
        assert_eq!(g.output_index[0], g.output_index[1]);
        assert_eq!(g.output_index[2], g.incidence_index());
        assert_eq!(g.nodes.len(), 18);
    }

    #[test]
    fn lattice_enumeration() {
        let l = CombLattice::new(1.0, 0.0, 3.0).unwrap();
        assert_eq!(l.orders, vec![0]);
        let l = CombLattice::new(2.0, 0.0, 1.0).unwrap();
        assert_eq!(l.orders, vec![-1, 0, 1]);
        assert_eq!(l.nodes, vec![-1.0, 0.0, 1.0]);
        let l = CombLattice::new(1.9, 0.05, 1.0).unwrap();
        assert_eq!(l.orders, vec![-1, 0, 1]);
        let expect = [-0.95, 0.05, 1.05];
        assert!(l.nodes.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn disk_weights_cover_area() {
        let g = DiskGrid3D::new(1.3, 16, 24).unwrap();
        let s: f64 = g.weights.iter().sum();
        let area = std::f64::consts::PI * 1.3 * 1.3;
        assert!((s - area).abs() < 1e-6 * area);
        assert!(g.nodes.iter().all(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() < 1.3));
        assert!(DiskGrid3D::new(1.0, 40, 40).is_err());
    }
}
