//! Operator-level 3D dynamics on a disk grid: potential operator,
//! Hamiltonian, transfer matrix and the Hamiltonian equality check.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::Serialize;

use crate::engine::{self, hamiltonian_blocks, EngineOptions, SliceKernel, TransferMatrix};
use crate::error::Result;
use crate::grid::DiskGrid3D;
use crate::lab::Verdict;
use crate::linalg::{max_abs, CMat, C64, ZERO};
use crate::operator::{BlockOperator, Layout, OperatorRep};
use crate::potentials::Potential3D;

/// Transfer matrix over a disk grid; the evolution coordinate is z.
pub type TransferMatrix3D = TransferMatrix;

pub(crate) struct Kernel3D<'a> {
    grid: &'a DiskGrid3D,
    layout: Layout,
    profiles: Vec<(&'a Potential3D, CMat)>,
}

impl<'a> Kernel3D<'a> {
    pub(crate) fn new(v: &'a Potential3D, grid: &'a DiskGrid3D) -> Self {
        let layout = grid.layout();
        let n = layout.rows;
        let profiles = v
            .leaves()
            .into_iter()
            .filter_map(|leaf| {
                let m = Array2::from_shape_fn((n, n), |(i, j)| {
                    let [pi, qi] = grid.nodes[i];
                    let [pj, qj] = grid.nodes[j];
                    leaf.kxy_factor(pi - pj, qi - qj) * (grid.weights[j] / (4.0 * PI * PI))
                });
                m.iter().any(|z| *z != ZERO).then_some((leaf, m))
            })
            .collect();
        Self { grid, layout, profiles }
    }
}

impl SliceKernel for Kernel3D<'_> {
    fn layout(&self) -> Layout {
        self.layout
    }

    fn omega(&self) -> &[f64] {
        &self.grid.omega
    }

    fn fill(&self, z: f64, out: &mut CMat) -> bool {
        out.fill(ZERO);
        let mut any = false;
        for (p, m) in &self.profiles {
            let g = p.z_factor(z);
            if g != 0.0 {
                out.scaled_add(C64::new(g, 0.0), m);
                any = true;
            }
        }
        any && out.iter().any(|z| *z != ZERO)
    }

    fn vanishes(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// `(1/4π²) ṽ(p_i − p_j, z) w_j`, identity coefficient 0.
pub fn potential_operator_3d(v: &Potential3D, z: f64, grid: &DiskGrid3D) -> OperatorRep {
    let kernel = Kernel3D::new(v, grid);
    let mut m = Array2::zeros((kernel.layout.rows, kernel.layout.cols));
    kernel.fill(z, &mut m);
    OperatorRep::from_kernel(ZERO, m, kernel.layout)
}

pub fn hamiltonian_3d(v: &Potential3D, z: f64, grid: &DiskGrid3D) -> BlockOperator {
    let vop = potential_operator_3d(v, z, grid);
    hamiltonian_blocks(&vop.kernel, &grid.omega, z, vop.layout)
}

/// Ordered product over `z_range` (default: the z-support).
pub fn transfer_matrix_3d(
    v: &Potential3D,
    grid: &DiskGrid3D,
    z_range: Option<(f64, f64)>,
    opts: &EngineOptions,
) -> Result<TransferMatrix3D> {
    let kernel = Kernel3D::new(v, grid);
    let range = z_range.or_else(|| v.z_support()).unwrap_or((0.0, 0.0));
    let (m, conv) = engine::ordered_product(&kernel, range, grid.k, opts)?;
    Ok(TransferMatrix::finish(m, grid.k, range, conv))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskGridSpec {
    pub k: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub nodes: usize,
}

impl From<&DiskGrid3D> for DiskGridSpec {
    fn from(g: &DiskGrid3D) -> Self {
        Self { k: g.k, n_radial: g.n_radial, n_angular: g.n_angular, nodes: g.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityReport {
    pub k: f64,
    /// `max |H[v₂ − v₁]|` over all blocks, node pairs and z samples.
    pub max_kernel_modulus: f64,
    /// `max |H[v₂] − H[v₁] − H[v₂ − v₁]|`.
    pub linearity_error: f64,
    /// `pass` iff the difference Hamiltonian is exactly zero.
    pub verdict: Verdict,
    pub grid: DiskGridSpec,
    pub z_samples: usize,
}

fn block_diff(a: &BlockOperator, b: &BlockOperator) -> f64 {
    a.blocks
        .iter()
        .flatten()
        .zip(b.blocks.iter().flatten())
        .map(|(x, y)| max_abs(&(&x.kernel - &y.kernel)))
        .fold(0.0, f64::max)
}

/// `n` midpoints spanning the joint z-support of `v1` and `v2`.
pub fn default_z_samples(v1: &Potential3D, v2: &Potential3D, n: usize) -> Vec<f64> {
    let (a, b) = match (v1.z_support(), v2.z_support()) {
        (Some(x), Some(y)) => (x.0.min(y.0), x.1.max(y.1)),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => return vec![0.0],
    };
    (0..n).map(|i| a + (i as f64 + 0.5) * (b - a) / n as f64).collect()
}

pub fn hamiltonian_equality_check(
    v1: &Potential3D,
    v2: &Potential3D,
    grid: &DiskGrid3D,
    z_samples: &[f64],
) -> EqualityReport {
    let dv = v2.difference(v1);
    let (k1, k2, kd) = (Kernel3D::new(v1, grid), Kernel3D::new(v2, grid), Kernel3D::new(&dv, grid));
    let layout = grid.layout();
    let mut buf = Array2::zeros((layout.rows, layout.cols));
    let mut h = |k: &Kernel3D<'_>, z: f64| {
        k.fill(z, &mut buf);
        hamiltonian_blocks(&buf, &grid.omega, z, layout)
    };
    let (mut max_mod, mut lin): (f64, f64) = (0.0, 0.0);
    for &z in z_samples {
        let hd = h(&kd, z);
        max_mod = max_mod.max(hd.max_kernel_modulus());
        let split = h(&k2, z).sub(&h(&k1, z)).expect("same grid");
        lin = lin.max(block_diff(&split, &hd));
    }
    EqualityReport {
        k: grid.k,
        max_kernel_modulus: max_mod,
        linearity_error: lin,
        verdict: if max_mod == 0.0 { Verdict::Pass } else { Verdict::Fail },
        grid: grid.into(),
        z_samples: z_samples.len(),
    }
}
