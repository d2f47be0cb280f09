//! Potential operator, effective Hamiltonian and transfer matrix in 2D.

use std::f64::consts::PI;

use ndarray::{s, Array2};
use serde::Serialize;

use crate::engine::{self, hamiltonian_blocks, Convergence, EngineOptions, SliceKernel, TransferMatrix};
use crate::error::{Error, Result};
use crate::grid::{CombLattice, MomentumGrid2D};
use crate::linalg::{det, expm, CMat, C64, I, ZERO};
use crate::operator::{BlockOperator, Layout, OperatorRep};
use crate::potentials::Potential2D;

/// `V(x)` on a 2D grid. Separable leaves are stored as `g(x) P`, so a slice
/// costs one scaled sum; a profile `P` that vanishes at every node pair is
/// dropped up front.
pub(crate) struct Kernel2D<'a> {
    grid: &'a MomentumGrid2D,
    layout: Layout,
    profiles: Vec<(&'a Potential2D, CMat)>,
    general: Vec<&'a Potential2D>,
}

impl<'a> Kernel2D<'a> {
    pub(crate) fn new(v: &'a Potential2D, grid: &'a MomentumGrid2D) -> Result<Self> {
        if v.contains_comb() {
            return Err(Error::CombRequiresLattice);
        }
        let layout = grid.layout();
        let mut profiles = Vec::new();
        let mut general = Vec::new();
        for leaf in v.leaves() {
            match leaf {
                crate::potentials::Leaf::Separable(p) => {
                    let m = assemble(grid, layout, |ky| p.ky_factor(ky));
                    if m.iter().any(|z| *z != ZERO) {
                        profiles.push((p, m));
                    }
                }
                crate::potentials::Leaf::General(p) => general.push(p),
            }
        }
        Ok(Self { grid, layout, profiles, general })
    }
}

/// `F(p_i − p_j) w_j / 2π`, weight-free in the incidence column.
fn assemble(grid: &MomentumGrid2D, layout: Layout, f: impl Fn(f64) -> C64) -> CMat {
    let mut m = Array2::zeros((layout.rows, layout.cols));
    for i in 0..layout.rows {
        for j in 0..layout.cols {
            let w = if j < layout.quad { grid.weights[j] } else { 1.0 };
            m[[i, j]] = f(grid.nodes[i] - grid.nodes[j]) * (w / (2.0 * PI));
        }
    }
    m
}

impl SliceKernel for Kernel2D<'_> {
    fn layout(&self) -> Layout {
        self.layout
    }

    fn omega(&self) -> &[f64] {
        &self.grid.omega
    }

    fn fill(&self, x: f64, out: &mut CMat) -> bool {
        out.fill(ZERO);
        let mut any = false;
        for (p, m) in &self.profiles {
            let g = p.x_factor(x);
            if g != 0.0 {
                out.scaled_add(C64::new(g, 0.0), m);
                any = true;
            }
        }
        for p in &self.general {
            // Tabulated leaves only; their transform cannot fail.
            let m = assemble(self.grid, self.layout, |ky| p.fourier_y(x, ky).unwrap_or(ZERO));
            *out += &m;
            any = true;
        }
        any && out.iter().any(|z| *z != ZERO)
    }

    fn vanishes(&self) -> bool {
        self.profiles.is_empty() && self.general.is_empty()
    }
}

/// `(1/2π) ṽ(x, p_i − p_j) w_j`, identity coefficient 0.
pub fn potential_operator(v: &Potential2D, x: f64, grid: &MomentumGrid2D) -> Result<OperatorRep> {
    let kernel = Kernel2D::new(v, grid)?;
    let layout = kernel.layout;
    let mut m = Array2::zeros((layout.rows, layout.cols));
    kernel.fill(x, &mut m);
    Ok(OperatorRep::from_kernel(ZERO, m, layout))
}

/// `H(x) = (1/2ϖ) e^{−iϖxσ₃} V 𝓚 e^{iϖxσ₃}`.
pub fn hamiltonian(v: &Potential2D, x: f64, grid: &MomentumGrid2D) -> Result<BlockOperator> {
    let vop = potential_operator(v, x, grid)?;
    Ok(hamiltonian_blocks(&vop.kernel, &grid.omega, x, vop.layout))
}

/// Transfer matrix over a 2D momentum grid.
pub type TransferMatrix2D = TransferMatrix;

fn default_range(v: &Potential2D) -> (f64, f64) {
    v.x_support().unwrap_or((0.0, 0.0))
}

/// Ordered product `∏ exp(−iΔx H(x_s))` over `x_range` (default: the
/// potential's support), doubling slices until converged. Parts of `v`
/// outside `x_range` are ignored.
pub fn transfer_matrix(
    v: &Potential2D,
    grid: &MomentumGrid2D,
    x_range: Option<(f64, f64)>,
    opts: &EngineOptions,
) -> Result<TransferMatrix2D> {
    let kernel = Kernel2D::new(v, grid)?;
    let range = x_range.unwrap_or_else(|| default_range(v));
    let (m, conv) = engine::ordered_product(&kernel, range, grid.k, opts)?;
    Ok(TransferMatrix::finish(m, grid.k, range, conv))
}

/// Same product with exactly `slices` slices and no refinement.
pub fn transfer_matrix_fixed(
    v: &Potential2D,
    grid: &MomentumGrid2D,
    x_range: Option<(f64, f64)>,
    slices: usize,
) -> Result<TransferMatrix2D> {
    let kernel = Kernel2D::new(v, grid)?;
    let range = x_range.unwrap_or_else(|| default_range(v));
    let m = engine::ordered_product_fixed(&kernel, range, slices);
    let slices = if kernel.vanishes() { 1 } else { slices.max(1) };
    Ok(TransferMatrix::finish(m, grid.k, range, Convergence { slices, doublings: 0, change: f64::NAN }))
}

/// Transfer matrix of a δ-comb over its diffraction orders, as one dense
/// `2n × 2n` matrix ordered `[M11 M12; M21 M22]`.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeTransferMatrix {
    pub lattice: CombLattice,
    #[serde(skip)]
    pub m: CMat,
    #[serde(skip)]
    pub det: C64,
}

impl LatticeTransferMatrix {
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    pub fn block(&self, a: usize, b: usize) -> CMat {
        let n = self.len();
        self.m.slice(s![a * n..(a + 1) * n, b * n..(b + 1) * n]).to_owned()
    }
}

/// `H_δ` on the lattice: `V(n, n') = z_{n−n'}` in the `𝓚` pattern at `x = 0`.
pub fn delta_hamiltonian(comb: &Potential2D, lattice: &CombLattice) -> Result<CMat> {
    let Potential2D::DeltaComb { coefficients, lattice_frequency } = comb else {
        return Err(Error::UnsupportedFamily("the lattice backend takes a single DeltaComb"));
    };
    if (lattice_frequency - lattice.alpha1).abs() > 1e-15 * lattice.alpha1 {
        return Err(Error::GridMismatch);
    }
    let big_n = (coefficients.len() / 2) as i64;
    let n = lattice.len();
    let mut h = Array2::zeros((2 * n, 2 * n));
    for (a, &na) in lattice.orders.iter().enumerate() {
        let d = 1.0 / (2.0 * lattice.omega[a]);
        for (b, &nb) in lattice.orders.iter().enumerate() {
            let diff = na - nb;
            if diff.abs() > big_n {
                continue;
            }
            let z = coefficients[(diff + big_n) as usize] * d;
            h[[a, b]] = z;
            h[[a, n + b]] = z;
            h[[n + a, b]] = -z;
            h[[n + a, n + b]] = -z;
        }
    }
    Ok(h)
}

/// `M = exp(−i H_δ)`.
pub fn delta_transfer_matrix(comb: &Potential2D, lattice: &CombLattice) -> Result<LatticeTransferMatrix> {
    let h = delta_hamiltonian(comb, lattice)?;
    let m = expm(&h.mapv(|z| -I * z));
    let det = det(&m);
    Ok(LatticeTransferMatrix { lattice: lattice.clone(), m, det })
}
