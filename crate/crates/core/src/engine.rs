//! Ordered slice products shared by the 2D and 3D transfer matrices.
//!
//! `H(x)` has the form `P(x) (𝓚 ⊗ WV) P(x)⁻¹` with `𝓚² = 0`, so each midpoint
//! slice exponential is exactly `I − iΔx H(x_s)`; that is also true of its
//! restriction to the quadrature nodes. The product is accumulated as
//! `M = I + K` with `K` of shape `2·rows × 2·cols`.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, I, ONE, ZERO};
use crate::operator::{BlockOperator, Layout, OperatorRep};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_DOUBLINGS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    /// Initial slice count; `None` resolves the `e^{±2iϖx}` phases.
    pub slices: Option<usize>,
    pub tol: f64,
    pub max_doublings: u32,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { slices: None, tol: DEFAULT_TOL, max_doublings: DEFAULT_MAX_DOUBLINGS }
    }
}

impl EngineOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.slices == Some(0) {
            return Err(Error::invalid("slice count must be at least 1"));
        }
        Ok(())
    }
}

/// How the ordered product was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub slices: usize,
    pub doublings: u32,
    /// Scaled sup-norm change between the last two slice counts; 0 when the
    /// Hamiltonian vanishes identically.
    pub change: f64,
}

/// Ordered slice product `M` with its convergence record.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub m: BlockOperator,
    pub k: f64,
    /// Evolution interval (x in 2D, z in 3D).
    pub range: (f64, f64),
    pub convergence: Convergence,
    /// Determinant of the discretized `2n × 2n` matrix on quadrature nodes.
    pub det: C64,
}

impl TransferMatrix {
    pub(crate) fn finish(m: BlockOperator, k: f64, range: (f64, f64), convergence: Convergence) -> Self {
        let det = if m.is_identity() { ONE } else { m.quadrature_det() };
        Self { m, k, range, convergence, det }
    }
}

/// Scalar kernel `V(x)` on a fixed layout.
pub(crate) trait SliceKernel {
    fn layout(&self) -> Layout;
    /// `ϖ` per row; the columns are the first `layout().cols` rows.
    fn omega(&self) -> &[f64];
    /// Writes `V(x)` into `out`; returns `false` when it is identically zero.
    fn fill(&self, x: f64, out: &mut CMat) -> bool;
    /// `true` when `V(x) = 0` for every `x`.
    fn vanishes(&self) -> bool;
}

/// `(1/2ϖ_i) e^{∓iϖ_i x} V(i,j) e^{±iϖ_j x}` in the `𝓚` sign pattern.
pub(crate) fn hamiltonian_blocks(v: &CMat, omega: &[f64], x: f64, layout: Layout) -> BlockOperator {
    let (rows, cols) = (layout.rows, layout.cols);
    let e: Vec<C64> = omega.iter().map(|w| C64::from_polar(1.0, w * x)).collect();
    let mut blocks: [[CMat; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| Array2::zeros((rows, cols))));
    for i in 0..rows {
        let d = 1.0 / (2.0 * omega[i]);
        for j in 0..cols {
            let val = v[[i, j]] * d;
            blocks[0][0][[i, j]] = val * e[i].conj() * e[j];
            blocks[0][1][[i, j]] = val * e[i].conj() * e[j].conj();
            blocks[1][0][[i, j]] = -val * e[i] * e[j];
            blocks[1][1][[i, j]] = -val * e[i] * e[j].conj();
        }
    }
    let [[h11, h12], [h21, h22]] = blocks;
    let op = |k| OperatorRep::from_kernel(ZERO, k, layout);
    BlockOperator { blocks: [[op(h11), op(h12)], [op(h21), op(h22)]] }
}

/// Accumulated `K` of `M = I + K`.
struct Product {
    layout: Layout,
    k: CMat,
}

impl Product {
    fn new(layout: Layout) -> Self {
        Self { layout, k: Array2::zeros((2 * layout.rows, 2 * layout.cols)) }
    }

    /// `M ← (I − iΔx H(x)) M` given the scalar kernel `v = V(x)`.
    fn apply_slice(&mut self, v: &CMat, omega: &[f64], x: f64, dx: f64, scratch: &mut Scratch) {
        let Layout { rows, cols, quad } = self.layout;
        let e: Vec<C64> = omega.iter().map(|w| C64::from_polar(1.0, w * x)).collect();
        let y = &mut scratch.y;
        for l in 0..quad {
            let (el, eli) = (e[l], e[l].conj());
            let top = self.k.row(l);
            let bottom = self.k.row(rows + l);
            Zip::from(y.row_mut(l)).and(top).and(bottom).for_each(|y, &a, &b| *y = el * a + eli * b);
        }
        let z = &mut scratch.z;
        for i in 0..rows {
            for j in 0..cols {
                let val = v[[i, j]];
                z[[i, j]] = val * e[j];
                z[[i, cols + j]] = val * e[j].conj();
            }
        }
        general_mat_mul(ONE, &v.slice(s![.., ..quad]), &*y, ONE, z);
        for i in 0..rows {
            let f = dx / (2.0 * omega[i]);
            let top = -I * f * e[i].conj();
            let bottom = I * f * e[i];
            let zi = z.row(i);
            Zip::from(self.k.row_mut(i)).and(zi).for_each(|k, &z| *k += top * z);
            Zip::from(self.k.row_mut(rows + i)).and(zi).for_each(|k, &z| *k += bottom * z);
        }
    }

    fn into_blocks(self) -> BlockOperator {
        let Layout { rows, cols, .. } = self.layout;
        let part = |a: usize, b: usize| self.k.slice(s![a * rows..(a + 1) * rows, b * cols..(b + 1) * cols]).to_owned();
        let op = |c, k| OperatorRep::from_kernel(c, k, self.layout);
        BlockOperator {
            blocks: [[op(ONE, part(0, 0)), op(ZERO, part(0, 1))], [op(ZERO, part(1, 0)), op(ONE, part(1, 1))]],
        }
    }
}

struct Scratch {
    y: CMat,
    z: CMat,
}

impl Scratch {
    fn new(layout: Layout) -> Self {
        Self {
            y: Array2::zeros((layout.quad, 2 * layout.cols)),
            z: Array2::zeros((layout.rows, 2 * layout.cols)),
        }
    }
}

/// Midpoint product over `n` equal slices of `[a, b]`, increasing `x`
/// applied right-to-left.
fn product(kernel: &dyn SliceKernel, a: f64, b: f64, n: usize) -> Product {
    let layout = kernel.layout();
    let mut m = Product::new(layout);
    let mut scratch = Scratch::new(layout);
    let mut v = Array2::zeros((layout.rows, layout.cols));
    let dx = (b - a) / n as f64;
    let omega = kernel.omega();
    for s in 0..n {
        let x = a + (s as f64 + 0.5) * dx;
        if kernel.fill(x, &mut v) {
            m.apply_slice(&v, omega, x, dx, &mut scratch);
        }
    }
    m
}

/// Sup-norm of `ΔK` with rows weighted by `ϖ_i/k`, relative to the size of
/// `K` (never below absolute scale 1).
fn scaled_change(old: &CMat, new: &CMat, omega: &[f64], rows: usize) -> f64 {
    let wmax = omega.iter().cloned().fold(0.0, f64::max);
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    for (r, (ro, rn)) in old.rows().into_iter().zip(new.rows()).enumerate() {
        let w = omega[r % rows] / wmax;
        for (a, b) in ro.iter().zip(rn.iter()) {
            diff = diff.max((a - b).norm() * w);
            size = size.max(b.norm() * w);
        }
    }
    diff / size.max(1.0)
}

/// Product with a fixed slice count.
pub(crate) fn ordered_product_fixed(kernel: &dyn SliceKernel, range: (f64, f64), slices: usize) -> BlockOperator {
    let layout = kernel.layout();
    if kernel.vanishes() {
        return BlockOperator::identity(layout);
    }
    product(kernel, range.0, range.1, slices.max(1)).into_blocks()
}

/// Doubles the slice count until the scaled change drops below `tol`.
pub(crate) fn ordered_product(
    kernel: &dyn SliceKernel,
    range: (f64, f64),
    k: f64,
    opts: &EngineOptions,
) -> Result<(BlockOperator, Convergence)> {
    opts.validate()?;
    let layout = kernel.layout();
    if kernel.vanishes() || range.1 <= range.0 {
        return Ok((BlockOperator::identity(layout), Convergence { slices: 1, doublings: 0, change: 0.0 }));
    }
    let mut n = opts
        .slices
        .unwrap_or_else(|| initial_slices(k, range.1 - range.0));
    let omega = kernel.omega();
    let mut prev = product(kernel, range.0, range.1, n);
    let mut change = f64::INFINITY;
    for d in 1..=opts.max_doublings {
        n *= 2;
        let next = product(kernel, range.0, range.1, n);
        change = scaled_change(&prev.k, &next.k, omega, layout.rows);
        prev = next;
        if change < opts.tol {
            return Ok((prev.into_blocks(), Convergence { slices: n, doublings: d, change }));
        }
    }
    Err(Error::NoConvergence { tol: opts.tol, doublings: opts.max_doublings, change })
}

/// `ceil(10 k L / π)`, at least 1.
pub fn initial_slices(k: f64, length: f64) -> usize {
    ((10.0 * k * length / std::f64::consts::PI).ceil() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm, max_abs};

    /// Dense random-ish kernel on a small square layout.
    struct Fixed {
        layout: Layout,
        omega: Vec<f64>,
        v: CMat,
    }

    impl SliceKernel for Fixed {
        fn layout(&self) -> Layout {
            self.layout
        }
        fn omega(&self) -> &[f64] {
            &self.omega
        }
        fn fill(&self, x: f64, out: &mut CMat) -> bool {
            out.assign(&self.v.mapv(|z| z * (-x * x).exp()));
            true
        }
        fn vanishes(&self) -> bool {
            false
        }
    }

    fn fixed(n: usize) -> Fixed {
        let layout = Layout { rows: n, cols: n, quad: n };
        let omega = (0..n).map(|i| 0.3 + 0.1 * i as f64).collect();
        let v = Array2::from_shape_fn((n, n), |(i, j)| C64::new((i as f64 - j as f64).cos(), 0.1 * (i + j) as f64) * 0.2);
        Fixed { layout, omega, v }
    }

    #[test]
    fn slice_update_is_exact_exponential() {
        let k = fixed(5);
        let (x, dx): (f64, f64) = (0.3, 0.2);
        let h = hamiltonian_blocks(&k.v.mapv(|z| z * (-x * x).exp()), &k.omega, x, k.layout).quadrature_matrix();
        assert!(max_abs(&h.dot(&h)) < 1e-15, "H is nilpotent");
        let exact = expm(&h.mapv(|z| -I * dx * z));
        // one slice centred on x
        let m = ordered_product_fixed(&k, (x - dx / 2.0, x + dx / 2.0), 1).quadrature_matrix();
        assert!(max_abs(&(&m - &exact)) < 1e-14);
    }

    #[test]
    fn ordered_right_to_left() {
        let k = fixed(4);
        let whole = ordered_product_fixed(&k, (-1.0, 1.0), 2).quadrature_matrix();
        let left = ordered_product_fixed(&k, (-1.0, 0.0), 1).quadrature_matrix();
        let right = ordered_product_fixed(&k, (0.0, 1.0), 1).quadrature_matrix();
        assert!(max_abs(&(&whole - &right.dot(&left))) < 1e-14);
        assert!(max_abs(&(&whole - &left.dot(&right))) > 1e-6, "factors do not commute");
    }

    #[test]
    fn refinement_reports_slices() {
        let k = fixed(4);
        let opts = EngineOptions { slices: Some(4), tol: 1e-6, max_doublings: 12 };
        let (_, conv) = ordered_product(&k, (-3.0, 3.0), 1.0, &opts).unwrap();
        assert!(conv.change < 1e-6);
        assert_eq!(conv.slices, 4 << conv.doublings);
        let strict = EngineOptions { slices: Some(2), tol: 1e-14, max_doublings: 2 };
        assert!(matches!(ordered_product(&k, (-3.0, 3.0), 1.0, &strict), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn phase_resolution_rule() {
        assert_eq!(initial_slices(1.0, 16.0), 51);
        assert_eq!(initial_slices(1e-9, 1.0), 1);
    }
}
