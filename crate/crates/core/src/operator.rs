//! Operators on the momentum window stored as `c·I + K`.
//!
//! The kernel matrix has one row per grid node and one column per
//! quadrature node plus the incidence node. Quadrature columns carry their
//! weight, so `(Kφ)_i = Σ_q K_iq φ_q`; the incidence column is weight-free
//! and equals the kernel applied to `δ(p − p0)`. Composition only sums over
//! quadrature nodes, which makes it exact for both column kinds.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, Lu, C64, ONE, ZERO};

/// Shape of the kernel matrices living on one grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub rows: usize,
    pub cols: usize,
    pub quad: usize,
}

impl Layout {
    /// Column of `δ(p − p0)`, if the grid carries one.
    pub fn delta_col(&self) -> Option<usize> {
        (self.cols > self.quad).then_some(self.quad)
    }
}

/// `a δ(p − p0) + s(p)`, with `s` sampled on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaFunction {
    pub delta: C64,
    pub smooth: Vec<C64>,
}

impl DeltaFunction {
    pub fn delta(layout: Layout) -> Self {
        Self { delta: ONE, smooth: vec![ZERO; layout.rows] }
    }

    pub fn smooth(values: Vec<C64>) -> Self {
        Self { delta: ZERO, smooth: values }
    }

    pub fn scale(mut self, f: C64) -> Self {
        self.delta *= f;
        self.smooth.iter_mut().for_each(|v| *v *= f);
        self
    }

    pub fn sub(mut self, other: &DeltaFunction) -> Self {
        self.delta -= other.delta;
        self.smooth.iter_mut().zip(&other.smooth).for_each(|(a, b)| *a -= b);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRep {
    pub coeff: C64,
    pub kernel: CMat,
    pub layout: Layout,
}

impl OperatorRep {
    pub fn zero(layout: Layout) -> Self {
        Self { coeff: ZERO, kernel: Array2::zeros((layout.rows, layout.cols)), layout }
    }

    pub fn identity(layout: Layout) -> Self {
        Self { coeff: ONE, ..Self::zero(layout) }
    }

    pub fn from_kernel(coeff: C64, kernel: CMat, layout: Layout) -> Self {
        assert_eq!(kernel.dim(), (layout.rows, layout.cols), "kernel shape does not match layout");
        Self { coeff, kernel, layout }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == ZERO && self.kernel.iter().all(|v| *v == ZERO)
    }

    pub fn max_kernel_modulus(&self) -> f64 {
        max_abs(&self.kernel)
    }

    fn check(&self, other: &OperatorRep) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorRep) -> Result<OperatorRep> {
        self.check(other)?;
        Ok(Self { coeff: self.coeff + other.coeff, kernel: &self.kernel + &other.kernel, layout: self.layout })
    }

    pub fn sub(&self, other: &OperatorRep) -> Result<OperatorRep> {
        self.check(other)?;
        Ok(Self { coeff: self.coeff - other.coeff, kernel: &self.kernel - &other.kernel, layout: self.layout })
    }

    pub fn scale(&self, f: C64) -> OperatorRep {
        Self { coeff: self.coeff * f, kernel: self.kernel.mapv(|v| v * f), layout: self.layout }
    }

    /// `self ∘ other`: `(c_A c_B, c_A K_B + c_B K_A + K_A K_B)`.
    pub fn compose(&self, other: &OperatorRep) -> Result<OperatorRep> {
        self.check(other)?;
        let q = self.layout.quad;
        let mut kernel = self.kernel.slice(s![.., ..q]).dot(&other.kernel.slice(s![..q, ..]));
        if self.coeff != ZERO {
            kernel.scaled_add(self.coeff, &other.kernel);
        }
        if other.coeff != ZERO {
            kernel.scaled_add(other.coeff, &self.kernel);
        }
        Ok(Self { coeff: self.coeff * other.coeff, kernel, layout: self.layout })
    }

    /// `(c I + K) φ` for `φ` sampled on every node.
    pub fn apply(&self, phi: &[C64]) -> Vec<C64> {
        assert_eq!(phi.len(), self.layout.rows);
        let q = self.layout.quad;
        (0..self.layout.rows)
            .map(|i| {
                let row = self.kernel.row(i);
                let mut s = self.coeff * phi[i];
                for j in 0..q {
                    s += row[j] * phi[j];
                }
                s
            })
            .collect()
    }

    /// Kernel column at the incidence node: the operator applied to
    /// `δ(p − p0)`, minus its identity part.
    pub fn delta_column(&self) -> Vec<C64> {
        let j = self.layout.delta_col().expect("grid has no incidence node");
        self.kernel.column(j).to_vec()
    }

    pub fn apply_to_delta(&self) -> DeltaFunction {
        DeltaFunction { delta: self.coeff, smooth: self.delta_column() }
    }

    pub fn apply_delta_function(&self, f: &DeltaFunction) -> DeltaFunction {
        let mut smooth = self.apply(&f.smooth);
        if f.delta != ZERO {
            let col = self.delta_column();
            smooth.iter_mut().zip(col).for_each(|(s, c)| *s += f.delta * c);
        }
        DeltaFunction { delta: self.coeff * f.delta, smooth }
    }

    /// The Nyström matrix `c I + K` restricted to quadrature nodes.
    pub fn quadrature_matrix(&self) -> CMat {
        let q = self.layout.quad;
        let mut a = self.kernel.slice(s![..q, ..q]).to_owned();
        for i in 0..q {
            a[[i, i]] += self.coeff;
        }
        a
    }

    pub fn factor(&self) -> Result<FactoredOperator<'_>> {
        let lu = Lu::checked(&self.quadrature_matrix())?;
        Ok(FactoredOperator { op: self, lu })
    }

    /// Solves `(c I + K) x = rhs`; see [`FactoredOperator::solve`].
    pub fn solve(&self, rhs: &DeltaFunction) -> Result<Solved> {
        self.factor()?.solve(rhs)
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub x: DeltaFunction,
    /// `‖(cI + K)x − rhs‖ / ‖rhs‖` over quadrature nodes.
    pub residual: f64,
}

/// Reusable LU factorization of an operator's quadrature block.
pub struct FactoredOperator<'a> {
    op: &'a OperatorRep,
    lu: Lu,
}

impl FactoredOperator<'_> {
    pub fn condition(&self) -> f64 {
        self.lu.condition()
    }

    /// `x = (b_δ/c) δ + η` with `(cI + K) η = b_s − (b_δ/c) K(·, p0)`; values
    /// on augmented rows follow by Nyström interpolation.
    pub fn solve(&self, rhs: &DeltaFunction) -> Result<Solved> {
        let op = self.op;
        let layout = op.layout;
        let q = layout.quad;
        assert_eq!(rhs.smooth.len(), layout.rows);
        let needs_c = rhs.delta != ZERO || layout.rows > q;
        if needs_c && op.coeff == ZERO {
            return Err(Error::SingularOperator(f64::INFINITY));
        }
        let x_delta = if rhs.delta == ZERO { ZERO } else { rhs.delta / op.coeff };
        let mut b = rhs.smooth.clone();
        if x_delta != ZERO {
            let col = op.delta_column();
            b.iter_mut().zip(col).for_each(|(bi, ci)| *bi -= x_delta * ci);
        }
        let eta_q = self.lu.solve(&b[..q]);
        let mut eta = vec![ZERO; layout.rows];
        eta[..q].copy_from_slice(&eta_q);
        for i in q..layout.rows {
            let row = op.kernel.row(i);
            let mut s = b[i];
            for j in 0..q {
                s -= row[j] * eta_q[j];
            }
            eta[i] = s / op.coeff;
        }
        let applied = op.apply(&eta);
        let num: f64 = applied[..q].iter().zip(&b[..q]).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = b[..q].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let residual = if den == 0.0 { num } else { num / den };
        Ok(Solved { x: DeltaFunction { delta: x_delta, smooth: eta }, residual })
    }
}

/// 2×2 array of operators on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub blocks: [[OperatorRep; 2]; 2],
}

impl BlockOperator {
    pub fn identity(layout: Layout) -> Self {
        Self {
            blocks: [
                [OperatorRep::identity(layout), OperatorRep::zero(layout)],
                [OperatorRep::zero(layout), OperatorRep::identity(layout)],
            ],
        }
    }

    pub fn zero(layout: Layout) -> Self {
        let z = OperatorRep::zero(layout);
        Self { blocks: [[z.clone(), z.clone()], [z.clone(), z]] }
    }

    pub fn layout(&self) -> Layout {
        self.blocks[0][0].layout
    }

    pub fn block(&self, i: usize, j: usize) -> &OperatorRep {
        &self.blocks[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().flatten().all(OperatorRep::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.layout())
    }

    pub fn trace_coeff(&self) -> C64 {
        self.blocks[0][0].coeff + self.blocks[1][1].coeff
    }

    pub fn max_kernel_modulus(&self) -> f64 {
        self.blocks.iter().flatten().map(OperatorRep::max_kernel_modulus).fold(0.0, f64::max)
    }

    pub fn compose(&self, other: &BlockOperator) -> Result<BlockOperator> {
        let entry = |i: usize, j: usize| -> Result<OperatorRep> {
            self.blocks[i][0].compose(&other.blocks[0][j])?.add(&self.blocks[i][1].compose(&other.blocks[1][j])?)
        };
        Ok(Self { blocks: [[entry(0, 0)?, entry(0, 1)?], [entry(1, 0)?, entry(1, 1)?]] })
    }

    pub fn sub(&self, other: &BlockOperator) -> Result<BlockOperator> {
        let e = |i: usize, j: usize| self.blocks[i][j].sub(&other.blocks[i][j]);
        Ok(Self { blocks: [[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]] })
    }

    /// The `2q × 2q` Nyström matrix on quadrature nodes.
    pub fn quadrature_matrix(&self) -> CMat {
        let q = self.layout().quad;
        let mut m = CMat::zeros((2 * q, 2 * q));
        for a in 0..2 {
            for b in 0..2 {
                m.slice_mut(s![a * q..(a + 1) * q, b * q..(b + 1) * q])
                    .assign(&self.blocks[a][b].quadrature_matrix());
            }
        }
        m
    }

    /// Trace of the Nyström matrix.
    pub fn quadrature_trace(&self) -> C64 {
        let m = self.quadrature_matrix();
        (0..m.nrows()).map(|i| m[[i, i]]).sum()
    }

    pub fn quadrature_det(&self) -> C64 {
        Lu::new(&self.quadrature_matrix()).det()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const L: Layout = Layout { rows: 9, cols: 7, quad: 6 };

    fn random_op(rng: &mut ChaCha8Rng, coeff: C64, scale: f64) -> OperatorRep {
        let kernel = Array2::from_shape_fn((L.rows, L.cols), |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
        });
        OperatorRep::from_kernel(coeff, kernel, L)
    }

    fn close(a: &OperatorRep, b: &OperatorRep, tol: f64) -> bool {
        (a.coeff - b.coeff).norm() < tol && max_abs(&(&a.kernel - &b.kernel)) < tol
    }

    #[test]
    fn identity_and_zero_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_op(&mut rng, C64::new(0.5, 0.2), 1.0);
        assert_eq!(OperatorRep::identity(L).compose(&x).unwrap(), x);
        assert_eq!(x.compose(&OperatorRep::identity(L)).unwrap(), x);
        assert!(OperatorRep::zero(L).compose(&x).unwrap().is_zero());
        let k = random_op(&mut rng, ZERO, 1.0);
        assert_eq!(k.compose(&k).unwrap().coeff, ZERO);
    }

    #[test]
    fn grid_mismatch() {
        let other = Layout { rows: 9, cols: 7, quad: 5 };
        let a = OperatorRep::identity(L);
        assert!(matches!(a.compose(&OperatorRep::identity(other)), Err(Error::GridMismatch)));
    }

    #[test]
    fn compose_matches_sequential_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_op(&mut rng, C64::new(1.0, -0.3), 0.7);
        let b = random_op(&mut rng, C64::new(0.2, 0.9), 0.7);
        let ab = a.compose(&b).unwrap();
        let f = DeltaFunction {
            delta: C64::new(0.4, -1.0),
            smooth: (0..L.rows).map(|i| C64::new(i as f64, 1.0)).collect(),
        };
        let lhs = ab.apply_delta_function(&f);
        let rhs = a.apply_delta_function(&b.apply_delta_function(&f));
        assert!((lhs.delta - rhs.delta).norm() < 1e-12);
        for (x, y) in lhs.smooth.iter().zip(&rhs.smooth) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn solve_trivial_cases() {
        let b: Vec<C64> = (0..L.rows).map(|i| C64::new(1.0 + i as f64, -2.0)).collect();
        let x = OperatorRep::identity(L).solve(&DeltaFunction::smooth(b.clone())).unwrap().x;
        assert_eq!(x.smooth, b);
        let two = OperatorRep::identity(L).scale(C64::new(2.0, 0.0));
        let x = two.solve(&DeltaFunction::smooth(b.clone())).unwrap().x;
        for (xi, bi) in x.smooth.iter().zip(&b) {
            assert!((xi - bi / 2.0).norm() < 1e-15);
        }
    }

    #[test]
    fn solve_with_delta_rhs_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_op(&mut rng, C64::new(1.5, 0.4), 0.3);
            let rhs = DeltaFunction {
                delta: C64::new(rng.random_range(-1.0..1.0), 0.3),
                smooth: (0..L.rows).map(|_| C64::new(rng.random_range(-1.0..1.0), 0.1)).collect(),
            };
            let sol = a.solve(&rhs).unwrap();
            assert!(sol.residual < 1e-10);
            let back = a.apply_delta_function(&sol.x);
            assert!((back.delta - rhs.delta).norm() < 1e-12);
            for (x, y) in back.smooth.iter().zip(&rhs.smooth) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pure_kernel_cannot_reach_augmented_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_op(&mut rng, ZERO, 1.0);
        let r = a.solve(&DeltaFunction::smooth(vec![ONE; L.rows]));
        assert!(matches!(r, Err(Error::SingularOperator(_))));
    }

    #[test]
    fn singular_operator_reported() {
        // I + K with K = -I on quadrature nodes
        let mut kernel = CMat::zeros((L.rows, L.cols));
        for i in 0..L.quad {
            kernel[[i, i]] = -ONE;
        }
        let a = OperatorRep::from_kernel(ONE, kernel, L);
        assert!(matches!(a.factor(), Err(Error::SingularOperator(_))));
    }

    #[test]
    fn block_identity_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = BlockOperator {
            blocks: [
                [random_op(&mut rng, ONE, 0.5), random_op(&mut rng, ZERO, 0.5)],
                [random_op(&mut rng, ZERO, 0.5), random_op(&mut rng, ONE, 0.5)],
            ],
        };
        let id = BlockOperator::identity(L);
        let p = id.compose(&b).unwrap();
        for (x, y) in p.blocks.iter().flatten().zip(b.blocks.iter().flatten()) {
            assert!(close(x, y, 0.0 + 1e-15));
        }
        assert!(id.is_identity());
        assert_eq!(id.trace_coeff(), C64::new(2.0, 0.0));
    }
}
