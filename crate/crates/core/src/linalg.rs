//! Dense complex linear algebra: LU with partial pivoting and the matrix
//! exponential.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = Array2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Condition estimates above this are reported as [`Error::SingularOperator`].
pub const MAX_CONDITION: f64 = 1e12;

/// LU factorization `P A = L U` of a square complex matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMat,
    perm: Vec<usize>,
    sign_flips: usize,
    singular: bool,
    norm1: f64,
}

impl Lu {
    pub fn new(a: &CMat) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let norm1 = norm1(a);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign_flips = 0;
        let mut singular = false;
        for k in 0..n {
            let mut piv = k;
            let mut best = lu[[k, k]].norm();
            for r in k + 1..n {
                let v = lu[[r, k]].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if piv != k {
                for c in 0..n {
                    lu.swap([k, c], [piv, c]);
                }
                perm.swap(k, piv);
                sign_flips += 1;
            }
            let inv = ONE / lu[[k, k]];
            for r in k + 1..n {
                let f = lu[[r, k]] * inv;
                lu[[r, k]] = f;
                if f != ZERO {
                    for c in k + 1..n {
                        let u = lu[[k, c]];
                        lu[[r, c]] -= f * u;
                    }
                }
            }
        }
        Self { lu, perm, sign_flips, singular, norm1 }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn det(&self) -> C64 {
        if self.singular {
            return ZERO;
        }
        let mut d = if self.sign_flips % 2 == 0 { ONE } else { -ONE };
        for i in 0..self.dim() {
            d *= self.lu[[i, i]];
        }
        d
    }

    /// Solves `A x = b`. Callers should check [`Lu::condition`] first.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s / self.lu[[i, i]];
        }
        x
    }

    /// 1-norm condition number, computed from the explicit inverse.
    pub fn condition(&self) -> f64 {
        if self.singular {
            return f64::INFINITY;
        }
        let n = self.dim();
        let mut inv_norm = 0.0f64;
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = ZERO);
            e[j] = ONE;
            let col = self.solve(&e);
            let s: f64 = col.iter().map(|v| v.norm()).sum();
            if !s.is_finite() {
                return f64::INFINITY;
            }
            inv_norm = inv_norm.max(s);
        }
        self.norm1 * inv_norm
    }

    /// Factorization guarded by the condition bound.
    pub fn checked(a: &CMat) -> Result<Self> {
        let lu = Self::new(a);
        let cond = lu.condition();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::SingularOperator(cond));
        }
        Ok(lu)
    }
}

pub fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn det(a: &CMat) -> C64 {
    Lu::new(a).det()
}

pub fn identity(n: usize) -> CMat {
    Array2::from_diag_elem(n, ONE)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the degree-13 Padé approximant meets double
/// precision without scaling.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the [13/13] Padé
/// approximant. No eigendecomposition, so non-normal input is fine.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return CMat::zeros((0, 0));
    }
    let norm = norm1(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.mapv(|v| v * 2f64.powi(-s));
    let b = &PADE13;
    let eye = identity(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let u_inner = &a6 * C64::from(b[13]) + &a4 * C64::from(b[11]) + &a2 * C64::from(b[9]);
    let u_inner = a6.dot(&u_inner)
        + &a6 * C64::from(b[7])
        + &a4 * C64::from(b[5])
        + &a2 * C64::from(b[3])
        + &eye * C64::from(b[1]);
    let u = a.dot(&u_inner);
    let v_inner = &a6 * C64::from(b[12]) + &a4 * C64::from(b[10]) + &a2 * C64::from(b[8]);
    let v = a6.dot(&v_inner)
        + &a6 * C64::from(b[6])
        + &a4 * C64::from(b[4])
        + &a2 * C64::from(b[2])
        + &eye * C64::from(b[0]);
    let p = &v + &u;
    let q = &v - &u;
    let lu = Lu::new(&q);
    let mut r = CMat::zeros((n, n));
    for j in 0..n {
        let col: Vec<C64> = p.column(j).to_vec();
        let x = lu.solve(&col);
        for i in 0..n {
            r[[i, j]] = x[i];
        }
    }
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}
